#include "strobe/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "strobe/fft.hpp"

namespace strobe {

namespace {
constexpr double kProbSumTolerance = 1e-9;
constexpr double kEdgeDensityLimit = 1e-8;
constexpr double kEdgeAlignTolerance = 1e-9;
}  // namespace

double OutcomeBinning::outcome_position(std::size_t n) const {
    switch (mode) {
        case BinningMode::position_bins:
            return 0.5 * (bin_edges[n] + bin_edges[n + 1]);
        case BinningMode::detector_window:
            // outcome 0 = inside, outcome 1 = outside
            return n == 0 ? detector_x : std::numeric_limits<double>::quiet_NaN();
        default:
            raise(Errc::binning_mismatch, "two-level outcomes carry no position");
    }
}

OutcomeBinning OutcomeBinning::uniform_bins(const GridSpec& grid, std::size_t n_bins) {
    require(n_bins >= 1, Errc::invalid_argument, "need at least one bin");
    OutcomeBinning b;
    b.mode = BinningMode::position_bins;
    b.bin_edges.resize(n_bins + 1);
    for (std::size_t i = 0; i <= n_bins; ++i)
        b.bin_edges[i] =
            grid.x_min + grid.length() * static_cast<double>(i) / static_cast<double>(n_bins);
    b.bin_edges.back() = grid.x_max;
    return b;
}

OutcomeBinning OutcomeBinning::window(double center, double halfwidth) {
    OutcomeBinning b;
    b.mode = BinningMode::detector_window;
    b.detector_x = center;
    b.halfwidth = halfwidth;
    return b;
}

OutcomeBinning OutcomeBinning::two_level() {
    OutcomeBinning b;
    b.mode = BinningMode::two_level;
    return b;
}

void OutcomeBinning::validate(const GridSpec& grid) const {
    const double span = grid.length();
    switch (mode) {
        case BinningMode::position_bins: {
            require(bin_edges.size() >= 2, Errc::binning_mismatch, "need at least one bin");
            for (std::size_t i = 0; i + 1 < bin_edges.size(); ++i)
                require(bin_edges[i] < bin_edges[i + 1], Errc::binning_mismatch,
                        "bin edges must be strictly increasing");
            require(bin_edges.front() >= grid.x_min - kEdgeAlignTolerance * span &&
                        bin_edges.back() <= grid.x_max + kEdgeAlignTolerance * span,
                    Errc::binning_mismatch, "bin edges fall outside the grid");
            require(std::abs(bin_edges.front() - grid.x_min) <= kEdgeAlignTolerance * span &&
                        std::abs(bin_edges.back() - grid.x_max) <= kEdgeAlignTolerance * span,
                    Errc::binning_mismatch, "bins must partition the full grid extent");
            break;
        }
        case BinningMode::detector_window:
            require(halfwidth > 0.0, Errc::binning_mismatch, "window halfwidth must be positive");
            require(detector_x - halfwidth >= grid.x_min && detector_x + halfwidth <= grid.x_max,
                    Errc::binning_mismatch, "detector window falls outside the grid");
            break;
        case BinningMode::two_level:
            break;
    }
}

void ProbabilityVector::validate() const {
    double s = 0.0;
    for (double p : probs) {
        require(p >= 0.0, Errc::invalid_argument, "negative probability");
        s += p;
    }
    require(std::abs(s - 1.0) < kProbSumTolerance, Errc::invalid_argument,
            "probabilities do not sum to 1");
}

ProbabilityVector outcome_probabilities(const WaveFunction& psi, const OutcomeBinning& binning) {
    binning.validate(psi.grid);
    require(binning.mode != BinningMode::two_level, Errc::binning_mismatch,
            "two-level binning does not apply to a grid state");
    const double dx = psi.grid.dx();
    ProbabilityVector pv;
    pv.probs.assign(binning.n_outcomes(), 0.0);

    if (binning.mode == BinningMode::position_bins) {
        // Half-open cells [e_n, e_{n+1}); the final edge coincides with the
        // grid end so every point lands in a bin.
        std::size_t bin = 0;
        for (std::size_t k = 0; k < psi.grid.n_points; ++k) {
            const double x = psi.grid.x(k);
            while (bin + 2 < binning.bin_edges.size() && x >= binning.bin_edges[bin + 1]) ++bin;
            pv.probs[bin] += std::norm(psi.amplitudes[k]) * dx;
        }
    } else {
        const double lo = binning.detector_x - binning.halfwidth;
        const double hi = binning.detector_x + binning.halfwidth;
        for (std::size_t k = 0; k < psi.grid.n_points; ++k) {
            const double x = psi.grid.x(k);
            const double w = std::norm(psi.amplitudes[k]) * dx;
            if (x >= lo && x < hi)
                pv.probs[0] += w;
            else
                pv.probs[1] += w;
        }
    }

    // The state is normalised and the bins partition the grid, so the sum is
    // already 1 up to rounding; rescale to keep downstream cumulatives exact.
    double s = 0.0;
    for (double p : pv.probs) s += p;
    require(std::abs(s - 1.0) < kProbSumTolerance, Errc::invalid_argument,
            "binned probabilities do not sum to 1");
    for (double& p : pv.probs) p /= s;
    return pv;
}

namespace {

std::size_t pick_from_cumulative(const std::vector<double>& cum, double u) {
    const auto it = std::upper_bound(cum.begin(), cum.end(), u);
    if (it == cum.end()) return cum.size() - 1;
    return static_cast<std::size_t>(it - cum.begin());
}

std::vector<double> cumulative(const ProbabilityVector& pv) {
    std::vector<double> cum(pv.probs.size());
    double acc = 0.0;
    for (std::size_t n = 0; n < pv.probs.size(); ++n) {
        acc += pv.probs[n];
        cum[n] = acc;
    }
    cum.back() = 1.0;
    return cum;
}

}  // namespace

std::size_t sample_outcome(const ProbabilityVector& pv, const RandomSource& rng,
                           std::uint64_t event, std::uint32_t draw) {
    pv.validate();
    return pick_from_cumulative(cumulative(pv), rng.uniform(event, draw));
}

SystemEvolver::SystemEvolver(System system) : system_(std::move(system)) {
    if (const auto* g = std::get_if<FreeGaussianSystem>(&system_)) {
        grid_ = g->grid;
        consts_ = g->consts;
        WaveFunction psi = gaussian_to_wavefunction(g->packet, g->grid, g->consts);
        spectrum_ = std::move(psi.amplitudes);
        fft::forward(spectrum_);
    }
}

bool SystemEvolver::on_grid() const {
    return std::holds_alternative<FreeGaussianSystem>(system_);
}

const GridSpec& SystemEvolver::grid() const {
    require(on_grid(), Errc::invalid_argument, "two-level system has no grid");
    return grid_;
}

const PhysicalConstants& SystemEvolver::consts() const {
    require(on_grid(), Errc::invalid_argument, "two-level system has no constants grid");
    return consts_;
}

WaveFunction SystemEvolver::state_at(double t) const {
    require(on_grid(), Errc::invalid_argument, "two-level system has no grid state");
    WaveFunction psi;
    psi.grid = grid_;
    psi.time = t;
    psi.amplitudes.resize(grid_.n_points);
    // One exact spectral step from the cached t = 0 representation; the free
    // kinetic phase composes exactly for any t.
    for (std::size_t j = 0; j < grid_.n_points; ++j) {
        const double k = fft_wavenumber(grid_, j);
        psi.amplitudes[j] =
            spectrum_[j] * std::polar(1.0, -consts_.hbar * k * k * t / (2.0 * consts_.mass));
    }
    fft::inverse(psi.amplitudes);
    require(psi.edge_density() <= kEdgeDensityLimit, Errc::boundary_contamination,
            "wavepacket reached the grid boundary");
    return psi;
}

std::vector<double> SystemEvolver::density_at(double t) const {
    return probability_density(state_at(t));
}

ProbabilityVector SystemEvolver::probabilities(const OutcomeBinning& binning, double t) const {
    if (const auto* r = std::get_if<RabiSystem>(&system_)) {
        require(binning.mode == BinningMode::two_level, Errc::binning_mismatch,
                "driven two-level system requires two-level binning");
        const double p = rabi_excited_prob(r->spec, t);
        return ProbabilityVector{{p, 1.0 - p}};
    }
    return outcome_probabilities(state_at(t), binning);
}

std::uint64_t CountsMatrix::row_total(std::size_t n) const {
    std::uint64_t s = 0;
    for (std::uint64_t c : counts[n]) s += c;
    return s;
}

std::uint64_t CountsMatrix::column_total(std::size_t m) const {
    std::uint64_t s = 0;
    for (const auto& row : counts) s += row[m];
    return s;
}

void CountsMatrix::validate() const {
    require(!counts.empty() && !times.empty(), Errc::invalid_argument, "empty counts matrix");
    for (const auto& row : counts)
        require(row.size() == times.size(), Errc::invalid_argument, "ragged counts matrix");
    if (times.size() >= 2) {
        const double tau = times[1] - times[0];
        for (std::size_t m = 1; m < times.size(); ++m)
            require(std::abs(times[m] - times[m - 1] - tau) < 1e-9 * std::abs(tau),
                    Errc::invalid_argument, "probe times are not equally spaced");
    }
    for (std::size_t m = 0; m < times.size(); ++m)
        require(column_total(m) == shots_per_time, Errc::invalid_argument,
                "column total does not equal the shot count");
}

CountsMatrix& CountsMatrix::merge(const CountsMatrix& other) {
    require(counts.size() == other.counts.size() && times.size() == other.times.size(),
            Errc::invalid_argument, "cannot merge counts of different shape");
    for (std::size_t n = 0; n < counts.size(); ++n)
        for (std::size_t m = 0; m < times.size(); ++m) counts[n][m] += other.counts[n][m];
    shots_per_time += other.shots_per_time;
    return *this;
}

CountsMatrix build_counts_partition(const SystemEvolver& evolver, const OutcomeBinning& binning,
                                    double t0, double T, std::size_t M, std::uint64_t shot_begin,
                                    std::uint64_t shot_end, const SeedSpec& seed) {
    require(T > 0.0, Errc::invalid_window, "window duration must be positive");
    require(M >= 2, Errc::invalid_argument, "need at least two probe times");
    require(shot_end >= shot_begin, Errc::invalid_argument, "empty shot range");

    const double tau = T / static_cast<double>(M);
    CountsMatrix out;
    out.shots_per_time = shot_end - shot_begin;
    out.times.resize(M);
    out.counts.assign(binning.n_outcomes(), std::vector<std::uint64_t>(M, 0));

    for (std::size_t m = 0; m < M; ++m) {
        const double t = t0 + tau * static_cast<double>(m);
        out.times[m] = t;
        // Fresh copies at every probe time: the Born probabilities at t_m are
        // independent of any earlier column, so one vector serves all shots.
        const auto cum = cumulative(evolver.probabilities(binning, t));
        const RandomSource rng = seed.source(m);
        for (std::uint64_t j = shot_begin; j < shot_end; ++j) {
            const std::size_t n = pick_from_cumulative(cum, rng.uniform(j, 0));
            ++out.counts[n][m];
        }
    }
    return out;
}

CountsMatrix build_counts_matrix(const System& system, const OutcomeBinning& binning, double t0,
                                 double T, std::size_t M, std::uint64_t L, const SeedSpec& seed,
                                 unsigned workers) {
    require(L >= 1, Errc::invalid_argument, "need at least one shot per probe time");
    SystemEvolver evolver(system);
    if (evolver.on_grid()) binning.validate(evolver.grid());

    if (workers <= 1 || L < 2 * workers) {
        auto out = build_counts_partition(evolver, binning, t0, T, M, 0, L, seed);
        out.validate();
        return out;
    }

    std::vector<CountsMatrix> parts(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        const std::uint64_t lo = L * w / workers;
        const std::uint64_t hi = L * (w + 1) / workers;
        pool.emplace_back([&, w, lo, hi] {
            parts[w] = build_counts_partition(evolver, binning, t0, T, M, lo, hi, seed);
        });
    }
    for (auto& th : pool) th.join();

    CountsMatrix out = std::move(parts[0]);
    for (unsigned w = 1; w < workers; ++w) out.merge(parts[w]);
    out.validate();
    return out;
}

}  // namespace strobe

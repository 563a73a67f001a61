#include "strobe/continuous.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "strobe/fft.hpp"

namespace strobe {

namespace {
constexpr double kStepDoublingLimit = 1e-8;
constexpr double kTraceDriftLimit = 1e-7;
constexpr double kInsideTolerance = 1e-6;
}  // namespace

FuzzyOutcome fuzzy_measure(const WaveFunction& psi, double sigma, const RandomSource& rng,
                           std::uint64_t event) {
    require(sigma > 0.0, Errc::degenerate_sigma, "pointer variance must be positive");
    const double dx = psi.grid.dx();

    // Sample the readout from |psi|^2 convolved with the pointer profile:
    // a Born position sample plus Gaussian noise of variance sigma/2.
    double target = rng.uniform(event, 0);
    std::size_t k = psi.grid.n_points - 1;
    double acc = 0.0;
    for (std::size_t j = 0; j < psi.grid.n_points; ++j) {
        acc += std::norm(psi.amplitudes[j]) * dx;
        if (target < acc) {
            k = j;
            break;
        }
    }
    const double readout = psi.grid.x(k) + std::sqrt(sigma / 2.0) * rng.normal(event, 1);

    FuzzyOutcome out;
    out.readout = readout;
    out.posterior = psi;
    for (std::size_t j = 0; j < psi.grid.n_points; ++j) {
        const double d = psi.grid.x(j) - readout;
        out.posterior.amplitudes[j] *= std::exp(-d * d / (2.0 * sigma));
    }
    out.posterior.normalize();
    return out;
}

std::vector<bool> Region::mask(const GridSpec& grid) const {
    std::vector<bool> m(grid.n_points, false);
    for (std::size_t k = 0; k < grid.n_points; ++k) m[k] = contains(grid.x(k));
    return m;
}

bool Region::contains(double x) const {
    for (const auto& [lo, hi] : intervals)
        if (x >= lo && x < hi) return true;
    return false;
}

double region_probability(const WaveFunction& psi, const Region& region) {
    const double dx = psi.grid.dx();
    double p = 0.0;
    for (std::size_t k = 0; k < psi.grid.n_points; ++k)
        if (region.contains(psi.grid.x(k))) p += std::norm(psi.amplitudes[k]) * dx;
    return p;
}

namespace {

WaveFunction project_to(const WaveFunction& psi, const Region& region, bool inside) {
    WaveFunction out = psi;
    for (std::size_t k = 0; k < psi.grid.n_points; ++k)
        if (region.contains(psi.grid.x(k)) != inside) out.amplitudes[k] = 0.0;
    out.normalize();
    return out;
}

}  // namespace

ProjectionOutcome project_region(const WaveFunction& psi, const Region& region,
                                 const RandomSource& rng, std::uint64_t event) {
    const double p_in = region_probability(psi, region);
    const bool inside = rng.uniform(event, 0) < p_in;
    return {inside, project_to(psi, region, inside)};
}

double survival_probability_zeno(const FreeGaussianSystem& system, const Region& region, double T,
                                 std::size_t M) {
    require(T > 0.0, Errc::invalid_window, "duration must be positive");
    require(M >= 1, Errc::invalid_argument, "need at least one measurement");
    WaveFunction psi = gaussian_to_wavefunction(system.packet, system.grid, system.consts);
    require(region_probability(psi, region) > 1.0 - kInsideTolerance, Errc::invalid_argument,
            "packet does not start inside the region");

    const double tau = T / static_cast<double>(M);
    double survival = 1.0;
    for (std::size_t m = 0; m < M; ++m) {
        psi = propagate_split_step(psi, tau, 1, system.consts);
        const double p_in = region_probability(psi, region);
        survival *= p_in;
        if (survival == 0.0) return 0.0;
        psi = project_to(psi, region, true);
    }
    return survival;
}

Trajectory fuzzy_trajectory(const FreeGaussianSystem& system, const PointerSpec& pointer, double T,
                            const SeedSpec& seed, std::uint64_t traj_id) {
    pointer.validate();
    require(T > 0.0, Errc::invalid_window, "duration must be positive");
    const auto steps = static_cast<std::size_t>(std::llround(T / pointer.tau));
    require(steps >= 1, Errc::invalid_argument, "duration shorter than one measurement period");

    const RandomSource rng = seed.source(traj_id);
    WaveFunction psi = gaussian_to_wavefunction(system.packet, system.grid, system.consts);

    Trajectory traj;
    traj.id = traj_id;
    traj.times.reserve(steps);
    traj.readouts.reserve(steps);
    traj.cond_mean.reserve(steps);
    for (std::size_t m = 1; m <= steps; ++m) {
        psi = propagate_split_step(psi, pointer.tau, 1, system.consts);
        FuzzyOutcome out = fuzzy_measure(psi, pointer.sigma, rng, m);
        psi = std::move(out.posterior);
        traj.times.push_back(pointer.tau * static_cast<double>(m));
        traj.readouts.push_back(out.readout);
        traj.cond_mean.push_back(position_mean(psi));
    }
    return traj;
}

std::vector<Trajectory> fuzzy_ensemble(const FreeGaussianSystem& system,
                                       const PointerSpec& pointer, double T, std::uint64_t n_traj,
                                       const SeedSpec& seed, unsigned workers) {
    std::vector<Trajectory> ensemble(n_traj);
    const auto run_range = [&](std::uint64_t lo, std::uint64_t hi) {
        for (std::uint64_t id = lo; id < hi; ++id)
            ensemble[id] = fuzzy_trajectory(system, pointer, T, seed, id);
    };
    if (workers <= 1 || n_traj < 2 * workers) {
        run_range(0, n_traj);
        return ensemble;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back(run_range, n_traj * w / workers, n_traj * (w + 1) / workers);
    for (auto& th : pool) th.join();
    return ensemble;
}

std::vector<double> crossing_times(const Trajectory& traj, double x_detector) {
    std::vector<double> crossings;
    for (std::size_t i = 0; i + 1 < traj.times.size(); ++i) {
        const double a = traj.cond_mean[i] - x_detector;
        const double b = traj.cond_mean[i + 1] - x_detector;
        if (a == 0.0) {
            if (crossings.empty() || crossings.back() != traj.times[i])
                crossings.push_back(traj.times[i]);
        } else if (a * b < 0.0) {
            const double f = a / (a - b);
            crossings.push_back(traj.times[i] + f * (traj.times[i + 1] - traj.times[i]));
        }
    }
    if (!traj.cond_mean.empty() && traj.cond_mean.back() == x_detector &&
        (crossings.empty() || crossings.back() != traj.times.back()))
        crossings.push_back(traj.times.back());
    return crossings;
}

VarianceSeries readout_variance_series(const std::vector<Trajectory>& ensemble) {
    require(!ensemble.empty(), Errc::invalid_argument, "empty ensemble");
    const std::size_t steps = ensemble.front().times.size();
    for (const auto& traj : ensemble)
        require(traj.times.size() == steps, Errc::invalid_argument,
                "trajectories have mismatched lengths");

    VarianceSeries out;
    out.times = ensemble.front().times;
    out.variance.resize(steps);
    const double n = static_cast<double>(ensemble.size());
    for (std::size_t m = 0; m < steps; ++m) {
        double mean = 0.0;
        for (const auto& traj : ensemble) mean += traj.readouts[m];
        mean /= n;
        double ss = 0.0;
        for (const auto& traj : ensemble) {
            const double d = traj.readouts[m] - mean;
            ss += d * d;
        }
        out.variance[m] = ss / (n - 1.0);
    }
    return out;
}

void MomentState::validate(const PhysicalConstants& consts) const {
    require(var_x() >= -1e-9, Errc::invalid_argument, "negative position variance");
    require(var_p() >= -1e-9, Errc::invalid_argument, "negative momentum variance");
    const double bound = consts.hbar * consts.hbar / 4.0;
    require(var_x() * var_p() >= bound - 1e-9, Errc::invalid_argument,
            "uncertainty product below the Heisenberg bound");
}

MomentState MomentState::from_packet(const GaussianPacket& packet,
                                     const PhysicalConstants& consts) {
    MomentState s;
    s.mean_x = packet.x0;
    s.mean_p = packet.p0;
    s.x2 = packet.var_x0 + packet.x0 * packet.x0;
    s.p2 = packet_var_p0(packet, consts) + packet.p0 * packet.p0;
    s.xp_sym = 2.0 * (packet.cov0 + packet.x0 * packet.p0);
    return s;
}

namespace {

struct MomentVec {
    double v[5];
};

MomentVec to_vec(const MomentState& s) { return {{s.mean_x, s.mean_p, s.x2, s.p2, s.xp_sym}}; }

MomentState to_state(const MomentVec& v) {
    MomentState s;
    s.mean_x = v.v[0];
    s.mean_p = v.v[1];
    s.x2 = v.v[2];
    s.p2 = v.v[3];
    s.xp_sym = v.v[4];
    return s;
}

MomentVec rhs(const MomentVec& y, double kappa, const PhysicalConstants& c) {
    const double diffusion = std::isinf(kappa) ? 0.0 : c.hbar * c.hbar / (2.0 * kappa);
    return {{y.v[1] / c.mass, 0.0, y.v[4] / c.mass, diffusion, 2.0 * y.v[3] / c.mass}};
}

MomentVec rk4_step(const MomentVec& y, double h, double kappa, const PhysicalConstants& c) {
    const auto add = [](const MomentVec& a, const MomentVec& b, double s) {
        MomentVec r;
        for (int i = 0; i < 5; ++i) r.v[i] = a.v[i] + s * b.v[i];
        return r;
    };
    const MomentVec k1 = rhs(y, kappa, c);
    const MomentVec k2 = rhs(add(y, k1, h / 2.0), kappa, c);
    const MomentVec k3 = rhs(add(y, k2, h / 2.0), kappa, c);
    const MomentVec k4 = rhs(add(y, k3, h), kappa, c);
    MomentVec out;
    for (int i = 0; i < 5; ++i)
        out.v[i] = y.v[i] + h / 6.0 * (k1.v[i] + 2.0 * k2.v[i] + 2.0 * k3.v[i] + k4.v[i]);
    return out;
}

}  // namespace

std::vector<MomentSample> moment_ode_evolve(const MomentState& init, double kappa, double T,
                                            double dt, const PhysicalConstants& consts) {
    require(T > 0.0 && dt > 0.0, Errc::invalid_argument, "duration and step must be positive");
    require(kappa > 0.0, Errc::invalid_argument, "kappa must be positive (may be infinite)");
    init.validate(consts);

    const auto steps = static_cast<std::size_t>(std::ceil(T / dt - 1e-12));
    const double h = T / static_cast<double>(steps);

    std::vector<MomentSample> series;
    series.reserve(steps + 1);
    MomentVec y = to_vec(init);
    series.push_back({0.0, init});
    for (std::size_t s = 0; s < steps; ++s) {
        const MomentVec full = rk4_step(y, h, kappa, consts);
        const MomentVec half = rk4_step(rk4_step(y, h / 2.0, kappa, consts), h / 2.0, kappa, consts);
        double err = 0.0;
        for (int i = 0; i < 5; ++i)
            err = std::max(err, std::abs(full.v[i] - half.v[i]) /
                                    std::max(1.0, std::abs(half.v[i])));
        require(err <= kStepDoublingLimit, Errc::step_too_large,
                "step-doubling error estimate exceeds the limit");
        y = full;
        const MomentState state = to_state(y);
        state.validate(consts);
        series.push_back({h * static_cast<double>(s + 1), state});
    }
    return series;
}

double variance_closed_form_x(const MomentState& init, double kappa, double t,
                              const PhysicalConstants& consts) {
    const double m = consts.mass;
    const double c0 = (init.xp_sym - 2.0 * init.mean_x * init.mean_p) / m;
    const double var_p0 = init.var_p();
    const double cubic =
        std::isinf(kappa) ? 0.0
                          : consts.hbar * consts.hbar * t * t * t / (6.0 * kappa * m * m);
    return init.var_x() + c0 * t + var_p0 * t * t / (m * m) + cubic;
}

double variance_closed_form_p(const MomentState& init, double kappa, double t,
                              const PhysicalConstants& consts) {
    const double growth = std::isinf(kappa) ? 0.0 : consts.hbar * consts.hbar * t / (2.0 * kappa);
    return init.var_p() + growth;
}

DensityMatrix DensityMatrix::from_wavefunction(const WaveFunction& psi) {
    const auto n = static_cast<Eigen::Index>(psi.grid.n_points);
    DensityMatrix dm;
    dm.grid = psi.grid;
    dm.rho.resize(n, n);
    const double dx = psi.grid.dx();
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index k = 0; k < n; ++k)
            dm.rho(j, k) = psi.amplitudes[static_cast<std::size_t>(j)] *
                           std::conj(psi.amplitudes[static_cast<std::size_t>(k)]) * dx;
    return dm;
}

double DensityMatrix::trace_error() const { return std::abs(rho.trace().real() - 1.0) +
                                                   std::abs(rho.trace().imag()); }

double DensityMatrix::hermiticity_error() const {
    return (rho - rho.adjoint()).cwiseAbs().maxCoeff();
}

double DensityMatrix::purity() const { return (rho * rho).trace().real(); }

double DensityMatrix::min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(0.5 * (rho + rho.adjoint()));
    return solver.eigenvalues().minCoeff();
}

namespace {

// H0 rho computed column-wise through the spectral kinetic operator.
void apply_kinetic(const GridSpec& grid, const PhysicalConstants& consts,
                   const Eigen::MatrixXcd& in, Eigen::MatrixXcd& out) {
    const auto n = static_cast<std::size_t>(in.rows());
    std::vector<double> energy(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double k = fft_wavenumber(grid, j);
        energy[j] = consts.hbar * consts.hbar * k * k / (2.0 * consts.mass);
    }
    std::vector<std::complex<double>> col(n);
    for (Eigen::Index c = 0; c < in.cols(); ++c) {
        for (std::size_t j = 0; j < n; ++j) col[j] = in(static_cast<Eigen::Index>(j), c);
        fft::forward(col);
        for (std::size_t j = 0; j < n; ++j) col[j] *= energy[j];
        fft::inverse(col);
        for (std::size_t j = 0; j < n; ++j) out(static_cast<Eigen::Index>(j), c) = col[j];
    }
}

Eigen::MatrixXcd lindblad_rhs(const GridSpec& grid, const PhysicalConstants& consts,
                              const Eigen::MatrixXcd& rho, const Eigen::MatrixXcd& damp,
                              Eigen::MatrixXcd& scratch) {
    apply_kinetic(grid, consts, rho, scratch);
    Eigen::MatrixXcd out =
        (scratch - scratch.adjoint()) * std::complex<double>(0.0, -1.0 / consts.hbar);
    out -= damp.cwiseProduct(rho);
    return out;
}

}  // namespace

DensityMatrix lindblad_dense_evolve(const DensityMatrix& rho0, double kappa, double dt,
                                    std::size_t steps, const PhysicalConstants& consts) {
    require(rho0.grid.n_points <= 256, Errc::invalid_argument,
            "dense evolution is limited to grids of at most 256 points");
    require(dt > 0.0, Errc::invalid_argument, "step must be positive");
    require(kappa > 0.0, Errc::invalid_argument, "kappa must be positive (may be infinite)");
    const auto n = static_cast<Eigen::Index>(rho0.grid.n_points);
    require(rho0.rho.rows() == n && rho0.rho.cols() == n, Errc::invalid_argument,
            "density matrix does not match the grid");

    // (x_j - x_k)^2 / (4 kappa), the position-basis action of the double
    // commutator dissipator.
    Eigen::MatrixXcd damp = Eigen::MatrixXcd::Zero(n, n);
    if (!std::isinf(kappa))
        for (Eigen::Index j = 0; j < n; ++j)
            for (Eigen::Index k = 0; k < n; ++k) {
                const double d = rho0.grid.x(static_cast<std::size_t>(j)) -
                                 rho0.grid.x(static_cast<std::size_t>(k));
                damp(j, k) = d * d / (4.0 * kappa);
            }

    DensityMatrix dm = rho0;
    Eigen::MatrixXcd scratch(n, n);
    for (std::size_t s = 0; s < steps; ++s) {
        const Eigen::MatrixXcd k1 = lindblad_rhs(dm.grid, consts, dm.rho, damp, scratch);
        const Eigen::MatrixXcd k2 =
            lindblad_rhs(dm.grid, consts, dm.rho + 0.5 * dt * k1, damp, scratch);
        const Eigen::MatrixXcd k3 =
            lindblad_rhs(dm.grid, consts, dm.rho + 0.5 * dt * k2, damp, scratch);
        const Eigen::MatrixXcd k4 = lindblad_rhs(dm.grid, consts, dm.rho + dt * k3, damp, scratch);
        dm.rho += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        require(dm.trace_error() <= kTraceDriftLimit, Errc::trace_drift,
                "trace drifted during dense evolution");
    }
    return dm;
}

MomentState density_matrix_moments(const DensityMatrix& dm, const PhysicalConstants& consts) {
    const auto n = static_cast<Eigen::Index>(dm.grid.n_points);
    MomentState s;

    double m_x = 0.0, m_x2 = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
        const double x = dm.grid.x(static_cast<std::size_t>(j));
        const double w = dm.rho(j, j).real();
        m_x += w * x;
        m_x2 += w * x * x;
    }
    s.mean_x = m_x;
    s.x2 = m_x2;

    // Momentum moments and the cross term through spectral column operations:
    // tr(P rho), tr(P^2 rho), tr(X P rho) + tr(P X rho).
    std::vector<std::complex<double>> col(static_cast<std::size_t>(n));
    std::complex<double> tr_p = 0.0, tr_p2 = 0.0, tr_xp = 0.0, tr_px = 0.0;
    for (Eigen::Index c = 0; c < n; ++c) {
        const double x_c = dm.grid.x(static_cast<std::size_t>(c));
        for (Eigen::Index j = 0; j < n; ++j) col[static_cast<std::size_t>(j)] = dm.rho(j, c);
        fft::forward(col);
        auto col2 = col;
        for (Eigen::Index j = 0; j < n; ++j) {
            const double p = consts.hbar * fft_wavenumber(dm.grid, static_cast<std::size_t>(j));
            col[static_cast<std::size_t>(j)] *= p;
            col2[static_cast<std::size_t>(j)] *= p * p;
        }
        fft::inverse(col);
        fft::inverse(col2);
        // (P rho)_{cc} and (P^2 rho)_{cc}
        tr_p += col[static_cast<std::size_t>(c)];
        tr_p2 += col2[static_cast<std::size_t>(c)];
        // tr(X P rho) picks x_c at the diagonal of (P rho)
        tr_xp += x_c * col[static_cast<std::size_t>(c)];
    }
    // tr(P X rho): X scales rows of rho before P acts column-wise; equivalently
    // conj-transpose symmetry gives tr(P X rho) = conj(tr(X P rho)) for
    // Hermitian rho, since (P X rho)^dagger = rho X P.
    tr_px = std::conj(tr_xp);

    s.mean_p = tr_p.real();
    s.p2 = tr_p2.real();
    s.xp_sym = (tr_xp + tr_px).real();
    return s;
}

}  // namespace strobe

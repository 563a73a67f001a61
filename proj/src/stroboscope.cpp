#include "strobe/stroboscope.hpp"

#include <cmath>

namespace strobe {

const char* dist_kind_name(DistKind k) {
    switch (k) {
        case DistKind::stroboscopic: return "stroboscopic";
        case DistKind::flow: return "flow";
        case DistKind::clock_reference: return "clock_reference";
        case DistKind::click: return "click";
        case DistKind::crossing: return "crossing";
    }
    return "unknown";
}

void TimeDistribution::validate() const {
    if (status != DistStatus::defined) {
        require(probs.empty(), Errc::invalid_argument, "undefined row must carry no probabilities");
        return;
    }
    require(probs.size() == times.size(), Errc::invalid_argument,
            "times and probabilities differ in length");
    double s = 0.0;
    for (double p : probs) {
        require(p >= 0.0, Errc::invalid_argument, "negative probability");
        s += p;
    }
    require(std::abs(s - 1.0) < 1e-9, Errc::invalid_argument, "probabilities do not sum to 1");
}

std::vector<TimeDistribution> row_normalize(const CountsMatrix& counts) {
    counts.validate();
    std::vector<TimeDistribution> rows;
    rows.reserve(counts.n_outcomes());
    for (std::size_t n = 0; n < counts.n_outcomes(); ++n) {
        TimeDistribution d;
        d.kind = DistKind::stroboscopic;
        d.outcome = static_cast<int>(n);
        d.times = counts.times;
        const std::uint64_t total = counts.row_total(n);
        if (total == 0) {
            d.status = DistStatus::undefined;
            d.times = counts.times;
        } else {
            d.probs.resize(counts.n_times());
            for (std::size_t m = 0; m < counts.n_times(); ++m)
                d.probs[m] = static_cast<double>(counts.counts[n][m]) / static_cast<double>(total);
        }
        rows.push_back(std::move(d));
    }
    return rows;
}

TimeDistribution flow_estimate(const CountsMatrix& counts, const OutcomeBinning& binning,
                               double x_threshold) {
    counts.validate();
    require(binning.mode == BinningMode::position_bins, Errc::binning_mismatch,
            "flow estimation requires position bins");
    require(binning.n_outcomes() == counts.n_outcomes(), Errc::binning_mismatch,
            "binning does not match the counts matrix");
    const std::size_t M = counts.n_times();
    require(M >= 2, Errc::invalid_argument, "need at least two probe times");

    // Cumulative count below the threshold per probe time.
    std::vector<double> below(M, 0.0);
    for (std::size_t n = 0; n < counts.n_outcomes(); ++n) {
        if (binning.outcome_position(n) >= x_threshold) continue;
        for (std::size_t m = 0; m < M; ++m) below[m] += static_cast<double>(counts.counts[n][m]);
    }

    TimeDistribution d;
    d.kind = DistKind::flow;
    d.threshold = x_threshold;
    d.times.resize(M - 1);
    d.probs.resize(M - 1);
    double total = 0.0;
    for (std::size_t m = 1; m < M; ++m) {
        d.times[m - 1] = counts.times[m];
        d.probs[m - 1] = std::abs(below[m] - below[m - 1]);
        total += d.probs[m - 1];
    }
    require(total > 0.0, Errc::all_zero_flow, "no crossings detected at the threshold");
    for (double& p : d.probs) p /= total;
    return d;
}

RefineResult refine_window(const WindowSpec& initial, const System& system,
                           const OutcomeBinning& binning, std::size_t target_outcome,
                           const SeedSpec& seed, std::uint64_t probe_L, double floor) {
    initial.validate();
    require(probe_L >= 1, Errc::invalid_argument, "probe shot count must be positive");
    if (floor < 0.0) floor = 1.0 / static_cast<double>(probe_L);

    const CountsMatrix probe =
        build_counts_matrix(system, binning, initial.t0, initial.T, initial.M, probe_L, seed);
    require(target_outcome < probe.n_outcomes(), Errc::invalid_argument,
            "target outcome out of range");

    const std::size_t M = initial.M;
    std::size_t first = M, last = 0;
    for (std::size_t m = 0; m < M; ++m) {
        const double freq = static_cast<double>(probe.counts[target_outcome][m]) /
                            static_cast<double>(probe_L);
        if (freq >= floor - 1e-12) {
            first = std::min(first, m);
            last = std::max(last, m);
        }
    }

    if (first > last) return {initial, true};

    // Contiguous cover of all qualifying columns, padded by one tau per side.
    const std::size_t lo = first > 0 ? first - 1 : 0;
    const std::size_t hi = last + 1 < M ? last + 1 : M - 1;
    const double tau = initial.tau();
    WindowSpec refined;
    refined.t0 = initial.t0 + tau * static_cast<double>(lo);
    refined.T = tau * static_cast<double>(hi - lo + 1);
    refined.M = M;
    return {refined, false};
}

}  // namespace strobe

#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "strobe/sampler.hpp"

namespace strobe {

struct WindowSpec {
    double t0 = 0.0;
    double T = 1.0;
    std::size_t M = 32;

    double tau() const { return T / static_cast<double>(M); }
    void validate() const {
        require(T > 0.0, Errc::invalid_window, "window duration must be positive");
        require(M >= 2, Errc::invalid_argument, "need at least two probe times");
    }
};

enum class DistKind { stroboscopic, flow, clock_reference, click, crossing };

// A row can be empirically undefined: if an outcome was never observed the
// normalisation in p(t|a_n) has a zero denominator and no distribution
// exists. That is a reportable result, not a failure.
enum class DistStatus { defined, undefined, warning };

const char* dist_kind_name(DistKind k);

struct TimeDistribution {
    DistKind kind = DistKind::stroboscopic;
    DistStatus status = DistStatus::defined;
    int outcome = -1;  // outcome index, or -1 when the row is threshold-labelled
    double threshold = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> times;
    std::vector<double> probs;

    void validate() const;
};

// Row normalisation of the counts matrix: p(t_m | a_n) = l_nm / sum_m l_nm.
// Rows with zero total come back with status undefined.
std::vector<TimeDistribution> row_normalize(const CountsMatrix& counts);

// Discrete arrival-flow estimator at a position threshold. With the
// cumulative count C_m of all outcomes whose bin centre lies below x, the
// unnormalised weight at t_m is |C_m - C_{m-1}| for m = 1..M-1; the m = 0
// difference does not exist and no phantom column is invented.
TimeDistribution flow_estimate(const CountsMatrix& counts, const OutcomeBinning& binning,
                               double x_threshold);

struct RefineResult {
    WindowSpec window;
    bool no_signal = false;  // coarse pass saw nothing; window returned unchanged
};

// Coarse low-shot pass that shrinks the probe window to the contiguous column
// range where the target outcome shows signal, padded by one tau on each
// side. The empirical-frequency floor defaults to one hit out of probe_L.
RefineResult refine_window(const WindowSpec& initial, const System& system,
                           const OutcomeBinning& binning, std::size_t target_outcome,
                           const SeedSpec& seed, std::uint64_t probe_L = 32,
                           double floor = -1.0);

}  // namespace strobe

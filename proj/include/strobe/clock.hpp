#pragma once

#include <functional>
#include <vector>

#include "strobe/stroboscope.hpp"

namespace strobe {

// Exact arrival-time reference: the occupation <psi(t)|P_n|psi(t)> normalised
// by its integral over the window. Density values carry units of 1/time.
struct ClockDistribution {
    WindowSpec window;
    int outcome = 0;
    std::vector<double> times;    // quadrature nodes, window endpoints included
    std::vector<double> density;  // integrates to 1 over the window
    std::function<double(double)> occupation;  // unnormalised occupation, exact at any t
    double normalization = 0.0;                // integral of the occupation
};

// Composite Simpson quadrature of the occupation over the window; quad_nodes
// must be odd. Raises ZeroDenominator when the occupation integral is below
// 1e-15.
ClockDistribution clock_distribution(const System& system, const OutcomeBinning& binning,
                                     const WindowSpec& window, std::size_t outcome,
                                     std::size_t quad_nodes = 1025);

// Restriction of the clock to the stroboscopic probe times: probs[m]
// proportional to the clock density at t_m = t0 + m tau, m = 0..M-1.
TimeDistribution discretize_clock(const ClockDistribution& clock, std::size_t M);

// Spatial probability densities rho_t sampled on a common grid at strictly
// increasing times covering the analysis window.
struct DensitySeries {
    GridSpec grid;
    std::vector<double> times;
    std::vector<std::vector<double>> densities;

    void validate() const;
};

DensitySeries make_density_series(const System& system, const std::vector<double>& times);

// Continuum probability flow at a threshold: the cumulative mass below x is
// differentiated by central differences (one-sided at the endpoints), the
// magnitude normalised over the sample times.
TimeDistribution flow_distribution(const DensitySeries& series, double x_threshold,
                                   const WindowSpec& window);

// Aggregates a densely sampled flow into the stroboscopic difference cells
// (t_{m-1}, t_m], m = 1..M-1, to make it comparable with flow_estimate.
TimeDistribution discretize_flow(const TimeDistribution& dense, const WindowSpec& window);

}  // namespace strobe

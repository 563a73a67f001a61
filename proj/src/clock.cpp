#include "strobe/clock.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace strobe {

namespace {
constexpr double kZeroIntegral = 1e-15;
}

ClockDistribution clock_distribution(const System& system, const OutcomeBinning& binning,
                                     const WindowSpec& window, std::size_t outcome,
                                     std::size_t quad_nodes) {
    window.validate();
    require(quad_nodes >= 3 && quad_nodes % 2 == 1, Errc::invalid_argument,
            "Simpson quadrature needs an odd node count of at least 3");

    auto evolver = std::make_shared<SystemEvolver>(system);
    if (evolver->on_grid()) binning.validate(evolver->grid());
    require(outcome < binning.n_outcomes(), Errc::invalid_argument, "outcome out of range");
    auto occupation = [evolver, binning, outcome](double t) {
        return evolver->probabilities(binning, t).probs[outcome];
    };

    ClockDistribution out;
    out.window = window;
    out.outcome = static_cast<int>(outcome);
    out.times.resize(quad_nodes);
    out.density.resize(quad_nodes);
    const double h = window.T / static_cast<double>(quad_nodes - 1);

    double integral = 0.0;
    for (std::size_t j = 0; j < quad_nodes; ++j) {
        out.times[j] = window.t0 + h * static_cast<double>(j);
        out.density[j] = occupation(out.times[j]);
        const double w = (j == 0 || j + 1 == quad_nodes) ? 1.0 : (j % 2 == 1 ? 4.0 : 2.0);
        integral += w * out.density[j];
    }
    integral *= h / 3.0;
    require(integral >= kZeroIntegral, Errc::zero_denominator,
            "occupation integrates to zero over the window");

    for (double& d : out.density) d /= integral;
    out.occupation = occupation;
    out.normalization = integral;
    return out;
}

TimeDistribution discretize_clock(const ClockDistribution& clock, std::size_t M) {
    require(M >= 2, Errc::invalid_argument, "need at least two probe times");
    require(static_cast<bool>(clock.occupation), Errc::invalid_argument,
            "clock carries no occupation function");

    TimeDistribution d;
    d.kind = DistKind::clock_reference;
    d.outcome = clock.outcome;
    d.times.resize(M);
    d.probs.resize(M);
    const double tau = clock.window.T / static_cast<double>(M);
    double total = 0.0;
    for (std::size_t m = 0; m < M; ++m) {
        d.times[m] = clock.window.t0 + tau * static_cast<double>(m);
        d.probs[m] = clock.occupation(d.times[m]);
        total += d.probs[m];
    }
    require(total >= kZeroIntegral, Errc::zero_denominator,
            "occupation vanishes at every probe time");
    for (double& p : d.probs) p /= total;
    return d;
}

void DensitySeries::validate() const {
    grid.validate();
    require(times.size() == densities.size(), Errc::invalid_argument,
            "times and densities differ in length");
    require(times.size() >= 3, Errc::invalid_argument, "need at least three density samples");
    for (std::size_t j = 1; j < times.size(); ++j)
        require(times[j] > times[j - 1], Errc::invalid_argument,
                "density sample times must be strictly increasing");
    for (const auto& rho : densities)
        require(rho.size() == grid.n_points, Errc::invalid_argument,
                "density sample does not match the grid");
}

DensitySeries make_density_series(const System& system, const std::vector<double>& times) {
    SystemEvolver evolver(system);
    DensitySeries out;
    out.grid = evolver.grid();
    out.times = times;
    out.densities.reserve(times.size());
    for (double t : times) out.densities.push_back(evolver.density_at(t));
    out.validate();
    return out;
}

TimeDistribution flow_distribution(const DensitySeries& series, double x_threshold,
                                   const WindowSpec& window) {
    series.validate();
    window.validate();
    require(series.times.front() >= window.t0 - 1e-12 &&
                series.times.back() <= window.t0 + window.T + 1e-12,
            Errc::invalid_window, "density series leaves the analysis window");

    const std::size_t K = series.times.size();
    const double dx = series.grid.dx();
    std::vector<double> below(K, 0.0);
    for (std::size_t j = 0; j < K; ++j) {
        double f = 0.0;
        for (std::size_t k = 0; k < series.grid.n_points; ++k) {
            if (series.grid.x(k) < x_threshold) f += series.densities[j][k];
        }
        below[j] = f * dx;
    }

    TimeDistribution d;
    d.kind = DistKind::flow;
    d.threshold = x_threshold;
    d.times = series.times;
    d.probs.resize(K);
    double total = 0.0;
    for (std::size_t j = 0; j < K; ++j) {
        double dF;
        if (j == 0)
            dF = (below[1] - below[0]) / (series.times[1] - series.times[0]);
        else if (j + 1 == K)
            dF = (below[K - 1] - below[K - 2]) / (series.times[K - 1] - series.times[K - 2]);
        else
            dF = (below[j + 1] - below[j - 1]) / (series.times[j + 1] - series.times[j - 1]);
        d.probs[j] = std::abs(dF);
        total += d.probs[j];
    }
    require(total > 0.0, Errc::all_zero_flow, "no probability flow at the threshold");
    for (double& p : d.probs) p /= total;
    return d;
}

TimeDistribution discretize_flow(const TimeDistribution& dense, const WindowSpec& window) {
    dense.validate();
    window.validate();
    require(dense.status == DistStatus::defined, Errc::invalid_argument,
            "cannot discretize an undefined distribution");
    const std::size_t M = window.M;
    const double tau = window.tau();

    TimeDistribution d;
    d.kind = DistKind::flow;
    d.threshold = dense.threshold;
    d.times.resize(M - 1);
    d.probs.assign(M - 1, 0.0);
    for (std::size_t m = 1; m < M; ++m) d.times[m - 1] = window.t0 + tau * static_cast<double>(m);

    double total = 0.0;
    for (std::size_t j = 0; j < dense.times.size(); ++j) {
        const double cell = std::ceil((dense.times[j] - window.t0) / tau - 1e-12);
        const auto m = static_cast<std::size_t>(std::clamp(cell, 1.0, static_cast<double>(M - 1)));
        d.probs[m - 1] += dense.probs[j];
        total += dense.probs[j];
    }
    require(total > 0.0, Errc::all_zero_flow, "dense flow carries no mass");
    for (double& p : d.probs) p /= total;
    return d;
}

}  // namespace strobe

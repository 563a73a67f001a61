#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "strobe/continuous.hpp"
#include "strobe/rng.hpp"
#include "strobe/sampler.hpp"
#include "strobe/stroboscope.hpp"

namespace strobe {

// Detector occupancy beta(t) in [0, 1]; the click rate is beta(t) / (2 kappa).
class OccupancyProfile {
public:
    enum class Kind { rectangular, from_wavefunction, tabulated };

    // beta = 1 on [t_start, t_start + duration), 0 elsewhere.
    static OccupancyProfile rectangular(double t_start, double duration);

    // beta(t) = probability of finding the evolved state inside the detector
    // region (excited-level population for the two-level system, where the
    // region is ignored).
    static OccupancyProfile from_wavefunction(const System& system, const Region& region);

    // Piecewise-linear table; beta = 0 outside the tabulated range.
    static OccupancyProfile tabulated(std::vector<double> times, std::vector<double> values);

    Kind kind() const { return kind_; }
    double operator()(double t) const { return beta_(t); }

private:
    OccupancyProfile(Kind kind, std::function<double(double)> beta);

    Kind kind_;
    std::function<double(double)> beta_;
};

// One detector run: ordered click times within the observation window.
struct ClickStream {
    std::vector<double> clicks;
    WindowSpec window;
    double kappa = 1.0;
    std::uint64_t run_id = 0;

    void validate() const;
};

// Inhomogeneous Poisson click record at rate beta(t) / (2 kappa), sampled by
// thinning candidate arrivals generated at the ceiling rate 1 / (2 kappa).
ClickStream click_stream(const OccupancyProfile& profile, double kappa, const WindowSpec& window,
                         const SeedSpec& seed, std::uint64_t run_id = 0);

// Independent runs run_id = 0 .. n_runs - 1; identical output for any worker
// count.
std::vector<ClickStream> click_ensemble(const OccupancyProfile& profile, double kappa,
                                        const WindowSpec& window, std::size_t n_runs,
                                        const SeedSpec& seed, std::size_t workers = 1);

// Pools every click into M equal bins over the shared window and normalizes.
// Bins are labeled by their left edge t_m = t0 + m T / M.
TimeDistribution click_histogram(const std::vector<ClickStream>& streams, std::size_t M);

}  // namespace strobe

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "strobe/sampler.hpp"

namespace strobe {

// Repeated Gaussian pointer measurement of position: resolution variance
// sigma per shot, one shot every tau. The back-action strength is
// kappa = sigma * tau; the tau -> 0 limit at fixed kappa gives the
// position-coupling master equation with coefficient 1/(4 kappa).
//
// Realisation detail: the Kraus factor applied to the conditional state is
// exp(-(x - r)^2 / (2 sigma)), which puts readout noise of variance sigma/2
// on top of the Born position sample. This is the width for which repeated
// measurement reproduces momentum diffusion hbar^2/(2 kappa) exactly.
struct PointerSpec {
    double sigma = 1.0;
    double tau = 0.1;

    double kappa() const { return sigma * tau; }
    void validate() const {
        require(sigma > 0.0, Errc::degenerate_sigma, "pointer variance must be positive");
        require(tau > 0.0, Errc::invalid_argument, "measurement period must be positive");
    }
};

struct FuzzyOutcome {
    double readout = 0.0;
    WaveFunction posterior;
};

// Single fuzzy position measurement. Consumes draws (event, 0..2) of rng.
FuzzyOutcome fuzzy_measure(const WaveFunction& psi, double sigma, const RandomSource& rng,
                           std::uint64_t event);

// Union of half-open position intervals [lo, hi) resolved onto grid bins.
struct Region {
    std::vector<std::pair<double, double>> intervals;

    static Region interval(double lo, double hi) { return Region{{{lo, hi}}}; }
    std::vector<bool> mask(const GridSpec& grid) const;
    bool contains(double x) const;
};

struct ProjectionOutcome {
    bool inside = false;
    WaveFunction posterior;
};

double region_probability(const WaveFunction& psi, const Region& region);

// Projective region measurement with Born-rule outcome and renormalised
// posterior. Consumes draw (event, 0).
ProjectionOutcome project_region(const WaveFunction& psi, const Region& region,
                                 const RandomSource& rng, std::uint64_t event);

// Survival probability under M projective is-it-still-inside checks at
// spacing T/M, computed exactly by alternating propagation and renormalised
// projection. The packet must start essentially fully inside the region.
double survival_probability_zeno(const FreeGaussianSystem& system, const Region& region, double T,
                                 std::size_t M);

struct Trajectory {
    std::uint64_t id = 0;
    std::vector<double> times;      // measurement times m*tau, m = 1..M
    std::vector<double> readouts;   // pointer samples
    std::vector<double> cond_mean;  // posterior <x> after each measurement
};

// One conditional trajectory: alternate free propagation over tau and a fuzzy
// measurement, for round(T/tau) steps.
Trajectory fuzzy_trajectory(const FreeGaussianSystem& system, const PointerSpec& pointer, double T,
                            const SeedSpec& seed, std::uint64_t traj_id);

std::vector<Trajectory> fuzzy_ensemble(const FreeGaussianSystem& system,
                                       const PointerSpec& pointer, double T, std::uint64_t n_traj,
                                       const SeedSpec& seed, unsigned workers = 1);

// Times at which the conditional mean crosses x_detector, by linear
// interpolation between consecutive samples. Empty when there is no crossing.
std::vector<double> crossing_times(const Trajectory& traj, double x_detector);

// Ensemble variance of the readouts at each measurement time.
struct VarianceSeries {
    std::vector<double> times;
    std::vector<double> variance;
};
VarianceSeries readout_variance_series(const std::vector<Trajectory>& ensemble);

// Second-moment state of the position-coupled master equation. xp_sym is the
// full anticommutator expectation <{x,p}>.
struct MomentState {
    double mean_x = 0.0;
    double mean_p = 0.0;
    double x2 = 1.0;
    double p2 = 0.25;
    double xp_sym = 0.0;

    double var_x() const { return x2 - mean_x * mean_x; }
    double var_p() const { return p2 - mean_p * mean_p; }
    double sym_cov() const { return 0.5 * (xp_sym - 2.0 * mean_x * mean_p); }
    void validate(const PhysicalConstants& consts) const;

    static MomentState from_packet(const GaussianPacket& packet, const PhysicalConstants& consts);
};

struct MomentSample {
    double t = 0.0;
    MomentState state;
};

// Closed Ehrenfest system of the master equation:
//   d<x> = <p>/m, d<p> = 0, d<x^2> = <{x,p}>/m,
//   d<p^2> = hbar^2/(2 kappa), d<{x,p}> = 2 <p^2>/m.
// Fixed-step RK4 with a step-doubling self-check (StepTooLarge above 1e-8).
// kappa may be infinite, which drops the diffusion source.
std::vector<MomentSample> moment_ode_evolve(const MomentState& init, double kappa, double T,
                                            double dt, const PhysicalConstants& consts);

// Closed-form variances of the same system.
double variance_closed_form_x(const MomentState& init, double kappa, double t,
                              const PhysicalConstants& consts);
double variance_closed_form_p(const MomentState& init, double kappa, double t,
                              const PhysicalConstants& consts);

// Dense grid density matrix, trace convention tr(rho) = sum_j rho_jj = 1
// (entries absorb the grid measure dx).
struct DensityMatrix {
    GridSpec grid;
    Eigen::MatrixXcd rho;

    static DensityMatrix from_wavefunction(const WaveFunction& psi);
    double trace_error() const;      // |tr - 1|
    double hermiticity_error() const;
    double purity() const;           // tr(rho^2)
    double min_eigenvalue() const;   // intended for small n only
};

// Brute-force integration of
//   d rho/dt = -(i/hbar) [H0, rho] - 1/(4 kappa) [x, [x, rho]]
// with the periodic spectral kinetic H0, fixed-step RK4, dense storage
// (n <= 256). Trace drift beyond 1e-7 raises TraceDrift.
DensityMatrix lindblad_dense_evolve(const DensityMatrix& rho0, double kappa, double dt,
                                    std::size_t steps, const PhysicalConstants& consts);

MomentState density_matrix_moments(const DensityMatrix& dm, const PhysicalConstants& consts);

}  // namespace strobe

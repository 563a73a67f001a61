#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "strobe/errors.hpp"

namespace strobe {

struct PhysicalConstants {
    double hbar = 1.0;
    double mass = 1.0;
};

// Uniform spatial grid with periodic boundaries. Sizes are restricted to
// powers of two so the spectral transforms stay cheap.
struct GridSpec {
    std::size_t n_points = 512;
    double x_min = -20.0;
    double x_max = 20.0;

    double length() const { return x_max - x_min; }
    double dx() const { return length() / static_cast<double>(n_points); }
    double x(std::size_t k) const { return x_min + dx() * static_cast<double>(k); }

    void validate() const {
        require(n_points >= 2 && (n_points & (n_points - 1)) == 0, Errc::invalid_argument,
                "grid size must be a power of two and at least 2");
        require(x_max > x_min, Errc::invalid_argument, "grid extent must be positive");
    }
};

// Free Gaussian wavepacket parameters. var_x0 is the position variance and
// cov0 the initial symmetrised covariance Cov(x,p) = (<{x,p}> - 2<x><p>)/2.
struct GaussianPacket {
    double x0 = 0.0;
    double p0 = 0.0;
    double var_x0 = 1.0;
    double cov0 = 0.0;
};

struct RabiSpec {
    double omega = 6.283185307179586476925287;  // 2*pi, period 1
};

struct WaveFunction {
    GridSpec grid;
    std::vector<std::complex<double>> amplitudes;
    double time = 0.0;

    double norm_squared() const;
    void normalize();
    // Probability mass in the outermost bin on each side, |psi_0|^2 dx + |psi_{n-1}|^2 dx.
    double edge_density() const;
    void validate() const;
};

// Prepares the normalised Gaussian exp(-(x-x0)^2/(4 var_x0) + i p0 x / hbar)
// on the grid. Requires the 6-sigma support to fit inside the grid.
WaveFunction gaussian_to_wavefunction(const GaussianPacket& packet, const GridSpec& grid,
                                      const PhysicalConstants& consts);

struct FreeMoments {
    double mean_x = 0.0;
    double var_x = 0.0;
};

// Closed-form mean and variance of a freely evolving Gaussian packet:
//   mean_x(t) = x0 + p0 t / m
//   var_x(t)  = var_x0 + c0 t + var_p0 t^2 / m^2
// with c0 = 2 cov0 / m and var_p0 = (hbar^2/4 + cov0^2) / var_x0 (minimum
// uncertainty when cov0 = 0).
FreeMoments evolve_free_analytic(const GaussianPacket& packet, double t,
                                 const PhysicalConstants& consts);

double packet_var_p0(const GaussianPacket& packet, const PhysicalConstants& consts);

// Split-step propagation of the free particle under periodic boundaries. For
// a vanishing potential every step applies the exact kinetic phase
// exp(-i hbar k^2 dt / (2 m)) in the spectral basis. steps == 0 returns the
// input unchanged; dt may be negative (time reversal). After each step the
// edge-bin density must stay below 1e-8 or BoundaryContamination is raised.
WaveFunction propagate_split_step(const WaveFunction& psi, double dt, std::size_t steps,
                                  const PhysicalConstants& consts);

// Excited-state occupation of a resonantly driven two-level system,
// cos^2(omega t / 2).
double rabi_excited_prob(const RabiSpec& spec, double t);

// Grid observables.
std::vector<double> probability_density(const WaveFunction& psi);  // |psi_k|^2, sums to 1/dx
double position_mean(const WaveFunction& psi);
double position_variance(const WaveFunction& psi);
double momentum_mean(const WaveFunction& psi, const PhysicalConstants& consts);
double momentum_variance(const WaveFunction& psi, const PhysicalConstants& consts);

// Spectral wavenumber of bin j under the usual FFT layout.
double fft_wavenumber(const GridSpec& grid, std::size_t j);

}  // namespace strobe

#include "strobe/dynamics.hpp"

#include <cmath>

#include "strobe/fft.hpp"

namespace strobe {

namespace {
constexpr double kEdgeDensityLimit = 1e-8;
constexpr double kNormTolerance = 1e-9;
}  // namespace

double WaveFunction::norm_squared() const {
    double s = 0.0;
    for (const auto& a : amplitudes) s += std::norm(a);
    return s * grid.dx();
}

void WaveFunction::normalize() {
    const double n2 = norm_squared();
    require(n2 > 0.0, Errc::invalid_argument, "cannot normalize a null wavefunction");
    const double scale = 1.0 / std::sqrt(n2);
    for (auto& a : amplitudes) a *= scale;
}

double WaveFunction::edge_density() const {
    if (amplitudes.empty()) return 0.0;
    return (std::norm(amplitudes.front()) + std::norm(amplitudes.back())) * grid.dx();
}

void WaveFunction::validate() const {
    grid.validate();
    require(amplitudes.size() == grid.n_points, Errc::invalid_argument,
            "amplitude count does not match the grid");
    require(std::abs(norm_squared() - 1.0) < kNormTolerance, Errc::invalid_argument,
            "wavefunction norm deviates from 1");
}

WaveFunction gaussian_to_wavefunction(const GaussianPacket& packet, const GridSpec& grid,
                                      const PhysicalConstants& consts) {
    grid.validate();
    require(packet.var_x0 > 0.0, Errc::invalid_argument, "position variance must be positive");
    const double sigma = std::sqrt(packet.var_x0);
    require(packet.x0 - 6.0 * sigma >= grid.x_min && packet.x0 + 6.0 * sigma <= grid.x_max,
            Errc::grid_too_small, "6-sigma support of the packet does not fit inside the grid");

    WaveFunction psi;
    psi.grid = grid;
    psi.amplitudes.resize(grid.n_points);
    psi.time = 0.0;
    for (std::size_t k = 0; k < grid.n_points; ++k) {
        const double x = grid.x(k);
        const double d = x - packet.x0;
        const double envelope = std::exp(-d * d / (4.0 * packet.var_x0));
        const double phase = packet.p0 * x / consts.hbar;
        psi.amplitudes[k] = std::polar(envelope, phase);
    }
    psi.normalize();
    return psi;
}

double packet_var_p0(const GaussianPacket& packet, const PhysicalConstants& consts) {
    // Exact momentum variance of a pure Gaussian with symmetrised covariance
    // cov0; reduces to hbar^2 / (4 var_x0) in the minimum-uncertainty case.
    return (consts.hbar * consts.hbar / 4.0 + packet.cov0 * packet.cov0) / packet.var_x0;
}

FreeMoments evolve_free_analytic(const GaussianPacket& packet, double t,
                                 const PhysicalConstants& consts) {
    const double m = consts.mass;
    const double c0 = 2.0 * packet.cov0 / m;
    const double var_p0 = packet_var_p0(packet, consts);
    FreeMoments out;
    out.mean_x = packet.x0 + packet.p0 * t / m;
    out.var_x = packet.var_x0 + c0 * t + var_p0 * t * t / (m * m);
    return out;
}

double fft_wavenumber(const GridSpec& grid, std::size_t j) {
    const double dk = 2.0 * M_PI / grid.length();
    const auto n = grid.n_points;
    const double idx = (j < n / 2) ? static_cast<double>(j)
                                   : static_cast<double>(j) - static_cast<double>(n);
    return dk * idx;
}

WaveFunction propagate_split_step(const WaveFunction& psi, double dt, std::size_t steps,
                                  const PhysicalConstants& consts) {
    psi.grid.validate();
    require(psi.amplitudes.size() == psi.grid.n_points, Errc::invalid_argument,
            "amplitude count does not match the grid");
    WaveFunction out = psi;
    if (steps == 0) return out;

    const auto n = out.grid.n_points;
    std::vector<std::complex<double>> phase(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double k = fft_wavenumber(out.grid, j);
        phase[j] = std::polar(1.0, -consts.hbar * k * k * dt / (2.0 * consts.mass));
    }

    for (std::size_t s = 0; s < steps; ++s) {
        fft::forward(out.amplitudes);
        for (std::size_t j = 0; j < n; ++j) out.amplitudes[j] *= phase[j];
        fft::inverse(out.amplitudes);
        require(out.edge_density() <= kEdgeDensityLimit, Errc::boundary_contamination,
                "wavepacket reached the grid boundary");
    }
    out.time = psi.time + dt * static_cast<double>(steps);
    return out;
}

double rabi_excited_prob(const RabiSpec& spec, double t) {
    const double c = std::cos(spec.omega * t / 2.0);
    return c * c;
}

std::vector<double> probability_density(const WaveFunction& psi) {
    std::vector<double> rho(psi.amplitudes.size());
    for (std::size_t k = 0; k < rho.size(); ++k) rho[k] = std::norm(psi.amplitudes[k]);
    return rho;
}

double position_mean(const WaveFunction& psi) {
    double s = 0.0, w = 0.0;
    for (std::size_t k = 0; k < psi.amplitudes.size(); ++k) {
        const double p = std::norm(psi.amplitudes[k]);
        s += p * psi.grid.x(k);
        w += p;
    }
    return s / w;
}

double position_variance(const WaveFunction& psi) {
    const double mu = position_mean(psi);
    double s = 0.0, w = 0.0;
    for (std::size_t k = 0; k < psi.amplitudes.size(); ++k) {
        const double p = std::norm(psi.amplitudes[k]);
        const double d = psi.grid.x(k) - mu;
        s += p * d * d;
        w += p;
    }
    return s / w;
}

namespace {

// Momentum moments through the spectral representation, <p^s> with p = hbar k.
void momentum_moments(const WaveFunction& psi, const PhysicalConstants& consts, double& m1,
                      double& m2) {
    auto spec = psi.amplitudes;
    fft::forward(spec);
    double w = 0.0, s1 = 0.0, s2 = 0.0;
    for (std::size_t j = 0; j < spec.size(); ++j) {
        const double weight = std::norm(spec[j]);
        const double p = consts.hbar * fft_wavenumber(psi.grid, j);
        w += weight;
        s1 += weight * p;
        s2 += weight * p * p;
    }
    m1 = s1 / w;
    m2 = s2 / w;
}

}  // namespace

double momentum_mean(const WaveFunction& psi, const PhysicalConstants& consts) {
    double m1, m2;
    momentum_moments(psi, consts, m1, m2);
    return m1;
}

double momentum_variance(const WaveFunction& psi, const PhysicalConstants& consts) {
    double m1, m2;
    momentum_moments(psi, consts, m1, m2);
    return m2 - m1 * m1;
}

}  // namespace strobe

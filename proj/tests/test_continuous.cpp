#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "strobe/continuous.hpp"
#include "strobe/stats.hpp"

using namespace strobe;

namespace {

const PhysicalConstants kConsts;
const GridSpec kFine{2048, -64.0, 64.0};

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace

TEST_CASE("pointer spec validation and coupling constant") {
    PointerSpec p{2.0, 0.25};
    CHECK(p.kappa() == doctest::Approx(0.5));
    CHECK_NOTHROW(p.validate());
    p.sigma = 0.0;
    CHECK_THROWS_AS(p.validate(), Error);
    p.sigma = 1.0;
    p.tau = -0.1;
    CHECK_THROWS_AS(p.validate(), Error);
}

TEST_CASE("one fuzzy measurement applies the exact gaussian update") {
    const WaveFunction psi = gaussian_to_wavefunction({0.0, 0.0, 1.0, 0.0}, kFine, kConsts);
    const double sigma = 2.0;
    const RandomSource rng(21, 0);
    const FuzzyOutcome out = fuzzy_measure(psi, sigma, rng, 0);

    CHECK(out.posterior.norm_squared() == doctest::Approx(1.0).epsilon(1e-10));
    // Multiplying a variance-V gaussian by the pointer factor leaves a
    // gaussian of variance V sigma / (sigma + 2V), independent of the
    // readout, and adds hbar^2 / (2 sigma) of momentum variance.
    CHECK(position_variance(out.posterior) ==
          doctest::Approx(1.0 * sigma / (sigma + 2.0)).epsilon(1e-6));
    CHECK(momentum_variance(out.posterior, kConsts) ==
          doctest::Approx(0.25 + 1.0 / (2.0 * sigma)).epsilon(1e-6));
    // The posterior mean moves toward the readout by the Bayesian weight
    // V / (V + sigma/2)... evaluated for V = 1, sigma/2 = 1: halfway.
    CHECK(position_mean(out.posterior) == doctest::Approx(out.readout / 2.0).epsilon(1e-4));
}

TEST_CASE("fuzzy readouts scatter with the pointer width on top of born noise") {
    const WaveFunction psi = gaussian_to_wavefunction({0.0, 0.0, 1.0, 0.0}, kFine, kConsts);
    const double sigma = 2.0;
    const RandomSource rng(77, 0);
    const int n = 4000;
    std::vector<double> readouts;
    readouts.reserve(n);
    for (int e = 0; e < n; ++e)
        readouts.push_back(fuzzy_measure(psi, sigma, rng, static_cast<std::uint64_t>(e)).readout);
    const double mean = sample_mean(readouts);
    const double var = sample_variance(readouts);
    CHECK(std::abs(mean) < 4.0 * std::sqrt(2.0 / n));
    CHECK(var == doctest::Approx(1.0 + sigma / 2.0).epsilon(0.1));
}

TEST_CASE("regions resolve half-open intervals onto the grid") {
    const Region region = Region::interval(-1.0, 2.0);
    CHECK(region.contains(-1.0));
    CHECK(region.contains(0.0));
    CHECK_FALSE(region.contains(2.0));
    CHECK_FALSE(region.contains(-1.0000001));

    Region split;
    split.intervals = {{-2.0, -1.0}, {1.0, 2.0}};
    CHECK(split.contains(-1.5));
    CHECK_FALSE(split.contains(0.0));
    CHECK(split.contains(1.0));

    const GridSpec tiny{8, 0.0, 8.0};
    const auto mask = Region::interval(2.0, 5.0).mask(tiny);
    CHECK(mask == std::vector<bool>{false, false, true, true, true, false, false, false});
}

TEST_CASE("region probability matches the closed-form gaussian mass") {
    const WaveFunction psi = gaussian_to_wavefunction({0.0, 0.0, 1.0, 0.0}, kFine, kConsts);
    // Boundaries centred between grid points turn the bin sum into a midpoint
    // rule, accurate to O(dx^2).
    const double half = 0.5 * kFine.dx();
    const double lo = -1.0 + half, hi = 2.0 + half;
    const double measured = region_probability(psi, Region::interval(lo, hi));
    CHECK(measured == doctest::Approx(normal_cdf(hi) - normal_cdf(lo)).epsilon(5e-4));
    // Complement and full-line sanity.
    const Region right = Region::interval(lo, 64.0);
    const Region left = Region::interval(-64.0, lo);
    CHECK(region_probability(psi, right) + region_probability(psi, left) ==
          doctest::Approx(1.0).epsilon(1e-12));
    CHECK(region_probability(psi, Region::interval(-64.0, 64.0)) ==
          doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("projective region measurement is born-distributed with clean posteriors") {
    const WaveFunction psi = gaussian_to_wavefunction({0.0, 0.0, 1.0, 0.0}, kFine, kConsts);
    const Region region = Region::interval(-0.5, 0.5);
    const double p_in = region_probability(psi, region);
    const RandomSource rng(5, 3);

    int inside = 0;
    const int n = 2000;
    for (int e = 0; e < n; ++e) {
        const ProjectionOutcome out = project_region(psi, region, rng, static_cast<std::uint64_t>(e));
        if (out.inside) ++inside;
        CHECK(out.posterior.norm_squared() == doctest::Approx(1.0).epsilon(1e-10));
        // The posterior is supported entirely on the measured side.
        const double mass_in = region_probability(out.posterior, region);
        CHECK(mass_in == doctest::Approx(out.inside ? 1.0 : 0.0).epsilon(1e-12));
    }
    const double freq = static_cast<double>(inside) / n;
    CHECK(std::abs(freq - p_in) < 4.0 * std::sqrt(p_in * (1.0 - p_in) / n));
}

TEST_CASE("repeated projection freezes an escaping packet monotonically") {
    // Wide domain: the kinetic step radiates a weak pedestal from the
    // spectral fold, and the edge guard needs it below 1e-8 at the boundary.
    const FreeGaussianSystem sys{{0.0, 2.3, 2.56, 0.0}, {2048, -1024.0, 1024.0}, kConsts};
    const Region region = Region::interval(-10.0, 8.0);
    double prev = 0.0;
    for (std::size_t M : {1, 4, 16, 64}) {
        const double s = survival_probability_zeno(sys, region, 5.0, M);
        CHECK(s > prev);
        CHECK(s <= 1.0);
        prev = s;
    }
    CHECK(prev > 0.85);

    // One interruption is just the region mass of the freely evolved state.
    const double s1 = survival_probability_zeno(sys, region, 5.0, 1);
    WaveFunction psi = gaussian_to_wavefunction(sys.packet, sys.grid, kConsts);
    psi = propagate_split_step(psi, 5.0, 1, kConsts);
    CHECK(s1 == doctest::Approx(region_probability(psi, region)).epsilon(1e-12));
    CHECK(s1 == doctest::Approx(0.037833806830365).epsilon(1e-6));
}

TEST_CASE("survival equals the product of stepwise region masses") {
    const FreeGaussianSystem sys{{0.0, 1.0, 1.0, 0.0}, {512, -32.0, 32.0}, kConsts};
    const Region region = Region::interval(-7.0, 6.0);
    const double T = 1.5;
    const std::size_t M = 5;
    const double got = survival_probability_zeno(sys, region, T, M);

    WaveFunction psi = gaussian_to_wavefunction(sys.packet, sys.grid, kConsts);
    double expect = 1.0;
    for (std::size_t m = 0; m < M; ++m) {
        psi = propagate_split_step(psi, T / M, 1, kConsts);
        expect *= region_probability(psi, region);
        for (std::size_t k = 0; k < psi.grid.n_points; ++k)
            if (!region.contains(psi.grid.x(k))) psi.amplitudes[k] = 0.0;
        psi.normalize();
    }
    CHECK(got == doctest::Approx(expect).epsilon(1e-12));
    CHECK(got < 1.0);
    CHECK(got > 0.999);

    // A region that holds the whole grid mass loses nothing.
    const Region all = Region::interval(-31.0, 31.0);
    CHECK(survival_probability_zeno(sys, all, T, 3) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("zeno precondition rejects packets that straddle the region") {
    const FreeGaussianSystem sys{{0.0, 0.0, 1.0, 0.0}, {256, -64.0, 64.0}, kConsts};
    CHECK_THROWS_AS(survival_probability_zeno(sys, Region::interval(-1.0, 1.0), 1.0, 4), Error);
    CHECK_THROWS_AS(survival_probability_zeno(sys, Region::interval(-8.0, 8.0), -1.0, 4), Error);
}

TEST_CASE("moment state maps a packet and validates uncertainty") {
    const GaussianPacket packet{1.0, 2.0, 1.5, 0.3};
    const MomentState st = MomentState::from_packet(packet, kConsts);
    CHECK(st.mean_x == doctest::Approx(1.0));
    CHECK(st.mean_p == doctest::Approx(2.0));
    CHECK(st.var_x() == doctest::Approx(1.5));
    CHECK(st.var_p() == doctest::Approx((0.25 + 0.09) / 1.5));
    CHECK(st.sym_cov() == doctest::Approx(0.3));
    CHECK_NOTHROW(st.validate(kConsts));

    MomentState squeezed = st;
    squeezed.p2 = st.mean_p * st.mean_p + 0.01;  // var_x var_p below hbar^2/4
    CHECK_THROWS_AS(squeezed.validate(kConsts), Error);
}

TEST_CASE("moment equations agree with their closed forms") {
    const MomentState init = MomentState::from_packet({0.0, 1.0, 1.0, 0.0}, kConsts);
    for (double kappa : {0.25, 0.5, std::numeric_limits<double>::infinity()}) {
        const auto series = moment_ode_evolve(init, kappa, 5.0, 0.005, kConsts);
        CHECK(series.front().t == doctest::Approx(0.0));
        CHECK(series.back().t == doctest::Approx(5.0));
        double worst_x = 0.0, worst_p = 0.0;
        for (const auto& s : series) {
            const double vx = variance_closed_form_x(init, kappa, s.t, kConsts);
            const double vp = variance_closed_form_p(init, kappa, s.t, kConsts);
            worst_x = std::max(worst_x, std::abs(s.state.var_x() - vx) / vx);
            worst_p = std::max(worst_p, std::abs(s.state.var_p() - vp) / vp);
            CHECK(s.state.mean_x == doctest::Approx(s.t).epsilon(1e-9));
            CHECK(s.state.mean_p == doctest::Approx(1.0).epsilon(1e-12));
        }
        CHECK(worst_x < 1e-9);
        CHECK(worst_p < 1e-9);
    }
}

TEST_CASE("the moment system is polynomial, so rk4 is exact in the step") {
    const MomentState init = MomentState::from_packet({0.0, 0.0, 1.0, 0.0}, kConsts);
    const auto coarse = moment_ode_evolve(init, 0.5, 2.0, 1.0, kConsts);
    const double vx = variance_closed_form_x(init, 0.5, 2.0, kConsts);
    CHECK(coarse.back().state.var_x() == doctest::Approx(vx).epsilon(1e-12));
}

TEST_CASE("infinite kappa reduces to free-packet spreading") {
    const GaussianPacket packet{(0.0), 1.0, 1.0, 0.0};
    const MomentState init = MomentState::from_packet(packet, kConsts);
    const double inf = std::numeric_limits<double>::infinity();
    for (double t : {0.5, 1.5, 3.0}) {
        const FreeMoments free = evolve_free_analytic(packet, t, kConsts);
        CHECK(variance_closed_form_x(init, inf, t, kConsts) ==
              doctest::Approx(free.var_x).epsilon(1e-12));
        CHECK(variance_closed_form_p(init, inf, t, kConsts) == doctest::Approx(0.25));
    }
}

TEST_CASE("dense master equation integrates toward the moment equations") {
    const GridSpec small{128, -16.0, 16.0};
    const WaveFunction psi0 = gaussian_to_wavefunction({0.0, 0.0, 1.0, 0.0}, small, kConsts);
    DensityMatrix dm = DensityMatrix::from_wavefunction(psi0);
    CHECK(dm.trace_error() < 1e-12);
    CHECK(dm.hermiticity_error() < 1e-12);
    CHECK(dm.purity() == doctest::Approx(1.0).epsilon(1e-10));

    const MomentState init = MomentState::from_packet({0.0, 0.0, 1.0, 0.0}, kConsts);
    const MomentState before = density_matrix_moments(dm, kConsts);
    CHECK(before.var_x() == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(before.var_p() == doctest::Approx(0.25).epsilon(1e-6));

    const double kappa = 0.5;
    dm = lindblad_dense_evolve(dm, kappa, 1e-3, 1000, kConsts);
    const MomentState after = density_matrix_moments(dm, kConsts);
    CHECK(after.var_x() ==
          doctest::Approx(variance_closed_form_x(init, kappa, 1.0, kConsts)).epsilon(2e-4));
    CHECK(after.var_p() ==
          doctest::Approx(variance_closed_form_p(init, kappa, 1.0, kConsts)).epsilon(2e-4));
    CHECK(dm.trace_error() < 1e-7);
    CHECK(dm.hermiticity_error() < 1e-9);
    // Measurement without readout decoheres: purity strictly drops.
    CHECK(dm.purity() < 0.999);
    CHECK(dm.min_eigenvalue() > -1e-8);
}

TEST_CASE("dense evolution rejects oversized grids and trace drift") {
    const GridSpec big{512, -16.0, 16.0};
    const WaveFunction psi0 = gaussian_to_wavefunction({0.0, 0.0, 1.0, 0.0}, big, kConsts);
    const DensityMatrix dm = DensityMatrix::from_wavefunction(psi0);
    CHECK_THROWS_AS(lindblad_dense_evolve(dm, 0.5, 1e-3, 10, kConsts), Error);
}

TEST_CASE("conditional trajectories are reproducible and well-formed") {
    const FreeGaussianSystem sys{{0.0, 0.0, 1.0, 0.0}, kFine, kConsts};
    const PointerSpec pointer{1.0, 0.1};
    const SeedSpec seed{13, 4};
    const Trajectory a = fuzzy_trajectory(sys, pointer, 1.0, seed, 7);
    const Trajectory b = fuzzy_trajectory(sys, pointer, 1.0, seed, 7);
    CHECK(a.id == 7);
    REQUIRE(a.times.size() == 10);
    CHECK(a.times.front() == doctest::Approx(0.1));
    CHECK(a.times.back() == doctest::Approx(1.0));
    CHECK(a.readouts == b.readouts);
    CHECK(a.cond_mean == b.cond_mean);
    for (double m : a.cond_mean) CHECK(std::abs(m) < 64.0);

    const Trajectory c = fuzzy_trajectory(sys, pointer, 1.0, seed, 8);
    CHECK(a.readouts != c.readouts);
    CHECK_THROWS_AS(fuzzy_trajectory(sys, pointer, 0.01, seed, 0), Error);
}

TEST_CASE("trajectory ensembles are worker-invariant") {
    const FreeGaussianSystem sys{{0.0, 0.0, 1.0, 0.0}, {512, -64.0, 64.0}, kConsts};
    const PointerSpec pointer{1.0, 0.25};
    const SeedSpec seed{19, 6};
    const auto serial = fuzzy_ensemble(sys, pointer, 1.0, 12, seed, 1);
    const auto threaded = fuzzy_ensemble(sys, pointer, 1.0, 12, seed, 3);
    REQUIRE(serial.size() == 12);
    for (std::size_t i = 0; i < 12; ++i) {
        CHECK(serial[i].id == i);
        CHECK(serial[i].readouts == threaded[i].readouts);
    }
}

TEST_CASE("readout variance series and crossing times") {
    Trajectory t1{0, {0.0, 1.0, 2.0}, {1.0, 2.0, 3.0}, {-2.0, -1.0, 1.0}};
    Trajectory t2{1, {0.0, 1.0, 2.0}, {3.0, 0.0, 5.0}, {-2.0, 1.0, -1.0}};
    const VarianceSeries vs = readout_variance_series({t1, t2});
    REQUIRE(vs.times.size() == 3);
    CHECK(vs.variance[0] == doctest::Approx(2.0));
    CHECK(vs.variance[1] == doctest::Approx(2.0));
    CHECK(vs.variance[2] == doctest::Approx(2.0));

    const auto crossings = crossing_times(t1, 0.0);
    REQUIRE(crossings.size() == 1);
    CHECK(crossings[0] == doctest::Approx(1.5));
    // Two sign changes, two crossings.
    const auto twice = crossing_times(t2, 0.0);
    CHECK(twice.size() == 2);
    CHECK(crossing_times(t1, 10.0).empty());
}

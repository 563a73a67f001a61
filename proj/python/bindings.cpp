// Python bindings for the simulator core. Exposes the sampling, clock,
// flow, Zeno, continuous-measurement and click-statistics entry points plus
// a config-driven experiment runner mirroring the CLI.

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "strobe/clock.hpp"
#include "strobe/continuous.hpp"
#include "strobe/detector.hpp"
#include "strobe/experiment.hpp"
#include "strobe/sampler.hpp"
#include "strobe/stats.hpp"
#include "strobe/stroboscope.hpp"

namespace py = pybind11;
using namespace strobe;

namespace {

std::string run_from_config(const std::string& config_text, const std::string& mode,
                            const std::string& out_dir, std::size_t workers,
                            const std::string& format, std::optional<std::uint64_t> seed) {
    Config cfg = Config::from_text(config_text);
    const ExperimentConfig ec = ExperimentConfig::from_config(cfg);
    RunOptions opt;
    opt.out_dir = out_dir;
    opt.workers = workers;
    opt.format = parse_format(format);
    opt.seed = seed;
    const RunManifest manifest = run_experiment(ec, parse_mode(mode), opt);
    return manifest_json(manifest);
}

}  // namespace

PYBIND11_MODULE(_strobe_core, m) {
    m.doc() = "stroboscopic time-of-arrival simulator core";
    m.attr("__version__") = kVersion;

    py::register_exception<Error>(m, "SimulationError");

    py::class_<PhysicalConstants>(m, "PhysicalConstants")
        .def(py::init<>())
        .def(py::init([](double hbar, double mass) {
                 return PhysicalConstants{hbar, mass};
             }),
             py::arg("hbar"), py::arg("mass"))
        .def_readwrite("hbar", &PhysicalConstants::hbar)
        .def_readwrite("mass", &PhysicalConstants::mass);

    py::class_<GaussianPacket>(m, "GaussianPacket")
        .def(py::init([](double x0, double p0, double var_x0, double cov0) {
                 return GaussianPacket{x0, p0, var_x0, cov0};
             }),
             py::arg("x0") = 0.0, py::arg("p0") = 0.0, py::arg("var_x0") = 1.0,
             py::arg("cov0") = 0.0)
        .def_readwrite("x0", &GaussianPacket::x0)
        .def_readwrite("p0", &GaussianPacket::p0)
        .def_readwrite("var_x0", &GaussianPacket::var_x0)
        .def_readwrite("cov0", &GaussianPacket::cov0);

    py::class_<GridSpec>(m, "GridSpec")
        .def(py::init([](std::size_t n, double x_min, double x_max) {
                 return GridSpec{n, x_min, x_max};
             }),
             py::arg("n_points"), py::arg("x_min"), py::arg("x_max"))
        .def_readwrite("n_points", &GridSpec::n_points)
        .def_readwrite("x_min", &GridSpec::x_min)
        .def_readwrite("x_max", &GridSpec::x_max)
        .def("dx", &GridSpec::dx)
        .def("x", &GridSpec::x, py::arg("k"));

    py::class_<WindowSpec>(m, "WindowSpec")
        .def(py::init([](double t0, double T, std::size_t M) {
                 return WindowSpec{t0, T, M};
             }),
             py::arg("t0"), py::arg("T"), py::arg("M"))
        .def_readwrite("t0", &WindowSpec::t0)
        .def_readwrite("T", &WindowSpec::T)
        .def_readwrite("M", &WindowSpec::M)
        .def("tau", &WindowSpec::tau);

    py::class_<SeedSpec>(m, "SeedSpec")
        .def(py::init([](std::uint64_t master, std::uint64_t stream) {
                 return SeedSpec{master, stream};
             }),
             py::arg("master_seed"), py::arg("stream_id") = 0)
        .def_readwrite("master_seed", &SeedSpec::master_seed)
        .def_readwrite("stream_id", &SeedSpec::stream_id);

    py::class_<RabiSpec>(m, "RabiSpec")
        .def(py::init([](double omega) { return RabiSpec{omega}; }),
             py::arg("omega") = RabiSpec{}.omega)
        .def_readwrite("omega", &RabiSpec::omega);

    py::class_<FreeGaussianSystem>(m, "FreeGaussianSystem")
        .def(py::init([](const GaussianPacket& packet, const GridSpec& grid,
                         const PhysicalConstants& consts) {
                 return FreeGaussianSystem{packet, grid, consts};
             }),
             py::arg("packet"), py::arg("grid"),
             py::arg("consts") = PhysicalConstants{})
        .def_readwrite("packet", &FreeGaussianSystem::packet)
        .def_readwrite("grid", &FreeGaussianSystem::grid)
        .def_readwrite("consts", &FreeGaussianSystem::consts);

    py::class_<RabiSystem>(m, "RabiSystem")
        .def(py::init([](const RabiSpec& spec) { return RabiSystem{spec}; }),
             py::arg("spec") = RabiSpec{})
        .def_readwrite("spec", &RabiSystem::spec);

    py::class_<OutcomeBinning>(m, "OutcomeBinning")
        .def_static("uniform_bins", &OutcomeBinning::uniform_bins, py::arg("grid"),
                    py::arg("n_bins"))
        .def_static("window", &OutcomeBinning::window, py::arg("center"), py::arg("halfwidth"))
        .def_static("two_level", &OutcomeBinning::two_level)
        .def("n_outcomes", &OutcomeBinning::n_outcomes)
        .def("outcome_position", &OutcomeBinning::outcome_position, py::arg("n"))
        .def_readonly("bin_edges", &OutcomeBinning::bin_edges);

    py::class_<CountsMatrix>(m, "CountsMatrix")
        .def_readonly("counts", &CountsMatrix::counts)
        .def_readonly("times", &CountsMatrix::times)
        .def_readonly("shots_per_time", &CountsMatrix::shots_per_time)
        .def("n_outcomes", &CountsMatrix::n_outcomes)
        .def("n_times", &CountsMatrix::n_times)
        .def("row_total", &CountsMatrix::row_total, py::arg("n"))
        .def("column_total", &CountsMatrix::column_total, py::arg("m"));

    py::class_<TimeDistribution>(m, "TimeDistribution")
        .def_property_readonly(
            "defined", [](const TimeDistribution& d) { return d.status == DistStatus::defined; })
        .def_readonly("outcome", &TimeDistribution::outcome)
        .def_readonly("threshold", &TimeDistribution::threshold)
        .def_readonly("times", &TimeDistribution::times)
        .def_readonly("probs", &TimeDistribution::probs);

    py::class_<ClockDistribution>(m, "ClockDistribution")
        .def_readonly("outcome", &ClockDistribution::outcome)
        .def_readonly("times", &ClockDistribution::times)
        .def_readonly("density", &ClockDistribution::density)
        .def_readonly("normalization", &ClockDistribution::normalization)
        .def("occupation",
             [](const ClockDistribution& c, double t) { return c.occupation(t); },
             py::arg("t"));

    py::class_<DensitySeries>(m, "DensitySeries")
        .def_readonly("times", &DensitySeries::times)
        .def_readonly("densities", &DensitySeries::densities);

    py::class_<Region>(m, "Region")
        .def_static("interval", &Region::interval, py::arg("lo"), py::arg("hi"))
        .def("contains", &Region::contains, py::arg("x"));

    py::class_<PointerSpec>(m, "PointerSpec")
        .def(py::init([](double sigma, double tau) { return PointerSpec{sigma, tau}; }),
             py::arg("sigma"), py::arg("tau"))
        .def_readwrite("sigma", &PointerSpec::sigma)
        .def_readwrite("tau", &PointerSpec::tau)
        .def("kappa", &PointerSpec::kappa);

    py::class_<Trajectory>(m, "Trajectory")
        .def_readonly("id", &Trajectory::id)
        .def_readonly("times", &Trajectory::times)
        .def_readonly("readouts", &Trajectory::readouts);

    py::class_<VarianceSeries>(m, "VarianceSeries")
        .def_readonly("times", &VarianceSeries::times)
        .def_readonly("variance", &VarianceSeries::variance);

    py::class_<MomentState>(m, "MomentState")
        .def_static("from_packet", &MomentState::from_packet, py::arg("packet"),
                    py::arg("consts") = PhysicalConstants{})
        .def_readwrite("mean_x", &MomentState::mean_x)
        .def_readwrite("mean_p", &MomentState::mean_p)
        .def_readwrite("x2", &MomentState::x2)
        .def_readwrite("p2", &MomentState::p2)
        .def_readwrite("xp_sym", &MomentState::xp_sym)
        .def("var_x", &MomentState::var_x)
        .def("var_p", &MomentState::var_p);

    py::class_<MomentSample>(m, "MomentSample")
        .def_readonly("t", &MomentSample::t)
        .def_readonly("state", &MomentSample::state);

    py::class_<ClickStream>(m, "ClickStream")
        .def_readonly("clicks", &ClickStream::clicks)
        .def_readonly("kappa", &ClickStream::kappa)
        .def_readonly("run_id", &ClickStream::run_id);

    py::class_<OccupancyProfile>(m, "OccupancyProfile")
        .def_static("rectangular", &OccupancyProfile::rectangular, py::arg("t_start"),
                    py::arg("duration"))
        .def_static("from_wavefunction", &OccupancyProfile::from_wavefunction, py::arg("system"),
                    py::arg("region"))
        .def_static("tabulated", &OccupancyProfile::tabulated, py::arg("times"),
                    py::arg("values"))
        .def("__call__", &OccupancyProfile::operator(), py::arg("t"));

    m.def("build_counts_matrix", &build_counts_matrix, py::arg("system"), py::arg("binning"),
          py::arg("t0"), py::arg("T"), py::arg("M"), py::arg("L"), py::arg("seed"),
          py::arg("workers") = 1, py::call_guard<py::gil_scoped_release>());
    m.def("row_normalize", &row_normalize, py::arg("counts"));
    m.def("tv_distance", &tv_distance, py::arg("a"), py::arg("b"));
    m.def("polyfit", &polyfit, py::arg("x"), py::arg("y"), py::arg("degree"));
    m.def("column_position_mean", &column_position_mean, py::arg("counts"), py::arg("binning"),
          py::arg("m"));
    m.def("column_position_variance", &column_position_variance, py::arg("counts"),
          py::arg("binning"), py::arg("m"));

    m.def("clock_distribution", &clock_distribution, py::arg("system"), py::arg("binning"),
          py::arg("window"), py::arg("outcome"), py::arg("quad_nodes") = 1025,
          py::call_guard<py::gil_scoped_release>());
    m.def("discretize_clock", &discretize_clock, py::arg("clock"), py::arg("M"));
    m.def("make_density_series", &make_density_series, py::arg("system"), py::arg("times"),
          py::call_guard<py::gil_scoped_release>());
    m.def("flow_distribution", &flow_distribution, py::arg("series"), py::arg("x_threshold"),
          py::arg("window"));
    m.def("discretize_flow", &discretize_flow, py::arg("dense"), py::arg("window"));
    m.def("flow_estimate", &flow_estimate, py::arg("counts"), py::arg("binning"),
          py::arg("x_threshold"));

    m.def("survival_probability_zeno", &survival_probability_zeno, py::arg("system"),
          py::arg("region"), py::arg("T"), py::arg("M"),
          py::call_guard<py::gil_scoped_release>());

    m.def("fuzzy_ensemble", &fuzzy_ensemble, py::arg("system"), py::arg("pointer"), py::arg("T"),
          py::arg("n_traj"), py::arg("seed"), py::arg("workers") = 1,
          py::call_guard<py::gil_scoped_release>());
    m.def("readout_variance_series", &readout_variance_series, py::arg("ensemble"));
    m.def("moment_ode_evolve", &moment_ode_evolve, py::arg("init"), py::arg("kappa"),
          py::arg("T"), py::arg("dt"), py::arg("consts") = PhysicalConstants{},
          py::call_guard<py::gil_scoped_release>());
    m.def("variance_closed_form_x", &variance_closed_form_x, py::arg("init"), py::arg("kappa"),
          py::arg("t"), py::arg("consts") = PhysicalConstants{});
    m.def("variance_closed_form_p", &variance_closed_form_p, py::arg("init"), py::arg("kappa"),
          py::arg("t"), py::arg("consts") = PhysicalConstants{});

    m.def("click_ensemble", &click_ensemble, py::arg("profile"), py::arg("kappa"),
          py::arg("window"), py::arg("runs"), py::arg("seed"), py::arg("workers") = 1,
          py::call_guard<py::gil_scoped_release>());

    m.def("sha256_hex", &sha256_hex, py::arg("data"));
    m.def("config_reference", &config_reference);
    m.def("run_from_config", &run_from_config, py::arg("config_text"), py::arg("mode"),
          py::arg("out_dir"), py::arg("workers") = 1, py::arg("format") = "all",
          py::arg("seed") = py::none(), py::call_guard<py::gil_scoped_release>(),
          "Run one experiment mode from config text; returns the manifest as a JSON string.");
}

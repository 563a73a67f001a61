#include "strobe/experiment.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <variant>

#include "strobe/clock.hpp"
#include "strobe/csv.hpp"
#include "strobe/detector.hpp"
#include "strobe/errors.hpp"
#include "strobe/stats.hpp"
#include "strobe/svg.hpp"

namespace strobe {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

struct KeyDoc {
    const char* key;
    const char* doc;
};

// Single source of documentation for the config reference page. Every key
// here is consumed by ExperimentConfig::from_config.
constexpr KeyDoc kKeyDocs[] = {
    {"physics.hbar", "reduced Planck constant"},
    {"physics.mass", "particle mass"},
    {"packet.x0", "initial mean position of the Gaussian packet"},
    {"packet.p0", "initial mean momentum"},
    {"packet.var_x0", "initial position variance"},
    {"packet.cov0", "initial symmetrised x-p covariance"},
    {"rabi.omega", "Rabi angular frequency of the driven two-level system"},
    {"grid.n", "number of spatial grid points (power of two)"},
    {"grid.x_min", "left edge of the spatial grid"},
    {"grid.x_max", "right edge of the spatial grid"},
    {"binning.mode", "outcome coarse-graining: uniform | window"},
    {"binning.bins", "bin count for uniform mode"},
    {"binning.edges", "explicit bin edges (comma list, overrides binning.bins)"},
    {"binning.detector_x", "detector centre for window mode"},
    {"binning.halfwidth", "detector half-width for window mode"},
    {"window.t0", "first probe time"},
    {"window.T", "observation window length"},
    {"window.M", "number of probe times"},
    {"shots.L", "measurements per probe time"},
    {"pointer.sigma", "pointer variance of one fuzzy measurement"},
    {"pointer.tau", "time between fuzzy measurements"},
    {"kappa", "continuous coupling; default pointer.sigma * pointer.tau (inf allowed)"},
    {"seed", "master seed for every random stream"},
    {"output_dir", "artifact directory"},
    {"target.outcome", "outcome index singled out for references and summaries"},
    {"flow.x_threshold", "position threshold of the cumulative-probability flow"},
    {"flow.samples", "dense time samples for the exact flow curve"},
    {"zeno.lo", "left edge of the survival region"},
    {"zeno.hi", "right edge of the survival region"},
    {"zeno.T", "total evolution time of the survival experiment"},
    {"zeno.sweep", "interruption counts M to sweep (comma list)"},
    {"clicks.profile", "detector occupancy: rectangular | wavepacket"},
    {"clicks.t_start", "rectangular profile start"},
    {"clicks.duration", "rectangular profile width"},
    {"clicks.runs", "independent click records"},
    {"ensemble.trajectories", "fuzzy-measurement trajectories"},
    {"ensemble.T", "continuous-measurement horizon"},
    {"ensemble.keep_trajectories", "trajectories written to trajectories.csv"},
    {"ode.steps", "moment-equation integration steps over window.T"},
    {"lindblad.steps", "dense master-equation steps over window.T (0 = skip)"},
    {"clock.nodes", "Simpson quadrature nodes for the clock reference (odd)"},
    {"strobe.refine", "run a coarse probe pass to shrink the window first"},
    {"strobe.probe_shots", "shots per probe time in the refinement pass"},
    {"compare.L_sweep", "shot counts for the error-vs-L table (comma list)"},
    {"compare.M_sweep", "probe counts for the error-vs-M table (comma list)"},
};

std::string join_u64(const std::vector<std::uint64_t>& xs) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(xs[i]);
    }
    return out;
}

std::string join_double(const std::vector<double>& xs) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) out += ',';
        out += csv::format_double(xs[i]);
    }
    return out;
}

}  // namespace

Mode parse_mode(const std::string& name) {
    if (name == "strobe") return Mode::strobe;
    if (name == "clock") return Mode::clock;
    if (name == "flow") return Mode::flow;
    if (name == "zeno") return Mode::zeno;
    if (name == "continuous") return Mode::continuous;
    if (name == "clicks") return Mode::clicks;
    if (name == "rabi") return Mode::rabi;
    if (name == "compare") return Mode::compare;
    raise(Errc::invalid_argument, "unknown mode '" + name + "'");
}

const char* mode_name(Mode mode) {
    switch (mode) {
        case Mode::strobe: return "strobe";
        case Mode::clock: return "clock";
        case Mode::flow: return "flow";
        case Mode::zeno: return "zeno";
        case Mode::continuous: return "continuous";
        case Mode::clicks: return "clicks";
        case Mode::rabi: return "rabi";
        case Mode::compare: return "compare";
    }
    raise(Errc::invalid_argument, "bad mode value");
}

OutputFormat parse_format(const std::string& name) {
    if (name == "csv") return OutputFormat::csv;
    if (name == "json") return OutputFormat::json;
    if (name == "svg") return OutputFormat::svg;
    if (name == "all") return OutputFormat::all;
    raise(Errc::invalid_argument, "unknown format '" + name + "' (csv|json|svg|all)");
}

ExperimentConfig ExperimentConfig::from_config(const Config& cfg) {
    ExperimentConfig c;
    c.consts.hbar = cfg.get_double("physics.hbar", c.consts.hbar);
    c.consts.mass = cfg.get_double("physics.mass", c.consts.mass);
    require(c.consts.hbar > 0.0 && c.consts.mass > 0.0, Errc::config_error,
            "physics constants must be positive");

    c.packet.x0 = cfg.get_double("packet.x0", c.packet.x0);
    c.packet.p0 = cfg.get_double("packet.p0", c.packet.p0);
    c.packet.var_x0 = cfg.get_double("packet.var_x0", c.packet.var_x0);
    c.packet.cov0 = cfg.get_double("packet.cov0", c.packet.cov0);
    c.rabi.omega = cfg.get_double("rabi.omega", kTwoPi);

    c.grid.n_points = cfg.get_size("grid.n", c.grid.n_points);
    c.grid.x_min = cfg.get_double("grid.x_min", c.grid.x_min);
    c.grid.x_max = cfg.get_double("grid.x_max", c.grid.x_max);

    const std::string bin_mode = cfg.get_string("binning.mode", "window");
    if (bin_mode == "uniform")
        c.bin_mode = BinMode::uniform;
    else if (bin_mode == "window")
        c.bin_mode = BinMode::window;
    else
        raise(Errc::config_error, "binning.mode must be uniform or window, got '" + bin_mode + "'");
    c.bins = cfg.get_size("binning.bins", c.bins);
    c.edges = cfg.get_double_list("binning.edges", c.edges);
    c.detector_x = cfg.get_double("binning.detector_x", c.detector_x);
    c.halfwidth = cfg.get_double("binning.halfwidth", c.halfwidth);

    c.window.t0 = cfg.get_double("window.t0", c.window.t0);
    c.window.T = cfg.get_double("window.T", c.window.T);
    c.window.M = cfg.get_size("window.M", c.window.M);
    c.shots = cfg.get_u64("shots.L", c.shots);
    require(c.shots >= 1, Errc::config_error, "shots.L must be at least 1");

    c.pointer.sigma = cfg.get_double("pointer.sigma", c.pointer.sigma);
    c.pointer.tau = cfg.get_double("pointer.tau", c.pointer.tau);
    c.kappa_override = cfg.get_double("kappa", c.kappa_override);
    c.seed = cfg.get_u64("seed", c.seed);
    c.output_dir = cfg.get_string("output_dir", c.output_dir);
    c.target_outcome = cfg.get_size("target.outcome", c.target_outcome);

    c.flow_threshold = cfg.get_double("flow.x_threshold", c.flow_threshold);
    c.flow_samples = cfg.get_size("flow.samples", c.flow_samples);
    require(c.flow_samples >= 3, Errc::config_error, "flow.samples must be at least 3");

    c.zeno_lo = cfg.get_double("zeno.lo", c.zeno_lo);
    c.zeno_hi = cfg.get_double("zeno.hi", c.zeno_hi);
    c.zeno_T = cfg.get_double("zeno.T", c.zeno_T);
    c.zeno_sweep = cfg.get_u64_list("zeno.sweep", c.zeno_sweep);
    require(c.zeno_lo < c.zeno_hi, Errc::config_error, "zeno region is empty");
    require(c.zeno_T > 0.0, Errc::config_error, "zeno.T must be positive");
    for (std::uint64_t m : c.zeno_sweep)
        require(m >= 1, Errc::config_error, "zeno.sweep entries must be >= 1");

    const std::string profile = cfg.get_string("clicks.profile", "rectangular");
    if (profile == "rectangular")
        c.click_profile = ClickProfile::rectangular;
    else if (profile == "wavepacket")
        c.click_profile = ClickProfile::wavepacket;
    else
        raise(Errc::config_error,
              "clicks.profile must be rectangular or wavepacket, got '" + profile + "'");
    c.click_t_start = cfg.get_double("clicks.t_start", c.click_t_start);
    c.click_duration = cfg.get_double("clicks.duration", c.click_duration);
    c.click_runs = cfg.get_u64("clicks.runs", c.click_runs);
    require(c.click_runs >= 1, Errc::config_error, "clicks.runs must be at least 1");

    c.trajectories = cfg.get_u64("ensemble.trajectories", c.trajectories);
    c.ensemble_T = cfg.get_double("ensemble.T", c.ensemble_T);
    require(c.ensemble_T > 0.0, Errc::config_error, "ensemble.T must be positive");
    c.keep_trajectories = cfg.get_u64("ensemble.keep_trajectories", c.keep_trajectories);
    c.ode_steps = cfg.get_size("ode.steps", c.ode_steps);
    require(c.ode_steps >= 1, Errc::config_error, "ode.steps must be at least 1");
    c.lindblad_steps = cfg.get_size("lindblad.steps", c.lindblad_steps);
    c.clock_nodes = cfg.get_size("clock.nodes", c.clock_nodes);

    c.refine = cfg.get_bool("strobe.refine", c.refine);
    c.probe_shots = cfg.get_u64("strobe.probe_shots", c.probe_shots);
    c.compare_L = cfg.get_u64_list("compare.L_sweep", c.compare_L);
    c.compare_M = cfg.get_u64_list("compare.M_sweep", c.compare_M);

    c.grid.validate();
    c.window.validate();
    c.pointer.validate();
    if (!std::isnan(c.kappa_override))
        require(c.kappa_override > 0.0, Errc::config_error, "kappa must be positive");
    return c;
}

double ExperimentConfig::effective_kappa() const {
    if (!std::isnan(kappa_override)) return kappa_override;
    return pointer.kappa();
}

System ExperimentConfig::make_system(Mode mode) const {
    if (mode == Mode::rabi) return RabiSystem{rabi};
    return FreeGaussianSystem{packet, grid, consts};
}

OutcomeBinning ExperimentConfig::make_binning(Mode mode) const {
    if (mode == Mode::rabi) return OutcomeBinning::two_level();
    const bool uniform = mode == Mode::flow || bin_mode == BinMode::uniform;
    if (mode == Mode::compare)
        require(bin_mode == BinMode::window, Errc::config_error,
                "compare mode needs binning.mode = window");
    OutcomeBinning b;
    if (uniform) {
        if (!edges.empty()) {
            b.mode = BinningMode::position_bins;
            b.bin_edges = edges;
        } else {
            b = OutcomeBinning::uniform_bins(grid, bins);
        }
    } else {
        b = OutcomeBinning::window(detector_x, halfwidth);
    }
    b.validate(grid);
    return b;
}

std::map<std::string, std::string> ExperimentConfig::to_map() const {
    std::map<std::string, std::string> m;
    m["physics.hbar"] = csv::format_double(consts.hbar);
    m["physics.mass"] = csv::format_double(consts.mass);
    m["packet.x0"] = csv::format_double(packet.x0);
    m["packet.p0"] = csv::format_double(packet.p0);
    m["packet.var_x0"] = csv::format_double(packet.var_x0);
    m["packet.cov0"] = csv::format_double(packet.cov0);
    m["rabi.omega"] = csv::format_double(rabi.omega);
    m["grid.n"] = std::to_string(grid.n_points);
    m["grid.x_min"] = csv::format_double(grid.x_min);
    m["grid.x_max"] = csv::format_double(grid.x_max);
    m["binning.mode"] = bin_mode == BinMode::uniform ? "uniform" : "window";
    m["binning.bins"] = std::to_string(bins);
    if (!edges.empty()) m["binning.edges"] = join_double(edges);
    m["binning.detector_x"] = csv::format_double(detector_x);
    m["binning.halfwidth"] = csv::format_double(halfwidth);
    m["window.t0"] = csv::format_double(window.t0);
    m["window.T"] = csv::format_double(window.T);
    m["window.M"] = std::to_string(window.M);
    m["shots.L"] = std::to_string(shots);
    m["pointer.sigma"] = csv::format_double(pointer.sigma);
    m["pointer.tau"] = csv::format_double(pointer.tau);
    if (!std::isnan(kappa_override)) m["kappa"] = csv::format_double(kappa_override);
    m["seed"] = std::to_string(seed);
    m["output_dir"] = output_dir;
    m["target.outcome"] = std::to_string(target_outcome);
    m["flow.x_threshold"] = csv::format_double(flow_threshold);
    m["flow.samples"] = std::to_string(flow_samples);
    m["zeno.lo"] = csv::format_double(zeno_lo);
    m["zeno.hi"] = csv::format_double(zeno_hi);
    m["zeno.T"] = csv::format_double(zeno_T);
    m["zeno.sweep"] = join_u64(zeno_sweep);
    m["clicks.profile"] = click_profile == ClickProfile::rectangular ? "rectangular" : "wavepacket";
    m["clicks.t_start"] = csv::format_double(click_t_start);
    m["clicks.duration"] = csv::format_double(click_duration);
    m["clicks.runs"] = std::to_string(click_runs);
    m["ensemble.trajectories"] = std::to_string(trajectories);
    m["ensemble.T"] = csv::format_double(ensemble_T);
    m["ensemble.keep_trajectories"] = std::to_string(keep_trajectories);
    m["ode.steps"] = std::to_string(ode_steps);
    m["lindblad.steps"] = std::to_string(lindblad_steps);
    m["clock.nodes"] = std::to_string(clock_nodes);
    m["strobe.refine"] = refine ? "true" : "false";
    m["strobe.probe_shots"] = std::to_string(probe_shots);
    m["compare.L_sweep"] = join_u64(compare_L);
    m["compare.M_sweep"] = join_u64(compare_M);
    return m;
}

std::string config_reference() {
    const auto defaults = ExperimentConfig{}.to_map();
    std::string out = "Config keys (key = value per line, '#' comments, unknown keys rejected)\n\n";
    for (const auto& kd : kKeyDocs) {
        const auto it = defaults.find(kd.key);
        const std::string dflt = it == defaults.end() ? "(unset)" : it->second;
        out += std::string(kd.key) + "\n    default: " + dflt + "\n    " + kd.doc + "\n";
    }
    return out;
}

std::string sha256_hex(const std::string& bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    const int ok = EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr);
    require(ok == 1, Errc::io_error, "checksum computation failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xF];
    }
    return out;
}

std::string manifest_json(const RunManifest& manifest) {
    nlohmann::json j;
    j["mode"] = manifest.mode;
    j["version"] = manifest.version;
    j["seed"] = manifest.seed;
    j["workers"] = manifest.workers;
    j["config"] = manifest.config;
    j["files"] = manifest.file_sha256;
    j["warnings"] = manifest.warnings;
    j["summary"] = manifest.summary;
    j["wall_clock_seconds"] = manifest.wall_clock_seconds;
    j["exit_code"] = manifest.exit_code;
    return j.dump(2) + "\n";
}

namespace {

struct RunContext {
    const ExperimentConfig& cfg;
    Mode mode;
    std::size_t workers = 1;
    std::map<std::string, std::string> files;
    std::vector<svg::Panel> panels;
    std::vector<std::string> warnings;
    nlohmann::json summary = nlohmann::json::object();
    int exit_code = 0;
};

svg::Series bars_from(const TimeDistribution& d, std::string label) {
    svg::Series s;
    s.label = std::move(label);
    s.bars = true;
    s.x = d.times;
    s.y = d.probs;
    return s;
}

svg::Series line_from(const TimeDistribution& d, std::string label) {
    svg::Series s;
    s.label = std::move(label);
    s.x = d.times;
    s.y = d.probs;
    return s;
}

void note_undefined(RunContext& ctx, const std::vector<TimeDistribution>& dists) {
    for (const auto& d : dists)
        if (d.status == DistStatus::undefined) {
            ctx.warnings.push_back("outcome " + std::to_string(d.outcome) +
                                   " was never observed; its time distribution is UNDEFINED");
            ctx.exit_code = std::max(ctx.exit_code, 2);
        }
}

// Drops the first probe time and renormalises, aligning a stroboscopic row
// with flow estimates that only exist for m >= 1.
TimeDistribution drop_first(const TimeDistribution& d) {
    TimeDistribution out = d;
    require(d.status == DistStatus::defined && d.times.size() >= 2, Errc::invalid_argument,
            "cannot restrict this distribution");
    out.times.assign(d.times.begin() + 1, d.times.end());
    out.probs.assign(d.probs.begin() + 1, d.probs.end());
    double total = 0.0;
    for (double p : out.probs) total += p;
    require(total > 0.0, Errc::zero_denominator, "no probability mass beyond the first probe");
    for (double& p : out.probs) p /= total;
    return out;
}

void run_strobe(RunContext& ctx) {
    const auto& cfg = ctx.cfg;
    const System system = cfg.make_system(ctx.mode);
    const OutcomeBinning binning = cfg.make_binning(ctx.mode);
    WindowSpec window = cfg.window;
    if (cfg.refine) {
        const RefineResult rr = refine_window(window, system, binning, cfg.target_outcome,
                                              cfg.seed_for(2), cfg.probe_shots);
        if (rr.no_signal)
            ctx.warnings.push_back("window refinement saw no signal; keeping the configured window");
        window = rr.window;
        ctx.summary["refined_window"] = {
            {"t0", window.t0}, {"T", window.T}, {"M", window.M}, {"no_signal", rr.no_signal}};
    }

    const CountsMatrix counts = build_counts_matrix(
        system, binning, window.t0, window.T, window.M, cfg.shots, cfg.seed_for(1),
        static_cast<unsigned>(ctx.workers));
    const std::vector<TimeDistribution> rows = row_normalize(counts);
    note_undefined(ctx, rows);
    require(cfg.target_outcome < rows.size(), Errc::config_error, "target.outcome out of range");

    // The clock reference is as undefined as the sampled row when the target
    // outcome carries no occupation anywhere in the window; degrade to a
    // warning instead of failing the whole run.
    std::optional<ClockDistribution> clock;
    try {
        clock = clock_distribution(system, binning, window, cfg.target_outcome, cfg.clock_nodes);
    } catch (const Error& e) {
        if (e.code() != Errc::zero_denominator) throw;
        ctx.warnings.push_back("clock reference for outcome " +
                               std::to_string(cfg.target_outcome) +
                               " is UNDEFINED: " + e.what());
        ctx.exit_code = std::max(ctx.exit_code, 2);
    }

    std::vector<TimeDistribution> dists = rows;
    svg::Panel panel;
    panel.title = std::string(mode_name(ctx.mode)) + ": outcome " +
                  std::to_string(cfg.target_outcome) + " arrival time";
    panel.x_label = "t";
    panel.y_label = "probability";
    const TimeDistribution& target = rows[cfg.target_outcome];
    if (target.status == DistStatus::defined)
        panel.series.push_back(bars_from(target, "stroboscopic"));
    if (clock) {
        const TimeDistribution clock_disc = discretize_clock(*clock, window.M);
        dists.push_back(clock_disc);
        ctx.files["clock.csv"] = csv::clock_csv(*clock);
        if (target.status == DistStatus::defined)
            ctx.summary["tv_strobe_clock"] = tv_distance(target, clock_disc);
        panel.series.push_back(line_from(clock_disc, "clock"));
    }
    ctx.files["counts.csv"] = csv::counts_csv(counts);
    ctx.files["dist.csv"] = csv::dist_csv(dists);
    if (!panel.series.empty()) ctx.panels.push_back(panel);
}

void run_clock(RunContext& ctx) {
    const auto& cfg = ctx.cfg;
    const System system = cfg.make_system(ctx.mode);
    const OutcomeBinning binning = cfg.make_binning(ctx.mode);
    const ClockDistribution clock =
        clock_distribution(system, binning, cfg.window, cfg.target_outcome, cfg.clock_nodes);
    const TimeDistribution disc = discretize_clock(clock, cfg.window.M);

    ctx.files["clock.csv"] = csv::clock_csv(clock);
    ctx.files["dist.csv"] = csv::dist_csv({disc});
    ctx.summary["normalization"] = clock.normalization;

    svg::Panel panel;
    panel.title = "clock reference density";
    panel.x_label = "t";
    panel.y_label = "density";
    svg::Series curve;
    curve.label = "clock";
    curve.x = clock.times;
    curve.y = clock.density;
    panel.series.push_back(curve);
    ctx.panels.push_back(panel);
}

void run_flow(RunContext& ctx) {
    const auto& cfg = ctx.cfg;
    const System system = cfg.make_system(ctx.mode);
    const OutcomeBinning binning = cfg.make_binning(ctx.mode);
    const WindowSpec window = cfg.window;

    const CountsMatrix counts = build_counts_matrix(
        system, binning, window.t0, window.T, window.M, cfg.shots, cfg.seed_for(1),
        static_cast<unsigned>(ctx.workers));
    const TimeDistribution est = flow_estimate(counts, binning, cfg.flow_threshold);

    std::vector<double> times(cfg.flow_samples);
    for (std::size_t j = 0; j < times.size(); ++j)
        times[j] = window.t0 +
                   window.T * static_cast<double>(j) / static_cast<double>(times.size() - 1);
    const DensitySeries series = make_density_series(system, times);
    const TimeDistribution dense = flow_distribution(series, cfg.flow_threshold, window);
    TimeDistribution ref = discretize_flow(dense, window);
    ref.kind = DistKind::clock_reference;

    ctx.files["counts.csv"] = csv::counts_csv(counts);
    ctx.files["dist.csv"] = csv::dist_csv({est, ref});
    const double dt = window.T / static_cast<double>(cfg.flow_samples - 1);
    std::vector<double> density(dense.probs.size());
    for (std::size_t j = 0; j < density.size(); ++j) density[j] = dense.probs[j] / dt;
    ctx.files["clock.csv"] = csv::curve_csv(-1, dense.times, density);

    ctx.summary["tv_flow_exact"] = tv_distance(est, ref);

    svg::Panel panel;
    panel.title = "arrival flow at x = " + csv::format_double(cfg.flow_threshold);
    panel.x_label = "t";
    panel.y_label = "probability";
    panel.series.push_back(bars_from(est, "sampled"));
    panel.series.push_back(line_from(ref, "exact"));
    ctx.panels.push_back(panel);
}

void run_zeno(RunContext& ctx) {
    const auto& cfg = ctx.cfg;
    const System system = cfg.make_system(ctx.mode);
    const auto& sys = std::get<FreeGaussianSystem>(system);
    const Region region = Region::interval(cfg.zeno_lo, cfg.zeno_hi);

    std::vector<csv::ZenoRow> rows;
    nlohmann::json table = nlohmann::json::array();
    for (std::uint64_t m : cfg.zeno_sweep) {
        const double survival =
            survival_probability_zeno(sys, region, cfg.zeno_T, static_cast<std::size_t>(m));
        rows.push_back({m, cfg.zeno_T / static_cast<double>(m), survival});
        table.push_back({{"M", m}, {"survival", survival}});
    }
    SystemEvolver evolver(system);
    const double free_exit = 1.0 - region_probability(evolver.state_at(cfg.zeno_T), region);

    ctx.files["zeno.csv"] = csv::zeno_csv(rows);
    ctx.summary["survival"] = table;
    ctx.summary["free_exit_probability"] = free_exit;

    svg::Panel panel;
    panel.title = "survival under repeated projection";
    panel.x_label = "log10 M";
    panel.y_label = "survival";
    svg::Series s;
    s.label = "survival";
    for (const auto& r : rows) {
        s.x.push_back(std::log10(static_cast<double>(r.M)));
        s.y.push_back(r.survival);
    }
    panel.series.push_back(s);
    ctx.panels.push_back(panel);
}

OccupancyProfile make_click_profile(const ExperimentConfig& cfg, Mode mode) {
    if (mode != Mode::compare && cfg.click_profile == ExperimentConfig::ClickProfile::rectangular)
        return OccupancyProfile::rectangular(cfg.click_t_start, cfg.click_duration);
    require(cfg.bin_mode == ExperimentConfig::BinMode::window, Errc::config_error,
            "wavepacket click profile needs binning.mode = window");
    const Region region =
        Region::interval(cfg.detector_x - cfg.halfwidth, cfg.detector_x + cfg.halfwidth);
    return OccupancyProfile::from_wavefunction(cfg.make_system(Mode::clicks), region);
}

void run_clicks(RunContext& ctx) {
    const auto& cfg = ctx.cfg;
    const double kappa = cfg.effective_kappa();
    require(std::isfinite(kappa), Errc::config_error, "clicks need a finite kappa");
    const OccupancyProfile profile = make_click_profile(cfg, ctx.mode);
    const std::vector<ClickStream> streams =
        click_ensemble(profile, kappa, cfg.window, cfg.click_runs, cfg.seed_for(4), ctx.workers);
    ctx.files["clicks.csv"] = csv::clicks_csv(streams);

    std::vector<double> counts;
    counts.reserve(streams.size());
    for (const auto& s : streams) counts.push_back(static_cast<double>(s.clicks.size()));
    ctx.summary["mean_clicks_per_run"] = sample_mean(counts);
    if (counts.size() >= 2) ctx.summary["var_clicks_per_run"] = sample_variance(counts);

    try {
        const TimeDistribution hist = click_histogram(streams, cfg.window.M);
        ctx.files["dist.csv"] = csv::dist_csv({hist});

        svg::Panel panel;
        panel.title = "click histogram, kappa = " + csv::format_double(kappa);
        panel.x_label = "t";
        panel.y_label = "probability";
        panel.series.push_back(bars_from(hist, "clicks"));
        std::vector<double> beta(hist.times.size());
        double total = 0.0;
        for (std::size_t m = 0; m < beta.size(); ++m) {
            beta[m] = profile(hist.times[m]);
            total += beta[m];
        }
        if (total > 0.0) {
            svg::Series overlay;
            overlay.label = "occupancy";
            overlay.x = hist.times;
            for (double b : beta) overlay.y.push_back(b / total);
            panel.series.push_back(overlay);
        }
        ctx.panels.push_back(panel);
    } catch (const Error& e) {
        if (e.code() != Errc::no_clicks) throw;
        ctx.warnings.push_back("no clicks recorded in any run; histogram skipped");
        ctx.exit_code = std::max(ctx.exit_code, 2);
    }
}

MomentState closed_form_state(const MomentState& init, double kappa, double t,
                              const PhysicalConstants& consts) {
    MomentState s;
    s.mean_x = init.mean_x + init.mean_p * t / consts.mass;
    s.mean_p = init.mean_p;
    const double var_x = variance_closed_form_x(init, kappa, t, consts);
    const double var_p = variance_closed_form_p(init, kappa, t, consts);
    s.x2 = var_x + s.mean_x * s.mean_x;
    s.p2 = var_p + s.mean_p * s.mean_p;
    const double diffused =
        std::isinf(kappa) ? 0.0 : consts.hbar * consts.hbar * t * t / (2.0 * kappa);
    s.xp_sym = init.xp_sym + (2.0 * init.p2 * t + diffused) / consts.mass;
    return s;
}

void run_continuous(RunContext& ctx) {
    const auto& cfg = ctx.cfg;
    const double kappa = cfg.effective_kappa();
    const MomentState init = MomentState::from_packet(cfg.packet, cfg.consts);
    const double T = cfg.ensemble_T;

    const std::vector<MomentSample> ode =
        moment_ode_evolve(init, kappa, T, T / static_cast<double>(cfg.ode_steps), cfg.consts);
    std::vector<csv::MomentBlock> blocks;
    csv::MomentBlock closed{"closed", {}};
    double dev_x = 0.0;
    double dev_p = 0.0;
    for (const auto& s : ode) {
        MomentSample c{s.t, closed_form_state(init, kappa, s.t, cfg.consts)};
        dev_x = std::max(dev_x, std::abs(s.state.var_x() - c.state.var_x()) /
                                    std::max(c.state.var_x(), 1e-12));
        dev_p = std::max(dev_p, std::abs(s.state.var_p() - c.state.var_p()) /
                                    std::max(c.state.var_p(), 1e-12));
        closed.samples.push_back(c);
    }
    blocks.push_back(csv::MomentBlock{"ode", ode});
    blocks.push_back(std::move(closed));
    ctx.summary["ode_vs_closed_max_rel_var_x"] = dev_x;
    ctx.summary["ode_vs_closed_max_rel_var_p"] = dev_p;

    const System system = cfg.make_system(ctx.mode);
    const auto& sys = std::get<FreeGaussianSystem>(system);
    const std::vector<Trajectory> ensemble = fuzzy_ensemble(
        sys, cfg.pointer, T, cfg.trajectories, cfg.seed_for(3), static_cast<unsigned>(ctx.workers));

    csv::MomentBlock ens{"ensemble", {}};
    const double nan = std::numeric_limits<double>::quiet_NaN();
    if (!ensemble.empty() && !ensemble.front().times.empty()) {
        const std::size_t steps = ensemble.front().times.size();
        for (std::size_t i = 0; i < steps; ++i) {
            std::vector<double> readouts;
            readouts.reserve(ensemble.size());
            for (const auto& traj : ensemble) readouts.push_back(traj.readouts[i]);
            const double mean = sample_mean(readouts);
            const double var = readouts.size() >= 2 ? sample_variance(readouts) : nan;
            MomentState st;
            st.mean_x = mean;
            st.mean_p = nan;
            st.x2 = var + mean * mean;
            st.p2 = nan;
            st.xp_sym = nan;
            ens.samples.push_back(MomentSample{ensemble.front().times[i], st});
        }
    }
    if (!ens.samples.empty()) {
        const auto& last = ens.samples.back();
        const double theory =
            variance_closed_form_x(init, cfg.pointer.kappa(), last.t, cfg.consts) +
            0.5 * cfg.pointer.sigma;
        ctx.summary["readout_variance_final"] = last.state.var_x();
        ctx.summary["readout_variance_theory"] = theory;
    }

    if (cfg.lindblad_steps > 0) {
        const WaveFunction psi0 = gaussian_to_wavefunction(cfg.packet, cfg.grid, cfg.consts);
        DensityMatrix dm = DensityMatrix::from_wavefunction(psi0);
        csv::MomentBlock lind{"lindblad", {}};
        lind.samples.push_back(MomentSample{0.0, density_matrix_moments(dm, cfg.consts)});
        const double dt = T / static_cast<double>(cfg.lindblad_steps);
        const std::size_t y_samples = std::min<std::size_t>(8, cfg.lindblad_steps);
        std::size_t done = 0;
        double max_dev = 0.0;
        for (std::size_t k = 1; k <= y_samples; ++k) {
            const std::size_t upto = cfg.lindblad_steps * k / y_samples;
            dm = lindblad_dense_evolve(dm, kappa, dt, upto - done, cfg.consts);
            done = upto;
            const double t = dt * static_cast<double>(done);
            const MomentState st = density_matrix_moments(dm, cfg.consts);
            lind.samples.push_back(MomentSample{t, st});
            const double closed_var = variance_closed_form_x(init, kappa, t, cfg.consts);
            max_dev = std::max(max_dev, std::abs(st.var_x() - closed_var) / closed_var);
        }
        ctx.summary["lindblad_vs_closed_max_rel_var_x"] = max_dev;
        blocks.push_back(std::move(lind));
    }
    blocks.push_back(std::move(ens));

    ctx.files["moments.csv"] = csv::moments_csv(blocks);
    std::vector<Trajectory> kept(
        ensemble.begin(),
        ensemble.begin() + static_cast<std::ptrdiff_t>(
                               std::min<std::uint64_t>(cfg.keep_trajectories, ensemble.size())));
    ctx.files["trajectories.csv"] = csv::trajectories_csv(kept);

    svg::Panel var_panel;
    var_panel.title = "position variance, kappa = " + csv::format_double(kappa);
    var_panel.x_label = "t";
    var_panel.y_label = "var";
    for (const auto& block : blocks) {
        svg::Series s;
        s.label = block.source == "ensemble" ? "readout var" : block.source + " var_x";
        for (const auto& sample : block.samples) {
            s.x.push_back(sample.t);
            s.y.push_back(sample.state.var_x());
        }
        var_panel.series.push_back(s);
    }
    ctx.panels.push_back(var_panel);

    svg::Panel mean_panel;
    mean_panel.title = "mean position";
    mean_panel.x_label = "t";
    mean_panel.y_label = "mean";
    for (const auto& block : blocks) {
        if (block.source == "closed") continue;
        svg::Series s;
        s.label = block.source;
        for (const auto& sample : block.samples) {
            s.x.push_back(sample.t);
            s.y.push_back(sample.state.mean_x);
        }
        mean_panel.series.push_back(s);
    }
    ctx.panels.push_back(mean_panel);
}

void run_compare(RunContext& ctx) {
    const auto& cfg = ctx.cfg;
    const System system = cfg.make_system(ctx.mode);
    const WindowSpec window = cfg.window;

    // Head-to-head on the same packet: sampled stroboscope, exact clock,
    // sampled flow, click histogram.
    const OutcomeBinning window_bins = cfg.make_binning(ctx.mode);
    const CountsMatrix counts = build_counts_matrix(
        system, window_bins, window.t0, window.T, window.M, cfg.shots, cfg.seed_for(1),
        static_cast<unsigned>(ctx.workers));
    const std::vector<TimeDistribution> rows = row_normalize(counts);
    note_undefined(ctx, rows);
    require(cfg.target_outcome < rows.size(), Errc::config_error, "target.outcome out of range");
    const TimeDistribution& strobe_row = rows[cfg.target_outcome];

    const ClockDistribution clock =
        clock_distribution(system, window_bins, window, cfg.target_outcome, cfg.clock_nodes);
    const TimeDistribution clock_disc = discretize_clock(clock, window.M);

    const OutcomeBinning flow_bins = cfg.make_binning(Mode::flow);
    const CountsMatrix flow_counts = build_counts_matrix(
        system, flow_bins, window.t0, window.T, window.M, cfg.shots, cfg.seed_for(5),
        static_cast<unsigned>(ctx.workers));
    const TimeDistribution flow_est = flow_estimate(flow_counts, flow_bins, cfg.flow_threshold);

    std::vector<double> dense_times(cfg.flow_samples);
    for (std::size_t j = 0; j < dense_times.size(); ++j)
        dense_times[j] = window.t0 + window.T * static_cast<double>(j) /
                                         static_cast<double>(dense_times.size() - 1);
    const TimeDistribution flow_ref = discretize_flow(
        flow_distribution(make_density_series(system, dense_times), cfg.flow_threshold, window),
        window);

    const OccupancyProfile profile = make_click_profile(cfg, ctx.mode);
    const double kappa = cfg.effective_kappa();
    require(std::isfinite(kappa), Errc::config_error, "clicks need a finite kappa");
    const std::vector<ClickStream> streams =
        click_ensemble(profile, kappa, window, cfg.click_runs, cfg.seed_for(4), ctx.workers);

    std::vector<TimeDistribution> dists = {strobe_row, clock_disc, flow_est};
    TimeDistribution click_hist;
    bool have_clicks = false;
    try {
        click_hist = click_histogram(streams, window.M);
        dists.push_back(click_hist);
        have_clicks = true;
    } catch (const Error& e) {
        if (e.code() != Errc::no_clicks) throw;
        ctx.warnings.push_back("no clicks recorded in any run; click comparison skipped");
        ctx.exit_code = std::max(ctx.exit_code, 2);
    }

    ctx.files["counts.csv"] = csv::counts_csv(counts);
    ctx.files["dist.csv"] = csv::dist_csv(dists);
    ctx.files["clock.csv"] = csv::clock_csv(clock);
    ctx.files["clicks.csv"] = csv::clicks_csv(streams);

    nlohmann::json tv = nlohmann::json::object();
    const bool strobe_ok = strobe_row.status == DistStatus::defined;
    if (strobe_ok) {
        tv["strobe_clock"] = tv_distance(strobe_row, clock_disc);
        tv["strobe_flow"] = tv_distance(drop_first(strobe_row), flow_est);
        if (have_clicks) tv["strobe_click"] = tv_distance(strobe_row, click_hist);
    }
    tv["clock_flow"] = tv_distance(drop_first(clock_disc), flow_est);
    if (have_clicks) tv["clock_click"] = tv_distance(clock_disc, click_hist);
    tv["flow_exact"] = tv_distance(flow_est, flow_ref);
    ctx.summary["tv"] = tv;

    // Error scaling against the clock reference.
    nlohmann::json vs_L = nlohmann::json::array();
    for (std::size_t i = 0; i < cfg.compare_L.size(); ++i) {
        const std::uint64_t L = cfg.compare_L[i];
        const CountsMatrix c = build_counts_matrix(
            system, window_bins, window.t0, window.T, window.M, L, cfg.seed_for(100 + i),
            static_cast<unsigned>(ctx.workers));
        const TimeDistribution row = row_normalize(c)[cfg.target_outcome];
        if (row.status != DistStatus::defined) continue;
        vs_L.push_back({{"L", L}, {"tv", tv_distance(row, clock_disc)}});
    }
    nlohmann::json vs_M = nlohmann::json::array();
    for (std::size_t i = 0; i < cfg.compare_M.size(); ++i) {
        const std::size_t M = static_cast<std::size_t>(cfg.compare_M[i]);
        WindowSpec w = window;
        w.M = M;
        const TimeDistribution ref = discretize_clock(clock, M);
        const CountsMatrix c =
            build_counts_matrix(system, window_bins, w.t0, w.T, w.M, cfg.shots,
                                cfg.seed_for(200 + i), static_cast<unsigned>(ctx.workers));
        const TimeDistribution row = row_normalize(c)[cfg.target_outcome];
        if (row.status != DistStatus::defined) continue;
        vs_M.push_back({{"M", M}, {"tv", tv_distance(row, ref)}});
    }
    ctx.summary["scaling"] = {{"vs_L", vs_L}, {"vs_M", vs_M}};

    svg::Panel strobe_panel;
    strobe_panel.title = "stroboscopic vs clock";
    strobe_panel.x_label = "t";
    strobe_panel.y_label = "probability";
    if (strobe_ok) strobe_panel.series.push_back(bars_from(strobe_row, "stroboscopic"));
    strobe_panel.series.push_back(line_from(clock_disc, "clock"));
    ctx.panels.push_back(strobe_panel);

    svg::Panel clock_panel;
    clock_panel.title = "clock reference density";
    clock_panel.x_label = "t";
    clock_panel.y_label = "density";
    svg::Series curve;
    curve.label = "clock";
    curve.x = clock.times;
    curve.y = clock.density;
    clock_panel.series.push_back(curve);
    ctx.panels.push_back(clock_panel);

    svg::Panel flow_panel;
    flow_panel.title = "flow vs exact flow";
    flow_panel.x_label = "t";
    flow_panel.y_label = "probability";
    flow_panel.series.push_back(bars_from(flow_est, "sampled"));
    flow_panel.series.push_back(line_from(flow_ref, "exact"));
    ctx.panels.push_back(flow_panel);

    if (have_clicks) {
        svg::Panel click_panel;
        click_panel.title = "click histogram";
        click_panel.x_label = "t";
        click_panel.y_label = "probability";
        click_panel.series.push_back(bars_from(click_hist, "clicks"));
        click_panel.series.push_back(line_from(clock_disc, "clock"));
        ctx.panels.push_back(click_panel);
    }

    svg::Panel scaling_panel;
    scaling_panel.title = "TV error scaling";
    scaling_panel.x_label = "log10 L | log10 M";
    scaling_panel.y_label = "TV";
    svg::Series sl;
    sl.label = "vs L";
    for (const auto& e : vs_L) {
        sl.x.push_back(std::log10(e["L"].get<double>()));
        sl.y.push_back(e["tv"].get<double>());
    }
    scaling_panel.series.push_back(sl);
    svg::Series sm;
    sm.label = "vs M";
    for (const auto& e : vs_M) {
        sm.x.push_back(std::log10(e["M"].get<double>()));
        sm.y.push_back(e["tv"].get<double>());
    }
    scaling_panel.series.push_back(sm);
    ctx.panels.push_back(scaling_panel);
}

}  // namespace

RunManifest run_experiment(const ExperimentConfig& config, Mode mode, const RunOptions& options) {
    const auto t_begin = std::chrono::steady_clock::now();

    ExperimentConfig cfg = config;
    if (options.seed) cfg.seed = *options.seed;
    if (options.out_dir) cfg.output_dir = *options.out_dir;

    RunManifest man;
    man.mode = mode_name(mode);
    man.seed = cfg.seed;
    man.workers = std::max<std::size_t>(1, options.workers);
    man.config = cfg.to_map();

    RunContext ctx{cfg, mode, man.workers};
    switch (mode) {
        case Mode::strobe:
        case Mode::rabi: run_strobe(ctx); break;
        case Mode::clock: run_clock(ctx); break;
        case Mode::flow: run_flow(ctx); break;
        case Mode::zeno: run_zeno(ctx); break;
        case Mode::continuous: run_continuous(ctx); break;
        case Mode::clicks: run_clicks(ctx); break;
        case Mode::compare: run_compare(ctx); break;
    }
    man.warnings = ctx.warnings;
    man.summary = ctx.summary;
    man.exit_code = ctx.exit_code;

    namespace fs = std::filesystem;
    fs::create_directories(cfg.output_dir);
    const bool with_csv = options.format == OutputFormat::csv || options.format == OutputFormat::all;
    const bool with_svg = options.format == OutputFormat::svg || options.format == OutputFormat::all;
    if (with_csv)
        for (const auto& [name, content] : ctx.files) {
            csv::write_text_file((fs::path(cfg.output_dir) / name).string(), content);
            man.file_sha256[name] = sha256_hex(content);
        }
    if (with_svg && !ctx.panels.empty()) {
        const std::string image = svg::render(ctx.panels);
        csv::write_text_file((fs::path(cfg.output_dir) / "summary.svg").string(), image);
        man.file_sha256["summary.svg"] = sha256_hex(image);
    }

    man.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_begin).count();
    csv::write_text_file((fs::path(cfg.output_dir) / "manifest.json").string(),
                         manifest_json(man));
    return man;
}

}  // namespace strobe

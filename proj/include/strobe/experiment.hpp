#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "strobe/config.hpp"
#include "strobe/continuous.hpp"
#include "strobe/dynamics.hpp"
#include "strobe/rng.hpp"
#include "strobe/sampler.hpp"
#include "strobe/stroboscope.hpp"

namespace strobe {

inline constexpr const char* kVersion = "0.1.0";

enum class Mode { strobe, clock, flow, zeno, continuous, clicks, rabi, compare };

Mode parse_mode(const std::string& name);
const char* mode_name(Mode mode);

enum class OutputFormat { csv, json, svg, all };

OutputFormat parse_format(const std::string& name);

// Everything an experiment run needs, resolved from a config file with
// defaults. to_map() round-trips: feeding the emitted pairs back through a
// config file reproduces the run.
struct ExperimentConfig {
    enum class BinMode { uniform, window };
    enum class ClickProfile { rectangular, wavepacket };

    PhysicalConstants consts;
    GaussianPacket packet{/*x0=*/-5.0, /*p0=*/1.0, /*var_x0=*/1.0, /*cov0=*/0.0};
    RabiSpec rabi;
    // Wide enough that the default packet stays clear of the boundary over
    // the default ten-unit window.
    GridSpec grid{2048, -64.0, 64.0};

    BinMode bin_mode = BinMode::window;
    std::size_t bins = 64;
    std::vector<double> edges;  // optional explicit bin edges
    double detector_x = 0.0;
    double halfwidth = 0.5;

    WindowSpec window{0.0, 10.0, 32};
    std::uint64_t shots = 10000;
    PointerSpec pointer;
    double kappa_override = std::numeric_limits<double>::quiet_NaN();
    std::uint64_t seed = 1;
    std::string output_dir = "out";
    std::size_t target_outcome = 0;

    double flow_threshold = 0.0;
    std::size_t flow_samples = 801;

    double zeno_lo = -10.0;
    double zeno_hi = 10.0;
    double zeno_T = 1.0;
    std::vector<std::uint64_t> zeno_sweep{1, 10, 100, 1000};

    ClickProfile click_profile = ClickProfile::rectangular;
    double click_t_start = 0.0;
    double click_duration = 10.0;
    std::uint64_t click_runs = 10000;

    std::uint64_t trajectories = 2000;
    std::uint64_t keep_trajectories = 16;
    // Continuous-measurement horizon; separate from window.T because the
    // conditional mean diffuses far beyond the free packet at long times.
    double ensemble_T = 2.0;
    std::size_t ode_steps = 1000;
    std::size_t lindblad_steps = 0;  // 0 disables the dense reference run
    std::size_t clock_nodes = 1025;

    bool refine = false;
    std::uint64_t probe_shots = 32;

    std::vector<std::uint64_t> compare_L{1000, 10000};
    std::vector<std::uint64_t> compare_M{16, 32, 64};

    static ExperimentConfig from_config(const Config& cfg);

    // Effective continuous-coupling constant: explicit kappa wins, otherwise
    // pointer.sigma * pointer.tau.
    double effective_kappa() const;

    System make_system(Mode mode) const;
    OutcomeBinning make_binning(Mode mode) const;
    SeedSpec seed_for(std::uint64_t purpose) const { return SeedSpec{seed, purpose}; }

    std::map<std::string, std::string> to_map() const;
};

// One line per config key: key, default, meaning.
std::string config_reference();

struct RunOptions {
    std::optional<std::uint64_t> seed;     // overrides config seed
    std::optional<std::string> out_dir;    // overrides config output_dir
    std::size_t workers = 1;
    OutputFormat format = OutputFormat::all;
};

struct RunManifest {
    std::string mode;
    std::string version = kVersion;
    std::uint64_t seed = 0;
    std::size_t workers = 1;
    std::map<std::string, std::string> config;
    std::map<std::string, std::string> file_sha256;
    std::vector<std::string> warnings;
    nlohmann::json summary = nlohmann::json::object();
    double wall_clock_seconds = 0.0;
    int exit_code = 0;
};

std::string manifest_json(const RunManifest& manifest);

// Runs one mode end to end: computes, writes the requested artifact formats
// plus manifest.json into the output directory, and returns the manifest.
RunManifest run_experiment(const ExperimentConfig& config, Mode mode, const RunOptions& options);

std::string sha256_hex(const std::string& bytes);

}  // namespace strobe

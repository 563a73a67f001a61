#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "strobe/config.hpp"
#include "strobe/errors.hpp"
#include "strobe/experiment.hpp"

namespace {

constexpr const char* kModeHelp[][2] = {
    {"strobe", "sample a counts matrix and row-normalise arrival-time distributions"},
    {"clock", "exact clock reference density over the window"},
    {"flow", "cumulative-probability flow estimate vs the exact flow curve"},
    {"zeno", "survival probability under repeated projective checks"},
    {"continuous", "fuzzy-pointer trajectories, moment equations and closed forms"},
    {"clicks", "inhomogeneous Poisson photodetection records"},
    {"rabi", "driven two-level system stroboscopy against its clock density"},
    {"compare", "head-to-head: stroboscope, clock, flow and clicks on one packet"},
};

}  // namespace

int main(int argc, char** argv) {
    for (int i = 1; i < argc; ++i)
        if (std::string(argv[i]) == "--print-config-reference") {
            std::cout << strobe::config_reference();
            return 0;
        }

    CLI::App app{"quantum stroboscopy simulator"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::size_t workers = 1;
    std::string format = "all";

    for (const auto& [name, help] : kModeHelp) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--config", config_path, "experiment config file")
            ->required()
            ->check(CLI::ExistingFile);
        sub->add_option("--seed", seed, "override the config seed");
        sub->add_option("--out", out_dir, "override the config output directory");
        sub->add_option("--workers", workers, "worker threads")->envname("STROBE_WORKERS");
        sub->add_option("--format", format, "artifacts to write")
            ->check(CLI::IsMember({"csv", "json", "svg", "all"}));
    }
    app.footer("Run with --print-config-reference for the full key listing.");

    CLI11_PARSE(app, argc, argv);

    try {
        const strobe::Config raw = strobe::Config::from_file(config_path);
        const strobe::ExperimentConfig cfg = strobe::ExperimentConfig::from_config(raw);
        raw.finish();

        strobe::RunOptions options;
        options.seed = seed;
        options.out_dir = out_dir;
        options.workers = workers;
        options.format = strobe::parse_format(format);

        const std::string mode = app.get_subcommands().front()->get_name();
        const strobe::RunManifest manifest =
            strobe::run_experiment(cfg, strobe::parse_mode(mode), options);

        for (const auto& w : manifest.warnings) std::cerr << "warning: " << w << "\n";
        const std::string dir = out_dir.value_or(cfg.output_dir);
        std::cout << mode << ": " << manifest.file_sha256.size() << " artifact(s) in " << dir
                  << "\n";
        return manifest.exit_code;
    } catch (const strobe::Error& e) {
        std::cerr << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

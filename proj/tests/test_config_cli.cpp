#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <variant>

#include "doctest.h"
#include "json.hpp"
#include "strobe/csv.hpp"
#include "strobe/experiment.hpp"
#include "strobe/svg.hpp"

using namespace strobe;
namespace fs = std::filesystem;

namespace {

// Scratch directory removed at scope exit.
struct TempDir {
    fs::path path;
    TempDir() {
        static std::mt19937_64 gen{std::random_device{}()};
        path = fs::temp_directory_path() / ("strobe_test_" + std::to_string(gen()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    REQUIRE(f.good());
    std::ostringstream buf;
    buf << f.rdbuf();
    return buf.str();
}

void spit(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    f << text;
    REQUIRE(f.good());
}

int run_cli(const std::string& args, const std::string& capture_path, std::string* output) {
    const std::string cmd = std::string(STROBE_CLI_PATH) + " " + args + " >" + capture_path +
                            " 2>&1";
    const int status = std::system(cmd.c_str());
    if (output) *output = slurp(capture_path);
    REQUIRE(WIFEXITED(status));
    return WEXITSTATUS(status);
}

const char* kTinyStrobe =
    "packet.x0 = -5\n"
    "packet.p0 = 1\n"
    "grid.n = 512\n"
    "grid.x_min = -64\n"
    "grid.x_max = 64\n"
    "binning.detector_x = 0\n"
    "binning.halfwidth = 0.5\n"
    "window.T = 10\n"
    "window.M = 6\n"
    "shots.L = 200\n"
    "clock.nodes = 129\n"
    "seed = 11\n";

}  // namespace

TEST_CASE("config files are key = value with comments and strict keys") {
    const Config cfg = Config::from_text(
        "# leading comment\n"
        "\n"
        "  window.T = 10  \r\n"
        "shots.L=500\n"
        "label = drifting packet\n"
        "flag = true\n"
        "sweep = 1,2, 3\n",
        "inline");
    CHECK(cfg.get_double("window.T", 0.0) == 10.0);
    CHECK(cfg.get_u64("shots.L", 0) == 500);
    CHECK(cfg.get_string("label", "") == "drifting packet");
    CHECK(cfg.get_bool("flag", false));
    CHECK(cfg.get_u64_list("sweep", {}) == std::vector<std::uint64_t>{1, 2, 3});
    CHECK(cfg.get_double("missing", 7.5) == 7.5);
    CHECK_NOTHROW(cfg.finish());

    CHECK_THROWS_AS(Config::from_text("window.T\n", "x"), Error);
    CHECK_THROWS_AS(Config::from_text("a = 1\na = 2\n", "x"), Error);
    CHECK_THROWS_AS(Config::from_text("bad key = 1\n", "x"), Error);
    CHECK_THROWS_AS(Config::from_text(".dotted = 1\n", "x"), Error);
    CHECK_THROWS_AS(Config::from_file("/nonexistent/strobe.cfg"), Error);
}

TEST_CASE("typed getters reject malformed values") {
    const Config cfg = Config::from_text(
        "d = not_a_number\nu = -3\nb = maybe\nl = 1,,2\ne =\n", "inline");
    CHECK_THROWS_AS(cfg.get_double("d", 0.0), Error);
    CHECK_THROWS_AS(cfg.get_u64("u", 0), Error);
    CHECK_THROWS_AS(cfg.get_bool("b", false), Error);
    CHECK_THROWS_AS(cfg.get_u64_list("l", {}), Error);
    CHECK_THROWS_AS(cfg.get_double("e", 0.0), Error);
}

TEST_CASE("unused keys are reported when parsing finishes") {
    const Config cfg = Config::from_text("known = 1\ntypo.key = 2\n", "inline");
    CHECK(cfg.get_u64("known", 0) == 1);
    CHECK_THROWS_WITH_AS(cfg.finish(), doctest::Contains("typo.key"), Error);
}

TEST_CASE("experiment config defaults and overrides") {
    const ExperimentConfig dflt = ExperimentConfig::from_config(Config::from_text("", "empty"));
    CHECK(dflt.packet.x0 == -5.0);
    CHECK(dflt.packet.p0 == 1.0);
    CHECK(dflt.grid.n_points == 2048);
    CHECK(dflt.window.T == 10.0);
    CHECK(dflt.window.M == 32);
    CHECK(dflt.shots == 10000);
    CHECK(dflt.seed == 1);
    CHECK(dflt.effective_kappa() == doctest::Approx(0.1));

    const ExperimentConfig c = ExperimentConfig::from_config(Config::from_text(
        "kappa = 0.5\npacket.cov0 = 0.3\nbinning.mode = uniform\nbinning.bins = 16\n"
        "zeno.sweep = 2,4\n",
        "inline"));
    CHECK(c.effective_kappa() == 0.5);
    CHECK(c.packet.cov0 == 0.3);
    CHECK(c.bins == 16);
    CHECK(c.zeno_sweep == std::vector<std::uint64_t>{2, 4});

    const ExperimentConfig inf_kappa =
        ExperimentConfig::from_config(Config::from_text("kappa = inf\n", "inline"));
    CHECK(std::isinf(inf_kappa.effective_kappa()));

    CHECK_THROWS_AS(ExperimentConfig::from_config(Config::from_text("shots.L = 0\n", "x")), Error);
    CHECK_THROWS_AS(ExperimentConfig::from_config(Config::from_text("kappa = -1\n", "x")), Error);
    CHECK_THROWS_AS(ExperimentConfig::from_config(Config::from_text("flow.samples = 2\n", "x")),
                    Error);
    CHECK_THROWS_AS(
        ExperimentConfig::from_config(Config::from_text("binning.mode = fuzzy\n", "x")), Error);
    CHECK_THROWS_AS(
        ExperimentConfig::from_config(Config::from_text("zeno.lo = 3\nzeno.hi = -3\n", "x")),
        Error);
}

TEST_CASE("emitted key-value map reproduces the configuration") {
    ExperimentConfig c;
    c.packet.p0 = 2.25;
    c.kappa_override = 0.75;
    c.edges = {-4.0, 0.0, 4.0};
    c.zeno_sweep = {1, 10};
    c.refine = true;

    std::string text;
    for (const auto& [k, v] : c.to_map()) text += k + " = " + v + "\n";
    const ExperimentConfig back = ExperimentConfig::from_config(Config::from_text(text, "rt"));
    CHECK(back.to_map() == c.to_map());
}

TEST_CASE("the config reference documents every emitted key") {
    const std::string ref = config_reference();
    ExperimentConfig c;
    c.kappa_override = 1.0;
    c.edges = {-1.0, 1.0};
    for (const auto& [key, value] : c.to_map())
        CHECK_MESSAGE(ref.find(key + "\n") != std::string::npos, "missing key ", key);
    CHECK(ref.find("default: 10000") != std::string::npos);  // shots.L
}

TEST_CASE("mode and format names round-trip") {
    for (const char* name :
         {"strobe", "clock", "flow", "zeno", "continuous", "clicks", "rabi", "compare"})
        CHECK(std::string(mode_name(parse_mode(name))) == name);
    CHECK_THROWS_AS(parse_mode("warp"), Error);
    CHECK(parse_format("csv") == OutputFormat::csv);
    CHECK(parse_format("json") == OutputFormat::json);
    CHECK(parse_format("svg") == OutputFormat::svg);
    CHECK(parse_format("all") == OutputFormat::all);
    CHECK_THROWS_AS(parse_format("pdf"), Error);
}

TEST_CASE("systems and binnings are resolved per mode") {
    ExperimentConfig c;
    CHECK(std::holds_alternative<FreeGaussianSystem>(c.make_system(Mode::strobe)));
    CHECK(std::holds_alternative<RabiSystem>(c.make_system(Mode::rabi)));

    CHECK(c.make_binning(Mode::strobe).mode == BinningMode::detector_window);
    CHECK(c.make_binning(Mode::rabi).mode == BinningMode::two_level);

    const OutcomeBinning flow = c.make_binning(Mode::flow);
    CHECK(flow.mode == BinningMode::position_bins);
    CHECK(flow.bin_edges.size() == c.bins + 1);

    c.edges = {-64.0, 0.0, 64.0};
    c.bin_mode = ExperimentConfig::BinMode::uniform;
    const OutcomeBinning explicit_edges = c.make_binning(Mode::strobe);
    CHECK(explicit_edges.bin_edges == std::vector<double>{-64.0, 0.0, 64.0});
    CHECK_THROWS_AS(c.make_binning(Mode::compare), Error);
}

TEST_CASE("checksums match the published test vectors") {
    CHECK(sha256_hex("") ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("plot rendering is a pure function of its inputs") {
    svg::Panel panel;
    panel.title = "golden";
    panel.x_label = "t";
    panel.y_label = "p";
    svg::Series line;
    line.label = "line";
    line.x = {0.0, 1.0, 2.0, 3.0};
    line.y = {0.0, 0.5, 0.25, 1.0};
    svg::Series bars;
    bars.label = "bars";
    bars.bars = true;
    bars.x = {0.0, 1.0, 2.0, 3.0};
    bars.y = {0.1, 0.4, 0.2, 0.3};
    panel.series = {line, bars};

    const std::string image = svg::render({panel});
    CHECK(image.rfind("<?xml", 0) == 0);
    CHECK(image.find("</svg>") != std::string::npos);
    CHECK(svg::render({panel}) == image);
    CHECK(sha256_hex(image) ==
          "21ed8059f99830fcca985dde468f9933682f2be140aec19305e456d8c9c0b78a");
}

TEST_CASE("numbers are written in shortest round-trip form") {
    CHECK(csv::format_double(0.1) == "0.1");
    CHECK(csv::format_double(3.0) == "3");
    CHECK(csv::format_double(-0.5) == "-0.5");
    for (double v : {1.0 / 3.0, 2.5e-17, 6.02214076e23, -0.0})
        CHECK(std::strtod(csv::format_double(v).c_str(), nullptr) == v);
}

TEST_CASE("csv writers lay out counts and distributions") {
    CountsMatrix counts;
    counts.times = {0.0, 0.5};
    counts.counts = {{3, 1}, {1, 3}};
    CHECK(csv::counts_csv(counts) ==
          "m,t_m,n,count\n0,0,0,3\n0,0,1,1\n1,0.5,0,1\n1,0.5,1,3\n");

    TimeDistribution dead;
    dead.kind = DistKind::stroboscopic;
    dead.status = DistStatus::undefined;
    dead.outcome = 4;
    dead.times = {0.0, 0.5};
    const std::string text = csv::dist_csv({dead});
    CHECK(text.find("UNDEFINED") != std::string::npos);
    CHECK(text.rfind("kind,outcome_or_threshold,m,t_m,prob\n", 0) == 0);

    TempDir tmp;
    csv::write_text_file(tmp.file("t.csv"), text);
    CHECK(slurp(tmp.file("t.csv")) == text);
}

TEST_CASE("a run writes artifacts whose checksums land in the manifest") {
    TempDir tmp;
    const ExperimentConfig cfg =
        ExperimentConfig::from_config(Config::from_text(kTinyStrobe, "inline"));
    RunOptions opt;
    opt.out_dir = tmp.file("out");
    const RunManifest man = run_experiment(cfg, Mode::strobe, opt);

    CHECK(man.exit_code == 0);
    CHECK(man.mode == "strobe");
    CHECK(man.version == kVersion);
    CHECK(man.summary.contains("tv_strobe_clock"));
    for (const char* name : {"counts.csv", "dist.csv", "clock.csv", "summary.svg"}) {
        CAPTURE(name);
        REQUIRE(fs::exists(fs::path(*opt.out_dir) / name));
        CHECK(man.file_sha256.at(name) == sha256_hex(slurp(tmp.file("out/" + std::string(name)))));
    }

    const auto parsed = nlohmann::json::parse(slurp(tmp.file("out/manifest.json")));
    CHECK(parsed["mode"] == "strobe");
    CHECK(parsed["seed"] == 11);
    CHECK(parsed["exit_code"] == 0);
    CHECK(parsed["config"]["shots.L"] == "200");
    CHECK(parsed["wall_clock_seconds"].get<double>() > 0.0);
}

TEST_CASE("json format suppresses csv and svg artifacts") {
    TempDir tmp;
    const ExperimentConfig cfg =
        ExperimentConfig::from_config(Config::from_text(kTinyStrobe, "inline"));
    RunOptions opt;
    opt.out_dir = tmp.file("out");
    opt.format = OutputFormat::json;
    const RunManifest man = run_experiment(cfg, Mode::strobe, opt);
    CHECK(man.exit_code == 0);
    CHECK(fs::exists(tmp.file("out/manifest.json")));
    CHECK_FALSE(fs::exists(tmp.file("out/counts.csv")));
    CHECK_FALSE(fs::exists(tmp.file("out/summary.svg")));
}

TEST_CASE("outcomes that never fire mark their rows undefined and exit 2") {
    TempDir tmp;
    const ExperimentConfig cfg = ExperimentConfig::from_config(Config::from_text(
        "binning.mode = uniform\n"
        "binning.bins = 32\n"
        "grid.n = 512\n"
        "window.M = 6\n"
        "shots.L = 100\n"
        "clock.nodes = 129\n"
        "target.outcome = 16\n",
        "inline"));
    RunOptions opt;
    opt.out_dir = tmp.file("out");
    const RunManifest man = run_experiment(cfg, Mode::strobe, opt);

    CHECK(man.exit_code == 2);
    REQUIRE_FALSE(man.warnings.empty());
    CHECK(man.warnings.front().find("UNDEFINED") != std::string::npos);
    CHECK(man.summary.contains("tv_strobe_clock"));  // target row itself fired
    CHECK(slurp(tmp.file("out/dist.csv")).find("UNDEFINED") != std::string::npos);
}

TEST_CASE("cli prints the config reference and rejects bad input") {
    TempDir tmp;
    std::string out;
    CHECK(run_cli("--print-config-reference", tmp.file("ref.txt"), &out) == 0);
    CHECK(out.find("window.T") != std::string::npos);
    CHECK(out.find("shots.L") != std::string::npos);

    CHECK(run_cli("strobe", tmp.file("noconf.txt"), &out) != 0);

    spit(tmp.file("bad.cfg"), "nonsense.key = 1\n");
    CHECK(run_cli("strobe --config " + tmp.file("bad.cfg"), tmp.file("bad.txt"), &out) == 1);
    CHECK(out.find("nonsense.key") != std::string::npos);
}

TEST_CASE("cli runs write artifacts and honour overrides") {
    TempDir tmp;
    spit(tmp.file("run.cfg"), kTinyStrobe);
    std::string out;

    const std::string base = "strobe --config " + tmp.file("run.cfg");
    CHECK(run_cli(base + " --out " + tmp.file("a") + " --workers 1", tmp.file("o1.txt"), &out) ==
          0);
    CHECK(out.find("artifact") != std::string::npos);
    CHECK(run_cli(base + " --out " + tmp.file("b") + " --workers 2", tmp.file("o2.txt"), &out) ==
          0);
    CHECK(slurp(tmp.file("a/counts.csv")) == slurp(tmp.file("b/counts.csv")));
    CHECK(slurp(tmp.file("a/dist.csv")) == slurp(tmp.file("b/dist.csv")));

    CHECK(run_cli(base + " --out " + tmp.file("c") + " --format csv", tmp.file("o3.txt"), &out) ==
          0);
    CHECK(fs::exists(tmp.file("c/counts.csv")));
    CHECK_FALSE(fs::exists(tmp.file("c/summary.svg")));

    CHECK(run_cli(base + " --out " + tmp.file("d") + " --seed 99", tmp.file("o4.txt"), &out) == 0);
    const auto man = nlohmann::json::parse(slurp(tmp.file("d/manifest.json")));
    CHECK(man["seed"] == 99);
    CHECK(slurp(tmp.file("d/counts.csv")) != slurp(tmp.file("a/counts.csv")));
}

TEST_CASE("cli surfaces undefined rows as exit code 2") {
    TempDir tmp;
    spit(tmp.file("far.cfg"),
         "binning.mode = uniform\n"
         "binning.bins = 32\n"
         "grid.n = 512\n"
         "window.M = 6\n"
         "shots.L = 100\n"
         "clock.nodes = 129\n"
         "target.outcome = 16\n");
    std::string out;
    CHECK(run_cli("strobe --config " + tmp.file("far.cfg") + " --out " + tmp.file("out"),
                  tmp.file("o.txt"), &out) == 2);
    CHECK(out.find("warning") != std::string::npos);
}

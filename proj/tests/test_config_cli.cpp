#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ashock/config.hpp"
#include "ashock/runner.hpp"

using namespace ashock;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path fresh_dir(const std::string& name) {
    fs::path d = fs::temp_directory_path() / ("ashock_test_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

} // namespace

TEST_CASE("minimal config round-trips through the normalized dump") {
    std::string text = "[run]\nmode = profile\n";
    auto cfg = parse_config(text);
    CHECK(cfg.mode == "profile");
    CHECK(cfg.flux_id == "exponential");
    std::string dump1 = dump_config(cfg);
    auto cfg2 = parse_config(dump1);
    CHECK(dump_config(cfg2) == dump1);
}

TEST_CASE("range and key validation name the offender") {
    CHECK_THROWS_WITH_AS(parse_config("[run]\nmode = profile\n[scalar]\nK = -1\n"),
                         doctest::Contains("'K'"), config_error);
    CHECK_THROWS_WITH_AS(parse_config("[run]\nmode = profile\nfrobnicate = 1\n"),
                         doctest::Contains("unknown key"), config_error);
    CHECK_THROWS_AS(parse_config("[run]\nmode = dance\n"), config_error);
    CHECK_THROWS_AS(parse_config("[scalar]\nK = 2\n"), config_error); // mode missing
    CHECK_THROWS_AS(parse_config("[run]\nmode = profile\n[pressure]\ngamma = 0.5\n"),
                    config_error);
    CHECK_THROWS_AS(
        parse_config("[run]\nmode = profile\n[system]\nv_plus = 2.0\nv_minus = 1.0\n"),
        config_error);
}

TEST_CASE("v_plus lists parse into sweep cells") {
    auto cfg = parse_config("[run]\nmode = sweep-vplus\n[system]\nv_plus = 0.2, 0.1, 0.05\n");
    REQUIRE(cfg.v_plus.size() == 3);
    CHECK(cfg.v_plus[1] == doctest::Approx(0.1));
}

TEST_CASE("environment thread cap overrides the flag") {
    setenv("ASHOCK_MAX_THREADS", "2", 1);
    CHECK(effective_threads(8) == 2);
    unsetenv("ASHOCK_MAX_THREADS");
    CHECK(effective_threads(8) == 8);
}

TEST_CASE("search-k run emits a deterministic scan and a data verdict") {
    experiment_config cfg = parse_config(
        "[run]\nmode = search-k\nthreads = 2\n[flux]\nid = burgers\n"
        "[scalar]\nK0 = 4\nK_max = 40\n");
    auto d1 = fresh_dir("scan1");
    auto d2 = fresh_dir("scan2");
    std::string s1 = run_config(cfg, d1.string());
    std::string s2 = run_config(cfg, d2.string());
    CHECK(s1.find("verdict = not-found") != std::string::npos);
    CHECK(slurp(d1 / "scan.csv") == slurp(d2 / "scan.csv"));
    CHECK(slurp(d1 / "summary.txt") == slurp(d2 / "summary.txt"));
    // header row with a constant column count
    std::string csv = slurp(d1 / "scan.csv");
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    auto cols = std::count(line.begin(), line.end(), ',');
    CHECK(line.substr(0, 2) == "K,");
    while (std::getline(in, line))
        if (!line.empty()) CHECK(std::count(line.begin(), line.end(), ',') == cols);
}

TEST_CASE("profile run writes both profile tables") {
    experiment_config cfg = parse_config(
        "[run]\nmode = profile\n[flux]\nid = burgers\n[scalar]\nK = 2\n"
        "[system]\nv_plus = 0.5\n[pressure]\ngamma = 2\n"
        "[sim]\nhalf_width = 0\nspacing = 0\n");
    auto d = fresh_dir("profile");
    std::string sm = run_config(cfg, d.string());
    CHECK(fs::exists(d / "profile_scalar.csv"));
    CHECK(fs::exists(d / "profile_ns.csv"));
    CHECK(sm.find("scalar_sigma = -1") != std::string::npos);
}

TEST_CASE("cli binary: subcommands, artifacts, and failure modes") {
    fs::path dir = fresh_dir("cli");
    fs::path cfgp = dir / "cfg.ini";
    {
        std::ofstream out(cfgp);
        out << "[run]\nmode = functional\n[flux]\nid = burgers\n[weight]\nid = "
               "constant\n[scalar]\nK = 2\n";
    }
    std::string outdir = (dir / "out").string();
    std::string cmd = std::string(ASHOCK_CLI_PATH) + " functional --config " +
                      cfgp.string() + " --out " + outdir + " > " +
                      (dir / "stdout.txt").string() + " 2>&1";
    CHECK(std::system(cmd.c_str()) == 0);
    CHECK(fs::exists(fs::path(outdir) / "summary.txt"));
    std::string sm = slurp(fs::path(outdir) / "summary.txt");
    CHECK(sm.find("F = ") != std::string::npos);
    CHECK(sm.find("C_w = 1.66666") != std::string::npos);

    // mismatched subcommand is rejected
    std::string bad = std::string(ASHOCK_CLI_PATH) + " search-k --config " +
                      cfgp.string() + " --out " + (dir / "bad").string() +
                      " > /dev/null 2>&1";
    CHECK(std::system(bad.c_str()) != 0);

    // invalid config: nonzero exit and no artifacts
    fs::path badcfg = dir / "bad.ini";
    {
        std::ofstream out(badcfg);
        out << "[run]\nmode = functional\n[scalar]\nK = -3\n";
    }
    std::string outdir2 = (dir / "out2").string();
    std::string cmd2 = std::string(ASHOCK_CLI_PATH) + " functional --config " +
                       badcfg.string() + " --out " + outdir2 + " > /dev/null 2>&1";
    CHECK(std::system(cmd2.c_str()) != 0);
    CHECK_FALSE(fs::exists(outdir2));
}

TEST_CASE("simulate-scalar run produces the report artifacts") {
    experiment_config cfg = parse_config(
        "[run]\nmode = simulate-scalar\n[flux]\nid = burgers\n[weight]\nid = constant\n"
        "[scalar]\nK = 2\n[perturbation]\neps = 1e-3\n"
        "[sim]\nhorizon_steps = 200\nsample_every = 20\nspacing_factor = 0.1\n");
    auto d = fresh_dir("simscalar");
    std::string sm = run_config(cfg, d.string());
    CHECK(fs::exists(d / "entropy.csv"));
    CHECK(fs::exists(d / "decomposition.csv"));
    CHECK(fs::exists(d / "entropy.svg"));
    CHECK(sm.find("verdict = no-increase") != std::string::npos);
    std::string svg = slurp(d / "entropy.svg");
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("polyline") != std::string::npos);
    std::string csv = slurp(d / "entropy.csv");
    CHECK(csv.substr(0, 2) == "t,");
    CHECK(csv.find("greedy") != std::string::npos);
}

// Command-line front end: one subcommand per experiment mode, configuration
// from a [section] key = value file, artifacts written to --out.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "ashock/runner.hpp"

namespace {

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ashock::config_error("cannot read config file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct mode_args {
    std::string config_path;
    std::string out_dir = "out";
    int threads = 0;
};

int run_mode(const std::string& mode, const mode_args& args) {
    std::string text = read_text_file(args.config_path);
    ashock::experiment_config cfg = ashock::parse_config(text, mode);
    if (cfg.mode != mode)
        throw ashock::config_error("config requests mode '" + cfg.mode +
                                   "' but subcommand is '" + mode + "'");
    if (args.threads > 0) cfg.threads = args.threads;
    std::string summary = ashock::run_config(cfg, args.out_dir);
    std::cout << summary;
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Viscous shock a-contraction laboratory"};
    app.require_subcommand(1);

    static const char* modes[] = {"profile",     "functional",      "search-k",
                                  "sweep-vplus", "simulate-scalar", "simulate-ns"};
    mode_args args;
    for (const char* m : modes) {
        CLI::App* sub = app.add_subcommand(m, std::string("run mode ") + m);
        sub->add_option("--config", args.config_path, "configuration file")->required();
        sub->add_option("--out", args.out_dir, "output directory");
        sub->add_option("--threads", args.threads, "worker threads for sweep cells");
    }

    CLI11_PARSE(app, argc, argv);

    std::string mode;
    for (const char* m : modes)
        if (app.get_subcommand(m)->parsed()) mode = m;

    try {
        return run_mode(mode, args);
    } catch (const ashock::error& e) {
        std::cerr << "error [" << e.kind() << "] " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error " << e.what() << "\n";
        return 3;
    }
}

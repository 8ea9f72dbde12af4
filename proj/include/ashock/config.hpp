#pragma once

#include <cctype>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ashock/errors.hpp"

namespace ashock {

/// Batch experiment configuration, parsed from a line-based
/// `[section]` / `key = value` file. Unknown keys are rejected; values are
/// range-checked here so the pipelines can assume admissible inputs.
struct experiment_config {
    std::string mode; // profile|functional|search-k|sweep-vplus|simulate-scalar|simulate-ns
    long seed = 0;
    int threads = 1;

    std::string flux_id = "exponential";
    double gamma = 5.0 / 3.0;

    std::string weight_id = "constant";
    double weight_param = 0.5;

    double K = 2.0;
    double K0 = 4.0;
    double K_max = 80.0;

    double v_minus = 1.0;
    double u_minus = 0.0;
    std::vector<double> v_plus = {0.1};

    double eps = 1e-3;
    double taper_delta = 0.0; // 0 = auto

    double half_width = 0.0; // 0 = auto
    double spacing = 0.0;    // 0 = auto
    double spacing_factor = 0.0;
    double cfl = 0.4;
    int horizon_steps = 0; // 0 = mode default
    int sample_every = 0;
    double lipschitz = 1.0;
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

inline double parse_number(const std::string& v, const std::string& key, int line) {
    try {
        std::size_t pos = 0;
        double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing");
        return x;
    } catch (...) {
        throw config_error("line " + std::to_string(line) + ": key '" + key +
                           "' expects a number, got '" + v + "'");
    }
}

} // namespace detail

/// Parses and validates a configuration. Errors name the offending line and
/// key. Defaults are filled; `dump_config` echoes the normalized form. When
/// `fallback_mode` is nonempty it is used if the file omits run.mode.
inline experiment_config parse_config(const std::string& text,
                                      const std::string& fallback_mode = "") {
    experiment_config cfg;
    static const std::set<std::string> known = {
        "run.mode",       "run.seed",        "run.threads",
        "flux.id",        "pressure.gamma",  "weight.id",
        "weight.param",   "scalar.K",        "scalar.K0",
        "scalar.K_max",   "system.v_minus",  "system.u_minus",
        "system.v_plus",  "perturbation.eps", "perturbation.taper_delta",
        "sim.half_width", "sim.spacing",     "sim.spacing_factor",
        "sim.cfl",        "sim.horizon_steps", "sim.sample_every",
        "sim.lipschitz"};

    std::istringstream in(text);
    std::string line, section;
    int ln = 0;
    bool saw_mode = false;
    while (std::getline(in, line)) {
        ++ln;
        std::string s = detail::trim(line);
        if (s.empty() || s[0] == '#' || s[0] == ';') continue;
        if (s.front() == '[') {
            if (s.back() != ']')
                throw config_error("line " + std::to_string(ln) + ": malformed section");
            section = detail::trim(s.substr(1, s.size() - 2));
            continue;
        }
        std::size_t eq = s.find('=');
        if (eq == std::string::npos)
            throw config_error("line " + std::to_string(ln) + ": expected key = value");
        std::string key = detail::trim(s.substr(0, eq));
        std::string val = detail::trim(s.substr(eq + 1));
        std::string full = section.empty() ? key : section + "." + key;
        if (!known.count(full))
            throw config_error("line " + std::to_string(ln) + ": unknown key '" + full +
                               "'");
        auto num = [&](void) { return detail::parse_number(val, full, ln); };
        if (full == "run.mode") {
            static const std::set<std::string> modes = {
                "profile", "functional", "search-k", "sweep-vplus", "simulate-scalar",
                "simulate-ns"};
            if (!modes.count(val))
                throw config_error("line " + std::to_string(ln) + ": unknown mode '" +
                                   val + "'");
            cfg.mode = val;
            saw_mode = true;
        } else if (full == "run.seed") {
            cfg.seed = static_cast<long>(num());
        } else if (full == "run.threads") {
            double t = num();
            if (t < 1 || t > 256)
                throw config_error("line " + std::to_string(ln) +
                                   ": 'threads' out of range [1, 256]");
            cfg.threads = static_cast<int>(t);
        } else if (full == "flux.id") {
            if (val != "exponential" && val != "burgers" && val != "quartic")
                throw config_error("line " + std::to_string(ln) + ": unknown flux '" +
                                   val + "'");
            cfg.flux_id = val;
        } else if (full == "pressure.gamma") {
            cfg.gamma = num();
            if (!(cfg.gamma > 1.0))
                throw config_error("line " + std::to_string(ln) + ": 'gamma' must be > 1");
        } else if (full == "weight.id") {
            if (val != "constant" && val != "affine" && val != "bump")
                throw config_error("line " + std::to_string(ln) + ": unknown weight '" +
                                   val + "'");
            cfg.weight_id = val;
        } else if (full == "weight.param") {
            cfg.weight_param = num();
            if (!(std::abs(cfg.weight_param) < 1.0))
                throw config_error("line " + std::to_string(ln) +
                                   ": 'param' must satisfy |param| < 1");
        } else if (full == "scalar.K") {
            cfg.K = num();
            if (!(cfg.K > 0.0))
                throw config_error("line " + std::to_string(ln) + ": 'K' must be positive");
        } else if (full == "scalar.K0") {
            cfg.K0 = num();
            if (!(cfg.K0 > 0.0))
                throw config_error("line " + std::to_string(ln) + ": 'K0' must be positive");
        } else if (full == "scalar.K_max") {
            cfg.K_max = num();
            if (!(cfg.K_max > 0.0))
                throw config_error("line " + std::to_string(ln) +
                                   ": 'K_max' must be positive");
        } else if (full == "system.v_minus") {
            cfg.v_minus = num();
            if (!(cfg.v_minus > 0.0))
                throw config_error("line " + std::to_string(ln) +
                                   ": 'v_minus' must be positive");
        } else if (full == "system.u_minus") {
            cfg.u_minus = num();
        } else if (full == "system.v_plus") {
            cfg.v_plus.clear();
            std::istringstream vs(val);
            std::string item;
            while (std::getline(vs, item, ',')) {
                item = detail::trim(item);
                if (item.empty()) continue;
                double v = detail::parse_number(item, full, ln);
                if (!(v > 0.0))
                    throw config_error("line " + std::to_string(ln) +
                                       ": 'v_plus' entries must be positive");
                cfg.v_plus.push_back(v);
            }
            if (cfg.v_plus.empty())
                throw config_error("line " + std::to_string(ln) + ": empty 'v_plus' list");
        } else if (full == "perturbation.eps") {
            cfg.eps = num();
            if (!(cfg.eps > 0.0 && cfg.eps <= 0.1))
                throw config_error("line " + std::to_string(ln) +
                                   ": 'eps' out of range (0, 0.1]");
        } else if (full == "perturbation.taper_delta") {
            cfg.taper_delta = num();
            if (cfg.taper_delta < 0.0)
                throw config_error("line " + std::to_string(ln) +
                                   ": 'taper_delta' must be >= 0");
        } else if (full == "sim.half_width") {
            cfg.half_width = num();
            if (cfg.half_width < 0.0)
                throw config_error("line " + std::to_string(ln) +
                                   ": 'half_width' must be >= 0");
        } else if (full == "sim.spacing") {
            cfg.spacing = num();
            if (cfg.spacing < 0.0)
                throw config_error("line " + std::to_string(ln) +
                                   ": 'spacing' must be >= 0");
        } else if (full == "sim.spacing_factor") {
            cfg.spacing_factor = num();
            if (cfg.spacing_factor < 0.0)
                throw config_error("line " + std::to_string(ln) +
                                   ": 'spacing_factor' must be >= 0");
        } else if (full == "sim.cfl") {
            cfg.cfl = num();
            if (!(cfg.cfl > 0.0 && cfg.cfl < 1.0))
                throw config_error("line " + std::to_string(ln) +
                                   ": 'cfl' out of range (0, 1)");
        } else if (full == "sim.horizon_steps") {
            double v = num();
            if (v < 0 || v > 5e7)
                throw config_error("line " + std::to_string(ln) +
                                   ": 'horizon_steps' out of range");
            cfg.horizon_steps = static_cast<int>(v);
        } else if (full == "sim.sample_every") {
            double v = num();
            if (v < 0 || v > 1e7)
                throw config_error("line " + std::to_string(ln) +
                                   ": 'sample_every' out of range");
            cfg.sample_every = static_cast<int>(v);
        } else if (full == "sim.lipschitz") {
            cfg.lipschitz = num();
            if (!(cfg.lipschitz >= 0.0))
                throw config_error("line " + std::to_string(ln) +
                                   ": 'lipschitz' must be >= 0");
        }
    }
    if (!saw_mode) {
        if (fallback_mode.empty())
            throw config_error("missing required key 'run.mode'");
        cfg.mode = fallback_mode;
    }
    if (cfg.K0 > cfg.K_max)
        throw config_error("'K0' must not exceed 'K_max'");
    for (double v : cfg.v_plus)
        if (!(v < cfg.v_minus))
            throw config_error("'v_plus' entries must be smaller than 'v_minus'");
    return cfg;
}

/// Normalized dump; parse(dump(cfg)) == cfg.
inline std::string dump_config(const experiment_config& c) {
    std::ostringstream o;
    o.precision(17);
    o << "[run]\n";
    o << "mode = " << c.mode << "\n";
    o << "seed = " << c.seed << "\n";
    o << "threads = " << c.threads << "\n";
    o << "[flux]\n";
    o << "id = " << c.flux_id << "\n";
    o << "[pressure]\n";
    o << "gamma = " << c.gamma << "\n";
    o << "[weight]\n";
    o << "id = " << c.weight_id << "\n";
    o << "param = " << c.weight_param << "\n";
    o << "[scalar]\n";
    o << "K = " << c.K << "\n";
    o << "K0 = " << c.K0 << "\n";
    o << "K_max = " << c.K_max << "\n";
    o << "[system]\n";
    o << "v_minus = " << c.v_minus << "\n";
    o << "u_minus = " << c.u_minus << "\n";
    o << "v_plus = ";
    for (std::size_t i = 0; i < c.v_plus.size(); ++i)
        o << (i ? ", " : "") << c.v_plus[i];
    o << "\n";
    o << "[perturbation]\n";
    o << "eps = " << c.eps << "\n";
    o << "taper_delta = " << c.taper_delta << "\n";
    o << "[sim]\n";
    o << "half_width = " << c.half_width << "\n";
    o << "spacing = " << c.spacing << "\n";
    o << "spacing_factor = " << c.spacing_factor << "\n";
    o << "cfl = " << c.cfl << "\n";
    o << "horizon_steps = " << c.horizon_steps << "\n";
    o << "sample_every = " << c.sample_every << "\n";
    o << "lipschitz = " << c.lipschitz << "\n";
    return o.str();
}

} // namespace ashock

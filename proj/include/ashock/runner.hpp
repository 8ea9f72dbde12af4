#pragma once

#include <cstdlib>
#include <filesystem>
#include <string>

#include "ashock/config.hpp"
#include "ashock/experiment.hpp"
#include "ashock/report.hpp"

namespace ashock {

/// Applies the thread-count cap from the environment (ASHOCK_MAX_THREADS
/// overrides any configured or flag value).
inline int effective_threads(int requested) {
    if (const char* env = std::getenv("ASHOCK_MAX_THREADS")) {
        try {
            int cap = std::stoi(env);
            if (cap >= 1) return std::min(requested, cap);
        } catch (...) {
        }
    }
    return std::max(1, requested);
}

inline scalar_experiment_params scalar_params_from(const experiment_config& cfg) {
    scalar_experiment_params par;
    par.flux = make_flux(cfg.flux_id);
    par.wt = make_weight(cfg.weight_id, cfg.weight_param);
    par.K = cfg.K;
    par.eps = cfg.eps;
    par.lipschitz = cfg.lipschitz;
    par.delta = cfg.taper_delta;
    if (cfg.spacing_factor > 0.0) par.spacing_factor = cfg.spacing_factor;
    par.cfl = cfg.cfl;
    if (cfg.horizon_steps > 0) par.horizon_steps = cfg.horizon_steps;
    if (cfg.sample_every > 0) par.sample_every = cfg.sample_every;
    return par;
}

inline ns_experiment_params ns_params_from(const experiment_config& cfg) {
    ns_experiment_params par;
    par.pl.gamma = cfg.gamma;
    par.wt = make_weight(cfg.weight_id, cfg.weight_param);
    par.v_minus = cfg.v_minus;
    par.u_minus = cfg.u_minus;
    par.v_plus = cfg.v_plus.front();
    par.eps = cfg.eps;
    par.lipschitz = cfg.lipschitz;
    par.delta = cfg.taper_delta;
    if (cfg.spacing_factor > 0.0) par.spacing_factor = cfg.spacing_factor;
    par.cfl = cfg.cfl;
    if (cfg.horizon_steps > 0) par.horizon_steps = cfg.horizon_steps;
    if (cfg.sample_every > 0) par.sample_every = cfg.sample_every;
    return par;
}

/// Dispatches a validated configuration and writes the artifacts (CSV tables,
/// SVG plots, key = value summary) to out_dir. A negative verdict is data,
/// not an error; the exit status is zero whenever the pipeline completed.
/// Returns the summary text.
inline std::string run_config(const experiment_config& cfg, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    auto path = [&](const std::string& name) { return (fs::path(out_dir) / name).string(); };

    int threads = effective_threads(cfg.threads);
    summary sm;
    sm.set("mode", cfg.mode);
    sm.set("seed", static_cast<double>(cfg.seed));
    write_file(path("config_normalized.txt"), dump_config(cfg));

    if (cfg.mode == "profile") {
        flux_function fl = make_flux(cfg.flux_id);
        shock_profile pr =
            solve_scalar_profile(fl, cfg.K, cfg.half_width, cfg.spacing);
        write_file(path("profile_scalar.csv"), profile_csv(pr));
        sm.set("scalar_K", pr.K);
        sm.set("scalar_sigma", pr.sigma);
        sm.set("scalar_half_width", pr.half_width);
        pressure_law pl{cfg.gamma};
        ns_shock sh = solve_ns_profile(pl, cfg.v_minus, cfg.u_minus, cfg.v_plus.front(),
                                       cfg.half_width, cfg.spacing);
        write_file(path("profile_ns.csv"), profile_csv(sh));
        sm.set("ns_sigma", sh.sigma);
        sm.set("ns_u_plus", sh.u_plus);
        sm.set("ns_p_jump", sh.p_jump);
    } else if (cfg.mode == "functional") {
        flux_function fl = make_flux(cfg.flux_id);
        weight wt = make_weight(cfg.weight_id, cfg.weight_param);
        perturbation base = build_base_perturbation(wt, cfg.K);
        perturbation cur = base;
        if (cfg.taper_delta > 0.0)
            cur = project_to_compact_support(wt, cfg.K, base, cfg.taper_delta);
        perturbation shifted = solve_shift_condition(wt, cfg.K, cur, cfg.eps);
        production_parts z = eval_production(wt, fl, cfg.K, shifted.fn, shifted.mesh);
        quad_form qf = eval_quadratic_form(wt, fl, cfg.K, cur.fn, cur.mesh);
        double y = eval_shift_term(wt, cfg.K, shifted.fn, shifted.mesh);
        double r1 = eval_cubic_remainder(wt, fl, cfg.K, shifted.fn, shifted.mesh);
        sm.set("C_w", base.C_w);
        sm.set("lambda", shifted.lambda);
        sm.set("lambda_star", shifted.lambda_star);
        sm.set("Y", y);
        sm.set("Z", z.total);
        sm.set("R1", r1);
        sm.set("J1", qf.j1);
        sm.set("J2", qf.j2);
        sm.set("F", qf.f);
    } else if (cfg.mode == "search-k") {
        flux_function fl = make_flux(cfg.flux_id);
        weight wt = make_weight(cfg.weight_id, cfg.weight_param);
        search_result res = search_destabilizing_K(fl, wt, cfg.K0, cfg.K_max, 1.25, threads);
        write_file(path("scan.csv"), scan_csv(res));
        sm.set("rho", res.rho);
        if (res.theta) sm.set("theta", *res.theta);
        if (res.k_star) {
            sm.set("verdict", std::string("found"));
            sm.set("K_star", *res.k_star);
        } else {
            sm.set("verdict", std::string("not-found"));
        }
    } else if (cfg.mode == "sweep-vplus") {
        pressure_law pl{cfg.gamma};
        weight wt = make_weight(cfg.weight_id, cfg.weight_param);
        sweep_result res =
            sweep_vplus(pl, wt, cfg.v_minus, cfg.u_minus, cfg.v_plus, threads);
        write_file(path("sweep.csv"), sweep_csv(res));
        if (res.v_star) {
            sm.set("verdict", std::string("positive-at-smallest"));
            sm.set("v_star", *res.v_star);
        } else {
            sm.set("verdict", std::string("not-positive"));
        }
    } else if (cfg.mode == "simulate-scalar" || cfg.mode == "simulate-ns") {
        entropy_report rep = cfg.mode == "simulate-scalar"
                                 ? run_scalar_experiment(scalar_params_from(cfg))
                                 : run_ns_experiment(ns_params_from(cfg));
        write_file(path("entropy.csv"), entropy_csv(rep));
        write_file(path("decomposition.csv"), decomposition_csv(rep));
        write_file(path("entropy.svg"), entropy_svg(rep));
        std::string text = sm.str() + entropy_summary(rep).str();
        write_file(path("summary.txt"), text);
        return text;
    } else {
        throw config_error("unknown mode '" + cfg.mode + "'");
    }
    write_file(path("summary.txt"), sm.str());
    return sm.str();
}

} // namespace ashock

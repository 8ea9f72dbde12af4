#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "ashock/errors.hpp"
#include "ashock/pde_sim.hpp"

namespace ashock {

struct strategy_series {
    std::string name;
    std::vector<double> phi;
    std::vector<double> shift;
};

/// Time series of the weighted relative entropy per shift strategy plus the
/// derivative decomposition along constant-rate shifts, and the verdict.
struct entropy_report {
    std::string kind; // "scalar" or "ns"
    double K = 0.0, v_plus = 0.0, gamma = 0.0;
    double eps = 0.0, lipschitz = 0.0, sigma = 0.0;
    double f_base = 0.0, f_projected = 0.0;
    double lambda = 0.0, lambda_star = 0.0, delta = 0.0;
    double grid_h = 0.0, grid_half_width = 0.0, dt = 0.0;

    std::vector<double> times;
    double phi0 = 0.0;
    std::vector<strategy_series> strategies;
    std::vector<double> rates;
    std::vector<std::vector<double>> decomposition; // [rate][sample]
    // zero-shift decomposition terms per sample: the shift coefficient and
    // the shift-free rest (Z + R1 for the scalar law, B - G for the system)
    std::vector<double> y_series;
    std::vector<double> rest_series;

    double fd_derivative0 = 0.0;      // one-sided FD of the zero-shift entropy
    double formula_derivative0 = 0.0; // transported decomposition at t = 0

    bool verdict = false;
    double t_star = 0.0;
    double drift_t_star = 0.0; // largest time with <=10% decomposition drift

    /// Relative residual between the measured and formula derivative at t=0.
    double decomposition_residual() const {
        double denom = std::max(std::abs(formula_derivative0), 1e-300);
        return std::abs(fd_derivative0 - formula_derivative0) / denom;
    }
};

struct scalar_experiment_params {
    flux_function flux;
    weight wt;
    double K = 2.0;
    double eps = 1e-3;
    double lipschitz = 1.0;
    double delta = 0.0; // taper width; 0 selects automatically
    double spacing_factor = 0.08;
    double cfl = 0.4;
    int horizon_steps = 12000;
    int sample_every = 150;
    int n_rates = 9; // odd, so the grid contains rate 0
};

struct ns_experiment_params {
    pressure_law pl;
    weight wt;
    double v_minus = 1.0;
    double u_minus = 0.0;
    double v_plus = 0.1;
    double eps = 1e-3;
    double lipschitz = 1.0;
    double delta = 0.0;
    double spacing_factor = 0.1;
    double cfl = 0.4;
    int horizon_steps = 1200;
    int sample_every = 30;
    int n_rates = 9;
};

namespace detail {

inline std::vector<double> rate_grid(double lip, int n) {
    std::vector<double> r(n);
    for (int i = 0; i < n; ++i) r[i] = lip * (-1.0 + 2.0 * i / (n - 1));
    return r;
}

/// Second-order one-sided difference from three values dt apart.
inline double one_sided_derivative(double p0, double p1, double p2, double dt) {
    return (-3.0 * p0 + 4.0 * p1 - p2) / (2.0 * dt);
}

/// Verdict scan: largest sampled prefix on which every strategy strictly
/// exceeds phi0 and every constant-rate decomposition stays within 10% of its
/// initial value.
inline void finalize_report(entropy_report& rep) {
    std::size_t ns = rep.times.size();
    std::size_t good = 0;
    for (std::size_t s = 1; s < ns; ++s) {
        bool ok = true;
        for (const auto& st : rep.strategies)
            if (!(st.phi[s] > rep.phi0)) { ok = false; break; }
        if (ok) good = s; else break;
    }
    std::size_t drift_good = 0;
    for (std::size_t s = 1; s < ns; ++s) {
        bool ok = true;
        for (std::size_t k = 0; k < rep.rates.size() && ok; ++k) {
            double d0 = rep.decomposition[k][0];
            if (std::abs(rep.decomposition[k][s] - d0) > 0.10 * std::abs(d0)) ok = false;
        }
        if (ok) drift_good = s; else break;
    }
    rep.drift_t_star = drift_good > 0 ? rep.times[drift_good] : 0.0;
    std::size_t both = std::min(good, drift_good);
    rep.verdict = both >= 1;
    rep.t_star = both >= 1 ? rep.times[both] : 0.0;
}

/// Selects a gently graded subset of grid-image points in the shock variable
/// (values descending in the grid index): relative spacing ~15% of the
/// distance to the nearer end state, capped by h_int in the interior, with
/// the growth ratio bounded so the 4-point nodal stencils stay conditioned.
inline void select_image_nodes(const std::vector<double>& vals, int i_lo, int i_hi,
                               double lo_state, double hi_state, double h_int,
                               std::vector<double>& ynodes, std::vector<int>& yidx) {
    ynodes.clear();
    yidx.clear();
    int i = i_hi;
    ynodes.push_back(vals[i]);
    yidx.push_back(i);
    double prev_dy = 0.0;
    while (i > i_lo) {
        double y = vals[i];
        double dist = std::min(y - lo_state, hi_state - y);
        double tgt = std::min(h_int, 0.04 * dist);
        if (prev_dy > 0.0) tgt = std::min(tgt, 1.6 * prev_dy);
        int j = i - 1;
        while (j > i_lo && vals[j] < y + tgt) --j;
        if (!(vals[j] > y)) break;
        prev_dy = vals[j] - y;
        ynodes.push_back(vals[j]);
        yidx.push_back(j);
        i = j;
    }
}

} // namespace detail

// ---------------------------------------------------------------------------
// Scalar experiment
// ---------------------------------------------------------------------------

/// Collar-scale heuristic: for fluxes whose A'' varies on an O(1) state scale
/// the -K-side ramp must end below that scale, else the ramp bites into the
/// mass of J1.
inline double scalar_left_ramp_top(const flux_function& fl, double K) {
    double ratio = std::abs(fl.A3(-K)) / fl.A2(-K);
    return std::min(K / 8.0, 0.05 / std::max(0.4 / K, ratio));
}

/// Chooses the taper width so the projected quadratic form keeps a fixed
/// fraction of the base value (the logarithmic ramps converge slowly, so the
/// collar shrinks aggressively). The floor keeps the collar resolvable in the
/// double representation of the profile values near the end states.
inline perturbation auto_project_scalar(const weight& wt, const flux_function& fl,
                                        double K, const perturbation& base,
                                        double f_base, double delta_user,
                                        double* f_proj_out) {
    double left_top = scalar_left_ramp_top(fl, K);
    if (delta_user > 0.0) {
        perturbation proj =
            project_to_compact_support(wt, K, base, delta_user, left_top);
        if (f_proj_out)
            *f_proj_out = eval_quadratic_form(wt, fl, K, proj.fn, proj.mesh).f;
        return proj;
    }
    double floor = 8e-12 * K;
    double delta = K / 64.0;
    perturbation proj = project_to_compact_support(wt, K, base, delta, left_top);
    double f = eval_quadratic_form(wt, fl, K, proj.fn, proj.mesh).f;
    if (f_base > 0.0) {
        double target = 0.25 * f_base;
        for (int j = 0; j < 16 && f < target && delta > floor; ++j) {
            delta = std::max(delta / 16.0, floor);
            proj = project_to_compact_support(wt, K, base, delta, left_top);
            f = eval_quadratic_form(wt, fl, K, proj.fn, proj.mesh).f;
        }
    }
    if (f_proj_out) *f_proj_out = f;
    return proj;
}

inline entropy_report run_scalar_experiment(const scalar_experiment_params& par) {
    const flux_function& fl = par.flux;
    const weight& wt = par.wt;
    double K = par.K;

    entropy_report rep;
    rep.kind = "scalar";
    rep.K = K;
    rep.eps = par.eps;
    rep.lipschitz = par.lipschitz;

    perturbation base = build_base_perturbation(wt, K);
    rep.f_base = eval_quadratic_form(wt, fl, K, base.fn, base.mesh).f;
    perturbation proj =
        auto_project_scalar(wt, fl, K, base, rep.f_base, par.delta, &rep.f_projected);
    perturbation pert = solve_shift_condition(wt, K, proj, par.eps);
    rep.lambda = pert.lambda;
    rep.lambda_star = pert.lambda_star;
    rep.delta = proj.delta;

    double sigma = rankine_hugoniot_speed(fl, 0.0, -K);
    rep.sigma = sigma;
    double rate_l = -sigma;
    double rate_r = sigma - fl.A1(-K); // positive magnitude
    double h = par.spacing_factor / std::max(1.0, std::abs(fl.A1(-K)));
    double gmax = 1.05 * std::max(std::abs(fl.A1(-K) - sigma), std::abs(sigma));
    double dt0 = par.cfl * h / gmax;
    double t_cap = par.horizon_steps * dt0;
    double maxshift = par.lipschitz * t_cap;

    double w8 = std::log(1e8) / std::min(rate_l, rate_r);
    double supp = std::log(8.0 * K / proj.delta) / std::min(rate_l, rate_r);
    double L = std::max(4.0 * w8, 1.05 * supp) + maxshift + 8.0 * h;

    shock_profile pr = solve_scalar_profile(fl, K, L, h);
    sim_grid grid{-pr.half_width, pr.spacing, static_cast<int>(pr.x.size()) - 1};
    scalar_sim sim(fl, pr, grid);
    rep.grid_h = grid.h;
    rep.grid_half_width = pr.half_width;

    const std::vector<double>& steady = sim.steady();
    std::vector<double> u0(steady);
    for (std::size_t i = 0; i < u0.size(); ++i) u0[i] += pert.fn.w(steady[i]);
    sim.set_state(u0);

    int clip = static_cast<int>(std::ceil(maxshift / h)) + 4;
    std::vector<double> a_nodes(steady.size());
    for (std::size_t i = 0; i < steady.size(); ++i)
        a_nodes[i] = wt.a0(std::clamp(-steady[i] / K, 0.0, 1.0));
    std::vector<double> xs(grid.nodes());
    for (int i = 0; i < grid.nodes(); ++i) xs[i] = grid.x(i);
    hermite_curve steady_curve(xs, steady, hermite_curve::fd4_slopes(xs, steady));

    // Transport quadrature: the nodes are exact grid images in the shock
    // variable, thinned to the perturbation-mesh grading, and the rule is the
    // 4th-order nodal composite. The transported fields are then evaluated
    // without any interpolation at zero shift, which keeps the
    // sigma-amplified linear term of the decomposition clean at extreme
    // profile scales.
    double y_margin = std::max(1e-12 * K, 0.0625 * pert.delta);
    y_margin = std::min(y_margin, 0.25 * pert.delta);
    double y_hi = std::min(steady[clip], -y_margin);
    double y_lo = std::max(steady[steady.size() - 1 - clip], -K + y_margin);
    std::vector<double> ssl(steady.size());
    {
        std::vector<double> m = hermite_curve::fd4_slopes(xs, steady);
        ssl = std::move(m);
    }
    std::vector<double> ynodes;
    std::vector<int> yidx;
    {
        int i_lo = clip, i_hi = grid.n - clip;
        while (i_lo < i_hi && steady[i_lo] >= y_hi) ++i_lo;
        while (i_hi > i_lo && steady[i_hi] <= y_lo) --i_hi;
        detail::select_image_nodes(steady, i_lo, i_hi, -K, 0.0,
                                   std::min(K / 2000.0, 0.05), ynodes, yidx);
    }
    quadrature_plan tplan = quadrature_plan::nodal4(ynodes);
    std::vector<double> ss2(steady.size());
    for (std::size_t i = 0; i < steady.size(); ++i)
        ss2[i] = (fl.A1(steady[i]) - sigma) * ssl[i];

    double taylor_shift = 1e-3 * h;
    auto node_of = [&, ynodes, yidx](double y) {
        auto it = std::lower_bound(ynodes.begin(), ynodes.end(), y);
        if (it == ynodes.end()) --it;
        else if (it != ynodes.begin() && *it - y > y - *(it - 1)) --it;
        return yidx[static_cast<std::size_t>(it - ynodes.begin())];
    };
    struct diff_field {
        std::vector<double> d, dsl;
        hermite_curve curve;
    };
    auto diff_field_of = [&](const std::vector<double>& u) {
        diff_field f;
        f.d.resize(u.size());
        for (std::size_t i = 0; i < u.size(); ++i) f.d[i] = u[i] - steady[i];
        f.dsl = hermite_curve::fd4_slopes(xs, f.d);
        f.curve = hermite_curve(xs, f.d, f.dsl);
        return f;
    };
    auto transported = [&, taylor_shift](const diff_field& df, double X) {
        scalar_pert_fn w;
        w.w = [&, X](double y) {
            int i = node_of(y);
            if (std::abs(X) < taylor_shift)
                return df.d[i] + X * (df.dsl[i] + ssl[i]) + 0.5 * X * X * ss2[i];
            return df.curve.eval(xs[i] + X) + steady_curve.eval(xs[i] + X) - steady[i];
        };
        w.wy = [&, X](double y) {
            int i = node_of(y);
            if (std::abs(X) < taylor_shift)
                return (df.dsl[i] + X * ss2[i]) / ssl[i];
            return (df.curve.deriv(xs[i] + X) + steady_curve.deriv(xs[i] + X) - ssl[i]) /
                   ssl[i];
        };
        return w;
    };

    rep.rates = detail::rate_grid(par.lipschitz, par.n_rates);
    rep.decomposition.assign(rep.rates.size(), {});
    rep.strategies.push_back({"zero", {}, {}});
    for (double r : rep.rates) {
        char buf[48];
        std::snprintf(buf, sizeof buf, "const:%g", r);
        rep.strategies.push_back({buf, {}, {}});
    }
    rep.strategies.push_back({"greedy", {}, {}});

    double greedy_x = 0.0;
    auto sample = [&]() {
        double t = sim.time();
        rep.times.push_back(t);
        hermite_curve state(xs, sim.state(),
                            hermite_curve::fd4_slopes(xs, sim.state()));
        diff_field dstate = diff_field_of(sim.state());
        auto phi_at = [&](double X) {
            return weighted_relative_entropy_scalar(grid, a_nodes, steady, state, X, clip);
        };
        double phi_zero = phi_at(0.0);
        std::size_t si = 0;
        rep.strategies[si].phi.push_back(phi_zero);
        rep.strategies[si].shift.push_back(0.0);
        ++si;
        for (double r : rep.rates) {
            double X = r * t;
            rep.strategies[si].phi.push_back(X == 0.0 ? phi_zero : phi_at(X));
            rep.strategies[si].shift.push_back(X);
            ++si;
        }
        if (t > 0.0) {
            double dt_s = t - rep.times[rep.times.size() - 2];
            double reach = par.lipschitz * dt_s;
            double prev = greedy_x;
            greedy_x = prev + optimize_shift(
                                  [&](double dx) { return phi_at(prev + dx); }, reach);
        }
        rep.strategies[si].phi.push_back(t == 0.0 ? phi_zero : phi_at(greedy_x));
        rep.strategies[si].shift.push_back(greedy_x);

        for (std::size_t k = 0; k < rep.rates.size(); ++k) {
            scalar_pert_fn w = transported(dstate, rep.rates[k] * t);
            scalar_decomposition d = eval_scalar_decomposition(wt, fl, K, w, tplan);
            rep.decomposition[k].push_back(d.value(rep.rates[k]));
            if (k == rep.rates.size() / 2) {
                rep.y_series.push_back(d.y_term);
                rep.rest_series.push_back(d.z_term + d.r1_term);
            }
        }
    };

    sample();
    rep.phi0 = rep.strategies[0].phi[0];
    rep.formula_derivative0 = rep.decomposition[rep.rates.size() / 2][0];

    // probe: measured derivative at t = 0 and the decomposition drift rate,
    // which sets the time horizon so the 10%-drift window is resolved
    double max_drift_rate = 0.0;
    {
        scalar_sim probe = sim;
        probe.step(dt0);
        hermite_curve s1(xs, probe.state(), hermite_curve::fd4_slopes(xs, probe.state()));
        double p1 = weighted_relative_entropy_scalar(grid, a_nodes, steady, s1, 0.0, clip);
        diff_field d1 = diff_field_of(probe.state());
        for (std::size_t k = 0; k < rep.rates.size(); ++k) {
            scalar_pert_fn w = transported(d1, rep.rates[k] * dt0);
            double dv = eval_scalar_decomposition(wt, fl, K, w, tplan).value(rep.rates[k]);
            max_drift_rate =
                std::max(max_drift_rate, std::abs(dv - rep.decomposition[k][0]) / dt0);
        }
        probe.step(dt0);
        hermite_curve s2(xs, probe.state(), hermite_curve::fd4_slopes(xs, probe.state()));
        double p2 = weighted_relative_entropy_scalar(grid, a_nodes, steady, s2, 0.0, clip);
        rep.fd_derivative0 = detail::one_sided_derivative(rep.phi0, p1, p2, dt0);
    }
    double dt = dt0;
    if (max_drift_rate > 0.0) {
        double t_drift = 0.1 * std::abs(rep.formula_derivative0) / max_drift_rate;
        double t_target = std::min(par.horizon_steps * dt0, 3.0 * t_drift);
        dt = std::max(t_target / par.horizon_steps, 1e-300);
    }
    rep.dt = dt;

    for (int step = 1; step <= par.horizon_steps; ++step) {
        sim.step(dt);
        if (step % par.sample_every == 0) sample();
    }
    detail::finalize_report(rep);
    return rep;
}

// ---------------------------------------------------------------------------
// System experiment
// ---------------------------------------------------------------------------

inline system_perturbation auto_project_ns(const weight& wt, const ns_shock& sh,
                                           const system_perturbation& base,
                                           double f_base, double delta_user,
                                           double* f_proj_out) {
    double span = sh.v_minus - sh.v_plus;
    if (delta_user > 0.0) {
        system_perturbation proj =
            project_system_to_compact_support(wt, sh, base, delta_user);
        if (f_proj_out)
            *f_proj_out = eval_quadratic_form_ns(wt, sh, proj.fn, proj.mesh).f;
        return proj;
    }
    double floor = 8e-12 * span;
    double delta = span / 64.0;
    system_perturbation proj = project_system_to_compact_support(wt, sh, base, delta);
    double f = eval_quadratic_form_ns(wt, sh, proj.fn, proj.mesh).f;
    if (f_base > 0.0) {
        double target = 0.25 * f_base;
        for (int j = 0; j < 16 && f < target && delta > floor; ++j) {
            delta = std::max(delta / 16.0, floor);
            proj = project_system_to_compact_support(wt, sh, base, delta);
            f = eval_quadratic_form_ns(wt, sh, proj.fn, proj.mesh).f;
        }
    }
    if (f_proj_out) *f_proj_out = f;
    return proj;
}

inline entropy_report run_ns_experiment(const ns_experiment_params& par) {
    const weight& wt = par.wt;

    entropy_report rep;
    rep.kind = "ns";
    rep.v_plus = par.v_plus;
    rep.gamma = par.pl.gamma;
    rep.eps = par.eps;
    rep.lipschitz = par.lipschitz;

    ns_shock sh = solve_ns_profile(par.pl, par.v_minus, par.u_minus, par.v_plus, 0.0, 0.0);
    rep.sigma = sh.sigma;
    system_perturbation base = build_base_perturbation_ns(wt, sh);
    rep.f_base = eval_quadratic_form_ns(wt, sh, base.fn, base.mesh).f;
    system_perturbation proj =
        auto_project_ns(wt, sh, base, rep.f_base, par.delta, &rep.f_projected);
    system_perturbation pert = solve_system_shift(wt, sh, proj, par.eps);
    rep.lambda = pert.lambda;
    rep.lambda_star = pert.lambda_star;
    rep.delta = proj.delta;

    double rate_l = sh.q_deriv(sh.v_minus);
    double rate_r = -sh.q_deriv(sh.v_plus);
    double h = par.spacing_factor / std::max(rate_l, rate_r);
    double cmax = std::sqrt(-par.pl.dp(par.v_plus));
    double dt0 = par.cfl * h / (1.1 * (std::abs(sh.sigma) + cmax));
    double t_cap = par.horizon_steps * dt0;
    double maxshift = par.lipschitz * t_cap;

    double dv = par.v_minus - par.v_plus;
    double w8 = std::log(1e8) / std::min(rate_l, rate_r);
    double supp = std::log(8.0 * dv / proj.delta) / std::min(rate_l, rate_r);
    double L = std::max(4.0 * w8, 1.05 * supp) + maxshift + 8.0 * h;

    ns_shock shg = solve_ns_profile(par.pl, par.v_minus, par.u_minus, par.v_plus, L, h);
    sim_grid grid{-shg.half_width, shg.spacing, static_cast<int>(shg.xi.size()) - 1};
    ns_sim sim(shg, grid);
    rep.grid_h = grid.h;
    rep.grid_half_width = shg.half_width;

    const std::vector<double>& sv = sim.steady_v();
    const std::vector<double>& shh = sim.steady_h();
    std::vector<double> v0(sv), h0(shh);
    for (std::size_t i = 0; i < v0.size(); ++i) {
        v0[i] += pert.fn.w(sv[i]);
        h0[i] += pert.fn.g(sv[i]);
    }
    sim.set_state(v0, h0);

    int clip = static_cast<int>(std::ceil(maxshift / h)) + 4;
    std::vector<double> a_nodes(sv.size());
    for (std::size_t i = 0; i < sv.size(); ++i)
        a_nodes[i] = wt.a0(std::clamp(shg.b(std::clamp(sv[i], par.v_plus, par.v_minus)),
                                      0.0, 1.0));
    std::vector<double> xs(grid.nodes());
    for (int i = 0; i < grid.nodes(); ++i) xs[i] = grid.x(i);
    hermite_curve steady_vcurve(xs, sv, hermite_curve::fd4_slopes(xs, sv));
    hermite_curve steady_hcurve(xs, shh, hermite_curve::fd4_slopes(xs, shh));

    double y_margin = std::max(1e-12 * dv, 0.0625 * pert.delta);
    y_margin = std::min(y_margin, 0.25 * pert.delta);
    double y_lo = std::max(sv[sv.size() - 1 - clip], par.v_plus + y_margin);
    double y_hi = std::min(sv[clip], par.v_minus - y_margin);
    std::vector<double> svsl = hermite_curve::fd4_slopes(xs, sv);
    std::vector<double> shsl = hermite_curve::fd4_slopes(xs, shh);
    std::vector<double> sv2(sv.size()), sh2(sv.size());
    for (std::size_t i = 0; i < sv.size(); ++i) {
        // second derivatives along the profile from the ODE structure
        double y = std::clamp(sv[i], par.v_plus * (1.0 + 1e-13), par.v_minus * (1.0 - 1e-13));
        sv2[i] = shg.q_deriv(y) * svsl[i];
        sh2[i] = (par.pl.dp(y) / shg.sigma) * sv2[i] +
                 (par.pl.ddp(y) / shg.sigma) * svsl[i] * svsl[i];
    }
    std::vector<double> ynodes;
    std::vector<int> yidx;
    {
        int i_lo = clip, i_hi = grid.n - clip;
        while (i_lo < i_hi && sv[i_lo] >= y_hi) ++i_lo;
        while (i_hi > i_lo && sv[i_hi] <= y_lo) --i_hi;
        detail::select_image_nodes(sv, i_lo, i_hi, par.v_plus, par.v_minus,
                                   std::min(dv / 2000.0, 0.05 * dv), ynodes, yidx);
    }
    quadrature_plan tplan = quadrature_plan::nodal4(ynodes);
    auto node_of = [&, ynodes, yidx](double y) {
        auto it = std::lower_bound(ynodes.begin(), ynodes.end(), y);
        if (it == ynodes.end()) --it;
        else if (it != ynodes.begin() && *it - y > y - *(it - 1)) --it;
        return yidx[static_cast<std::size_t>(it - ynodes.begin())];
    };

    double taylor_shift = 1e-3 * h;
    struct diff_field {
        std::vector<double> d, dsl;
        hermite_curve curve;
    };
    auto diff_field_of = [&](const std::vector<double>& u,
                             const std::vector<double>& ref) {
        diff_field f;
        f.d.resize(u.size());
        for (std::size_t i = 0; i < u.size(); ++i) f.d[i] = u[i] - ref[i];
        f.dsl = hermite_curve::fd4_slopes(xs, f.d);
        f.curve = hermite_curve(xs, f.d, f.dsl);
        return f;
    };
    auto transported = [&, taylor_shift](const diff_field& dvf, const diff_field& dhf,
                                         double X) {
        sys_pert_fn w;
        w.w = [&, X](double y) {
            int i = node_of(y);
            if (std::abs(X) < taylor_shift)
                return dvf.d[i] + X * (dvf.dsl[i] + svsl[i]) + 0.5 * X * X * sv2[i];
            return dvf.curve.eval(xs[i] + X) + steady_vcurve.eval(xs[i] + X) - sv[i];
        };
        w.wy = [&, X](double y) {
            int i = node_of(y);
            if (std::abs(X) < taylor_shift)
                return (dvf.dsl[i] + X * sv2[i]) / svsl[i];
            return (dvf.curve.deriv(xs[i] + X) + steady_vcurve.deriv(xs[i] + X) -
                    svsl[i]) /
                   svsl[i];
        };
        w.g = [&, X](double y) {
            int i = node_of(y);
            if (std::abs(X) < taylor_shift)
                return dhf.d[i] + X * (dhf.dsl[i] + shsl[i]) + 0.5 * X * X * sh2[i];
            return dhf.curve.eval(xs[i] + X) + steady_hcurve.eval(xs[i] + X) - shh[i];
        };
        return w;
    };

    rep.rates = detail::rate_grid(par.lipschitz, par.n_rates);
    rep.decomposition.assign(rep.rates.size(), {});
    rep.strategies.push_back({"zero", {}, {}});
    for (double r : rep.rates) {
        char buf[48];
        std::snprintf(buf, sizeof buf, "const:%g", r);
        rep.strategies.push_back({buf, {}, {}});
    }
    rep.strategies.push_back({"greedy", {}, {}});

    double greedy_x = 0.0;
    auto sample = [&]() {
        double t = sim.time();
        rep.times.push_back(t);
        hermite_curve vstate(xs, sim.v(), hermite_curve::fd4_slopes(xs, sim.v()));
        hermite_curve hstate(xs, sim.h(), hermite_curve::fd4_slopes(xs, sim.h()));
        diff_field dvc = diff_field_of(sim.v(), sv);
        diff_field dhc = diff_field_of(sim.h(), shh);
        auto phi_at = [&](double X) {
            return weighted_relative_entropy_ns(grid, par.pl, a_nodes, sv, shh, vstate,
                                                hstate, X, clip);
        };
        double phi_zero = phi_at(0.0);
        std::size_t si = 0;
        rep.strategies[si].phi.push_back(phi_zero);
        rep.strategies[si].shift.push_back(0.0);
        ++si;
        for (double r : rep.rates) {
            double X = r * t;
            rep.strategies[si].phi.push_back(X == 0.0 ? phi_zero : phi_at(X));
            rep.strategies[si].shift.push_back(X);
            ++si;
        }
        if (t > 0.0) {
            double dt_s = t - rep.times[rep.times.size() - 2];
            double reach = par.lipschitz * dt_s;
            double prev = greedy_x;
            greedy_x = prev + optimize_shift(
                                  [&](double dx) { return phi_at(prev + dx); }, reach);
        }
        rep.strategies[si].phi.push_back(t == 0.0 ? phi_zero : phi_at(greedy_x));
        rep.strategies[si].shift.push_back(greedy_x);

        for (std::size_t k = 0; k < rep.rates.size(); ++k) {
            sys_pert_fn w = transported(dvc, dhc, rep.rates[k] * t);
            ns_decomposition d = eval_ns_decomposition(wt, shg, w, tplan);
            rep.decomposition[k].push_back(d.value(rep.rates[k]));
            if (k == rep.rates.size() / 2) {
                rep.y_series.push_back(d.y_term);
                rep.rest_series.push_back(d.b_term - d.g_term);
            }
        }
    };

    sample();
    rep.phi0 = rep.strategies[0].phi[0];
    rep.formula_derivative0 = rep.decomposition[rep.rates.size() / 2][0];

    double max_drift_rate = 0.0;
    {
        ns_sim probe = sim;
        probe.step(dt0);
        hermite_curve v1(xs, probe.v(), hermite_curve::fd4_slopes(xs, probe.v()));
        hermite_curve h1(xs, probe.h(), hermite_curve::fd4_slopes(xs, probe.h()));
        double p1 = weighted_relative_entropy_ns(grid, par.pl, a_nodes, sv, shh, v1, h1,
                                                 0.0, clip);
        diff_field dv1 = diff_field_of(probe.v(), sv);
        diff_field dh1 = diff_field_of(probe.h(), shh);
        for (std::size_t k = 0; k < rep.rates.size(); ++k) {
            sys_pert_fn w = transported(dv1, dh1, rep.rates[k] * dt0);
            double dvv = eval_ns_decomposition(wt, shg, w, tplan).value(rep.rates[k]);
            max_drift_rate =
                std::max(max_drift_rate, std::abs(dvv - rep.decomposition[k][0]) / dt0);
        }
        probe.step(dt0);
        hermite_curve v2(xs, probe.v(), hermite_curve::fd4_slopes(xs, probe.v()));
        hermite_curve h2(xs, probe.h(), hermite_curve::fd4_slopes(xs, probe.h()));
        double p2 = weighted_relative_entropy_ns(grid, par.pl, a_nodes, sv, shh, v2, h2,
                                                 0.0, clip);
        rep.fd_derivative0 = detail::one_sided_derivative(rep.phi0, p1, p2, dt0);
    }
    double dt = dt0;
    if (max_drift_rate > 0.0) {
        double t_drift = 0.1 * std::abs(rep.formula_derivative0) / max_drift_rate;
        double t_target = std::min(par.horizon_steps * dt0, 3.0 * t_drift);
        dt = std::max(t_target / par.horizon_steps, 1e-300);
    }
    rep.dt = dt;

    for (int step = 1; step <= par.horizon_steps; ++step) {
        sim.step(dt);
        if (step % par.sample_every == 0) sample();
    }
    detail::finalize_report(rep);
    return rep;
}

} // namespace ashock

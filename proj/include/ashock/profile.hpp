#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "ashock/errors.hpp"
#include "ashock/flux.hpp"
#include "ashock/interp.hpp"
#include "ashock/ode.hpp"
#include "ashock/weight.hpp"

namespace ashock {

namespace detail {

/// Quintic Hermite evaluation on one segment using values, slopes and
/// curvatures at both ends; O(h^6) for smooth data.
inline double quintic_eval(double t, double h, double p0, double m0, double c0,
                           double p1, double m1, double c1) {
    double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;
    double H0 = 1 - 10 * t3 + 15 * t4 - 6 * t5;
    double H1 = t - 6 * t3 + 8 * t4 - 3 * t5;
    double H2 = 0.5 * t2 - 1.5 * t3 + 1.5 * t4 - 0.5 * t5;
    double H3 = 10 * t3 - 15 * t4 + 6 * t5;
    double H4 = -4 * t3 + 7 * t4 - 3 * t5;
    double H5 = 0.5 * t3 - t4 + 0.5 * t5;
    return p0 * H0 + h * m0 * H1 + h * h * c0 * H2 + p1 * H3 + h * m1 * H4 +
           h * h * c1 * H5;
}

/// Fills a uniform grid from the two adaptive ODE traces (left/right of 0)
/// plus linearized exponential tails beyond the switch points. `rhs` and
/// `rhs_d` are the profile ODE right-hand side and its derivative, used for
/// quintic resampling between accepted steps.
struct profile_fill {
    std::vector<double> x, y, dy;
};

inline profile_fill fill_uniform(const ode_trace& left, const ode_trace& right,
                                 double end_l, double end_r, double rate_l,
                                 double rate_r, double half_width, double spacing,
                                 const std::function<double(double)>& rhs,
                                 const std::function<double(double)>& rhs_d) {
    // traces are ordered away from 0; assemble a single monotone-x table
    std::vector<double> tx, ty, tf;
    for (std::size_t i = left.x.size(); i-- > 0;) {
        tx.push_back(left.x[i]);
        ty.push_back(left.y[i]);
        tf.push_back(left.f[i]);
    }
    for (std::size_t i = 1; i < right.x.size(); ++i) {
        tx.push_back(right.x[i]);
        ty.push_back(right.y[i]);
        tf.push_back(right.f[i]);
    }
    double xl = tx.front();
    double xr = tx.back();
    double yl = ty.front();
    double yr = ty.back();

    auto eval_trace = [&](double x) {
        std::size_t lo = 0, hi = tx.size() - 1;
        while (hi - lo > 1) {
            std::size_t mid = (lo + hi) / 2;
            if (tx[mid] <= x) lo = mid; else hi = mid;
        }
        double h = tx[hi] - tx[lo];
        double t = (x - tx[lo]) / h;
        // y'' = g'(y) g(y) along the trajectory
        double c0 = rhs_d(ty[lo]) * tf[lo];
        double c1 = rhs_d(ty[hi]) * tf[hi];
        return quintic_eval(t, h, ty[lo], tf[lo], c0, ty[hi], tf[hi], c1);
    };

    int n = static_cast<int>(std::round(2.0 * half_width / spacing));
    if (n < 8) throw window_error("profile grid needs at least 8 cells");
    if (n > 6000000) throw window_error("profile grid would exceed the node budget");
    profile_fill out;
    out.x.resize(n + 1);
    out.y.resize(n + 1);
    out.dy.resize(n + 1);
    for (int i = 0; i <= n; ++i) {
        double x = -half_width + spacing * i;
        out.x[i] = x;
        if (x < xl) {
            double e = std::exp(std::max(-700.0, rate_l * (x - xl)));
            out.y[i] = end_l + (yl - end_l) * e;
        } else if (x > xr) {
            double e = std::exp(std::max(-700.0, rate_r * (x - xr)));
            out.y[i] = end_r + (yr - end_r) * e;
        } else {
            out.y[i] = eval_trace(x);
        }
        out.dy[i] = rhs(out.y[i]);
    }
    return out;
}

} // namespace detail

/// Viscous shock profile for the scalar law, normalized so S(0) is the
/// midpoint of the end states. Strictly decreasing from u_- = 0 to u_+ = -K.
struct shock_profile {
    flux_function flux;
    double K = 0.0;
    double u_minus = 0.0;
    double u_plus = 0.0;
    double sigma = 0.0;
    double half_width = 0.0;
    double spacing = 0.0;
    double tail_tol = 0.0;
    std::vector<double> x, s, sp;
    hermite_curve curve;

    double value(double xx) const { return curve.eval(xx); }
    double deriv(double xx) const { return curve.deriv(xx); }
    /// S'' from differentiating the profile ODE.
    double deriv2(double xx) const {
        double y = curve.eval(xx);
        return (flux.A1(y) - sigma) * curve.deriv(xx);
    }
    /// Profile ODE right-hand side S' = -sigma (S - u_-) + A(S) - A(u_-).
    double ode_rhs(double y) const {
        return -sigma * (y - u_minus) + flux.A(y) - flux.A(u_minus);
    }
    double invert(double y) const {
        if (!(y > u_plus && y < u_minus))
            throw range_error("profile invert: value outside open state interval");
        return curve.inverse(y);
    }
};

/// Suggested half-width so both tails decay below tail_tol, from the
/// linearized end-state rates.
inline double scalar_auto_half_width(const flux_function& f, double K, double tail_tol) {
    double sigma = rankine_hugoniot_speed(f, 0.0, -K);
    double rate_l = -sigma;                 // decay rate toward u_- = 0
    double rate_r = sigma - f.A1(-K);        // decay rate toward u_+ (positive)
    double need = std::log(K / tail_tol);
    return 1.25 * (need / std::min(rate_l, rate_r) + 0.55 * K / std::min(std::abs(f.A1(-K) - sigma), rate_l));
}

inline double scalar_auto_spacing(const flux_function& f, double K) {
    return std::min(0.05, 0.1 / std::max(1.0, std::abs(f.A1(-K))));
}

inline shock_profile solve_scalar_profile(const flux_function& f, double K,
                                          double half_width, double spacing) {
    if (!(K > 0.0)) throw domain_error("solve_scalar_profile: need K > 0");
    f.check_domain(-K);
    shock_profile pr;
    pr.flux = f;
    pr.K = K;
    pr.u_minus = 0.0;
    pr.u_plus = -K;
    pr.sigma = rankine_hugoniot_speed(f, 0.0, -K);
    pr.tail_tol = 1e-10 * K;
    if (spacing <= 0.0) spacing = scalar_auto_spacing(f, K);
    if (half_width <= 0.0) half_width = scalar_auto_half_width(f, K, pr.tail_tol);
    pr.half_width = half_width;
    pr.spacing = spacing;

    const double sigma = pr.sigma;
    auto rhs = [f, sigma](double y) { return -sigma * y + f.A(y) - f.A(0.0); };
    auto rhs_d = [f, sigma](double y) { return -sigma + f.A1(y); };
    // switch to the linearized tail once close enough that the quadratic
    // remainder is below the ODE residual budget
    double budget = 1e-9 * std::max(1.0, std::abs(f.A1(-K)));
    double a2max = std::max(f.A2(0.0), f.A2(-K));
    double eps_sw = std::min(1e-5 * K, std::sqrt(2.0 * budget / a2max));

    double rate_l = -sigma;                      // decay rate as x -> -inf
    double rate_r = f.A1(-K) - sigma;            // negative; decay as x -> +inf
    double max_step = 0.15 / std::max(rate_l, -rate_r);

    auto right = integrate_autonomous(rhs, 0.0, -0.5 * K, +1,
                                      [&](double y) { return std::abs(y + K) <= eps_sw; },
                                      half_width, 1e-12, 1e-14, 2000000, max_step);
    auto left = integrate_autonomous(rhs, 0.0, -0.5 * K, -1,
                                     [&](double y) { return std::abs(y) <= eps_sw; },
                                     half_width, 1e-12, 1e-14, 2000000, max_step);

    auto fill = detail::fill_uniform(left, right, 0.0, -K, rate_l, rate_r,
                                     half_width, spacing, rhs, rhs_d);
    pr.x = std::move(fill.x);
    pr.s = std::move(fill.y);
    pr.sp = std::move(fill.dy);
    if (std::abs(pr.s.front() - pr.u_minus) > pr.tail_tol ||
        std::abs(pr.s.back() - pr.u_plus) > pr.tail_tol)
        throw window_error("scalar profile: tails not decayed at +-half_width");
    pr.curve = hermite_curve(pr.x, pr.s, pr.sp);
    return pr;
}

/// Transformed Navier-Stokes shock (specific volume and effective velocity),
/// 1-shock branch: sigma < 0, v_+ < v_-.
struct ns_shock {
    pressure_law pl;
    double v_minus = 0.0, u_minus = 0.0;
    double v_plus = 0.0, u_plus = 0.0;
    double sigma = 0.0;
    double p_jump = 0.0;   // p(v_+) - p(v_-)
    double half_width = 0.0, spacing = 0.0, tail_tol = 0.0;
    std::vector<double> xi, v, h;
    hermite_curve vcurve;

    /// Profile ODE right-hand side for the volume component.
    double q(double y) const {
        return (sigma * (y - v_minus) + (pl.p(y) - pl.p(v_minus)) / sigma) / pl.dp(y);
    }
    double q_deriv(double y) const {
        double dp = pl.dp(y);
        return (sigma + dp / sigma) / dp - q(y) * pl.ddp(y) / dp;
    }
    /// Pressure-normalized coordinate: 0 at v_-, 1 at v_+.
    double b(double y) const { return (pl.p(y) - pl.p(v_minus)) / p_jump; }
    double b_deriv(double y) const { return pl.dp(y) / p_jump; }
    /// Effective velocity along the profile, from the integrated h-equation.
    double h_of_v(double y) const { return u_minus + (pl.p(y) - pl.p(v_minus)) / sigma; }

    double value(double x) const { return vcurve.eval(x); }
    double deriv(double x) const { return vcurve.deriv(x); }
    double invert(double y) const {
        if (!(y > v_plus && y < v_minus))
            throw range_error("ns profile invert: value outside open state interval");
        return vcurve.inverse(y);
    }
};

inline ns_shock solve_ns_profile(const pressure_law& pl, double v_minus, double u_minus,
                                 double v_plus, double half_width, double spacing) {
    if (!(v_plus > 0.0)) throw vacuum_error("solve_ns_profile: v_+ must be positive");
    if (!(v_plus < v_minus))
        throw wrong_branch_error("solve_ns_profile: need v_+ < v_- (1-shock)");
    ns_shock sh;
    sh.pl = pl;
    sh.v_minus = v_minus;
    sh.u_minus = u_minus;
    sh.v_plus = v_plus;
    sh.p_jump = pl.p(v_plus) - pl.p(v_minus);
    sh.sigma = -std::sqrt(-(sh.p_jump) / (v_plus - v_minus));
    sh.u_plus = u_minus - sh.sigma * (v_plus - v_minus);
    double dv = v_minus - v_plus;
    sh.tail_tol = 1e-10 * dv;

    double rate_l = sh.q_deriv(v_minus);  // positive; decay rate as xi -> -inf
    double rate_r = sh.q_deriv(v_plus);   // negative; decay rate as xi -> +inf
    if (spacing <= 0.0) spacing = std::min(0.05 * dv, 0.1 / std::abs(rate_l));
    if (half_width <= 0.0) {
        double need = std::log(dv / sh.tail_tol);
        half_width = 1.25 * need * (1.0 / std::min(rate_l, -rate_r) + 0.2 / std::max(rate_l, -rate_r));
    }
    sh.half_width = half_width;
    sh.spacing = spacing;

    auto rhs = [sh](double y) { return sh.q(y); };
    auto rhs_d = [sh](double y) { return sh.q_deriv(y); };
    double eps_sw = 1e-6 * dv;
    double max_step = 0.15 / std::max(rate_l, -rate_r);
    auto right = integrate_autonomous(rhs, 0.0, 0.5 * (v_minus + v_plus), +1,
                                      [&](double y) { return y - v_plus <= eps_sw; },
                                      half_width, 1e-12, 1e-14, 2000000, max_step);
    auto left = integrate_autonomous(rhs, 0.0, 0.5 * (v_minus + v_plus), -1,
                                     [&](double y) { return v_minus - y <= eps_sw; },
                                     half_width, 1e-12, 1e-14, 2000000, max_step);
    auto fill = detail::fill_uniform(left, right, v_minus, v_plus, rate_l, rate_r,
                                     half_width, spacing, rhs, rhs_d);
    sh.xi = std::move(fill.x);
    sh.v = std::move(fill.y);
    if (std::abs(sh.v.front() - v_minus) > sh.tail_tol ||
        std::abs(sh.v.back() - v_plus) > sh.tail_tol)
        throw window_error("ns profile: tails not decayed at +-half_width");
    sh.vcurve = hermite_curve(sh.xi, sh.v, fill.dy);
    sh.h.resize(sh.v.size());
    for (std::size_t i = 0; i < sh.v.size(); ++i) sh.h[i] = sh.h_of_v(sh.v[i]);
    return sh;
}

/// Weight composed with the scalar profile: a(x) = a0((u_- - S(x)) / K).
inline weight_on_line compose_scalar(const weight& w, const shock_profile& pr) {
    auto inner = [&pr](double x) { return (pr.u_minus - pr.value(x)) / pr.K; };
    auto inner_d = [&pr](double x) { return -pr.deriv(x) / pr.K; };
    auto inner_dd = [&pr](double x) { return -pr.deriv2(x) / pr.K; };
    return compose_weight(w, inner, inner_d, inner_dd);
}

/// Weight composed with the system profile: a(xi) = a0(b(v(xi))).
inline weight_on_line compose_ns(const weight& w, const ns_shock& sh) {
    auto inner = [&sh](double x) { return sh.b(sh.value(x)); };
    auto inner_d = [&sh](double x) {
        double y = sh.value(x);
        return sh.b_deriv(y) * sh.q(y);
    };
    auto inner_dd = [&sh](double x) {
        double y = sh.value(x);
        double qy = sh.q(y);
        // d/dxi [ b'(v) q(v) ] = (b'' q + b' q') q
        double bpp = sh.pl.ddp(y) / sh.p_jump;
        return (bpp * qy + sh.b_deriv(y) * sh.q_deriv(y)) * qy;
    };
    return compose_weight(w, inner, inner_d, inner_dd);
}

/// Two-column CSV of the sampled profile.
inline std::string profile_csv(const shock_profile& pr) {
    std::string out = "x,S\n";
    char buf[80];
    for (std::size_t i = 0; i < pr.x.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", pr.x[i], pr.s[i]);
        out += buf;
    }
    return out;
}

inline std::string profile_csv(const ns_shock& sh) {
    std::string out = "xi,v,h\n";
    char buf[120];
    for (std::size_t i = 0; i < sh.xi.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", sh.xi[i], sh.v[i], sh.h[i]);
        out += buf;
    }
    return out;
}

} // namespace ashock

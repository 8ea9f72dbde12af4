#pragma once

#include <cmath>
#include <functional>
#include <future>
#include <optional>
#include <string>
#include <vector>

#include "ashock/errors.hpp"
#include "ashock/flux.hpp"
#include "ashock/numerics.hpp"
#include "ashock/weight.hpp"

namespace ashock {

/// Shock-variable perturbation as value/derivative evaluators on [-K, 0].
struct scalar_pert_fn {
    std::function<double(double)> w;
    std::function<double(double)> wy;
};

/// Perturbation data for the scalar problem: the current w (possibly scaled
/// and shift-corrected), the correction bump, and the quadrature mesh.
struct perturbation {
    double K = 0.0;
    double C_w = 0.0;       // plateau constant of the base shape
    double eps = 1.0;
    double lambda = 0.0;    // shift-condition multiplier (0 if unused)
    double lambda_star = 0.0;
    double delta = 0.0;     // taper collar width (0 = not compactly supported)
    scalar_pert_fn fn;
    scalar_pert_fn phi;
    std::vector<double> mesh;
    std::vector<double> w_nodes, wy_nodes;

    void sample() {
        w_nodes.resize(mesh.size());
        wy_nodes.resize(mesh.size());
        for (std::size_t i = 0; i < mesh.size(); ++i) {
            w_nodes[i] = fn.w(mesh[i]);
            wy_nodes[i] = fn.wy(mesh[i]);
        }
    }
    double sup_w() const {
        double m = 0.0;
        for (double v : w_nodes) m = std::max(m, std::abs(v));
        return m;
    }
};

// ---------------------------------------------------------------------------
// Meshes in the shock variable
// ---------------------------------------------------------------------------

/// Mesh on [-K, 0] anchored at the base-shape breakpoints -K/2, -K/4.
inline std::vector<double> scalar_base_mesh(double K, double h_int = 0.0) {
    if (h_int <= 0.0) h_int = std::min(K / 4000.0, 0.05);
    std::vector<double> breaks = {-K, -K / 2.0, -K / 4.0, 0.0};
    std::vector<double> nodes;
    for (std::size_t b = 0; b + 1 < breaks.size(); ++b) {
        double a = breaks[b], c = breaks[b + 1];
        int n = std::max(8, static_cast<int>(std::ceil((c - a) / h_int)));
        for (int i = 0; i < n; ++i) nodes.push_back(a + (c - a) * i / n);
    }
    nodes.push_back(0.0);
    return nodes;
}

/// Mesh for compactly supported perturbations: log-spaced toward both ends
/// (resolving taper ramps that span many decades) with the base breakpoints
/// kept as anchors.
inline std::vector<double> scalar_projected_mesh(double K, double zeta, double ramp_top,
                                                 double h_int = 0.0,
                                                 int nodes_per_decade = 56) {
    if (h_int <= 0.0) h_int = std::min(K / 4000.0, 0.05);
    auto log_nodes = [&](double s0, double s1, std::vector<double>& out) {
        int n = std::max(4, static_cast<int>(std::ceil(
                                nodes_per_decade * std::log10(s1 / s0))));
        for (int i = 0; i <= n; ++i) out.push_back(s0 * std::pow(s1 / s0, double(i) / n));
    };
    std::vector<double> s_left; // distance from -K
    s_left.push_back(0.0);
    s_left.push_back(zeta / 4.0);
    log_nodes(zeta / 4.0, std::max(ramp_top, zeta), s_left);
    std::vector<double> nodes;
    for (double s : s_left) nodes.push_back(-K + s);
    // interior with anchors
    double lo = -K + std::max(ramp_top, zeta);
    std::vector<double> breaks = {lo, -K / 2.0, -K / 4.0, -std::max(ramp_top, zeta)};
    for (std::size_t b = 0; b + 1 < breaks.size(); ++b) {
        double a = breaks[b], c = breaks[b + 1];
        if (!(c > a)) continue;
        int n = std::max(8, static_cast<int>(std::ceil((c - a) / h_int)));
        for (int i = 1; i <= n; ++i) nodes.push_back(a + (c - a) * i / n);
    }
    // right end: distances from 0
    std::vector<double> s_right;
    log_nodes(zeta / 4.0, std::max(ramp_top, zeta), s_right);
    for (auto it = s_right.rbegin(); it != s_right.rend(); ++it) nodes.push_back(-*it);
    nodes.push_back(-zeta / 4.0);
    nodes.push_back(0.0);
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    return nodes;
}

// ---------------------------------------------------------------------------
// Functionals (all integrals over the shock variable y in [-K, 0])
// ---------------------------------------------------------------------------

/// Weight in the shock variable: abar(y) = a0(-y/K).
inline std::function<double(double)> shock_weight(const weight& w, double K) {
    return [w, K](double y) { return w.a0(-y / K); };
}

/// Y(w) = int abar w w_y + int abar w. Vanishing Y makes the t=0 entropy
/// derivative shift-proof.
inline double eval_shift_term(const weight& wt, double K, const scalar_pert_fn& f,
                              const quadrature_plan& plan) {
    // transported plans may stop a collar-width sliver short of the ends
    double slack = 0.01 * K;
    if (plan.points.front() > -K + slack || plan.points.back() < -slack)
        throw domain_error("eval_shift_term: quadrature does not cover [-K, 0]");
    return plan.integrate([&](double y) {
        double a = wt.a0(-y / K);
        double w = f.w(y);
        return a * w * (f.wy(y) + 1.0);
    });
}

inline double eval_shift_term(const weight& wt, double K, const scalar_pert_fn& f,
                              const std::vector<double>& mesh) {
    return eval_shift_term(wt, K, f, quadrature_plan::gauss_cells(mesh));
}

/// Linear constraint int abar w (the epsilon-order part of Y).
inline double eval_linear_constraint(const weight& wt, double K, const scalar_pert_fn& f,
                                     const quadrature_plan& plan) {
    return plan.integrate([&](double y) { return wt.a0(-y / K) * f.w(y); });
}

inline double eval_linear_constraint(const weight& wt, double K, const scalar_pert_fn& f,
                                     const std::vector<double>& mesh) {
    return eval_linear_constraint(wt, K, f, quadrature_plan::gauss_cells(mesh));
}

struct production_parts {
    double linear = 0.0;        // 2 sigma int abar w
    double dissipation = 0.0;   // 2 int abar (A(y) - sigma y) |w_y|^2
    double relative_flux = 0.0; // 2 int abar A(w+y|y)
    double weight_dd = 0.0;     // -(1/K^2) int a0'' (A(y) - sigma y) w^2
    double weight_d = 0.0;      // (1/K) int a0' (2A'(y) - sigma) w^2
    double total = 0.0;
};

/// Z(w): the shift-free part of the entropy derivative decomposition.
inline production_parts eval_production(const weight& wt, const flux_function& fl,
                                        double K, const scalar_pert_fn& f,
                                        const quadrature_plan& plan) {
    double sigma = rankine_hugoniot_speed(fl, 0.0, -K);
    production_parts out;
    out.linear =
        2.0 * sigma * plan.integrate([&](double y) { return wt.a0(-y / K) * f.w(y); });
    out.dissipation = 2.0 * plan.integrate([&](double y) {
        double d = f.wy(y);
        return wt.a0(-y / K) * (fl.A(y) - sigma * y) * d * d;
    });
    out.relative_flux = 2.0 * plan.integrate(
        [&](double y) { return wt.a0(-y / K) * fl.rel(f.w(y) + y, y); });
    out.weight_dd = -(1.0 / (K * K)) * plan.integrate([&](double y) {
        double w = f.w(y);
        return wt.a2(-y / K) * w * w * (fl.A(y) - sigma * y);
    });
    out.weight_d = (1.0 / K) * plan.integrate([&](double y) {
        double w = f.w(y);
        return wt.a1(-y / K) * w * w * (2.0 * fl.A1(y) - sigma);
    });
    out.total = out.linear + out.dissipation + out.relative_flux + out.weight_dd +
                out.weight_d;
    return out;
}

inline production_parts eval_production(const weight& wt, const flux_function& fl,
                                        double K, const scalar_pert_fn& f,
                                        const std::vector<double>& mesh) {
    return eval_production(wt, fl, K, f, quadrature_plan::gauss_cells(mesh));
}

/// R_1(w) = (1/2K) int a0'(-y/K) [ int_y^{w+y} (G'''(k) - 2 y A'''(k)) (w+y-k)^2 dk ] dy.
inline double eval_cubic_remainder(const weight& wt, const flux_function& fl, double K,
                                   const scalar_pert_fn& f,
                                   const quadrature_plan& plan,
                                   double inner_rel_tol = 1e-11) {
    if (wt.d1_max == 0.0) return 0.0;
    auto outer = [&](double y) {
        double a1 = wt.a1(-y / K);
        if (a1 == 0.0) return 0.0;
        double w = f.w(y);
        if (w == 0.0) return 0.0;
        double u = w + y;
        auto inner = [&](double k) {
            double d = u - k;
            return (fl.entropy_flux_d3(k) - 2.0 * y * fl.A3(k)) * d * d;
        };
        double scale = std::abs(w * w * w) *
                       (std::abs(fl.entropy_flux_d3(y)) + 2.0 * std::abs(y * fl.A3(y)) + 1.0);
        double val = adaptive_simpson(inner, y, u, inner_rel_tol * std::max(scale, 1e-30));
        return a1 * val;
    };
    return (0.5 / K) * plan.integrate(outer);
}

inline double eval_cubic_remainder(const weight& wt, const flux_function& fl, double K,
                                   const scalar_pert_fn& f,
                                   const std::vector<double>& mesh,
                                   double inner_rel_tol = 1e-11) {
    return eval_cubic_remainder(wt, fl, K, f, quadrature_plan::gauss_cells(mesh),
                                inner_rel_tol);
}

/// Explicit constant for the cubic bound |R_1(w)| <= C ||w||_inf^3, from the
/// sup of the inner integrand over the reachable strip.
inline double cubic_bound_constant(const weight& wt, const flux_function& fl, double K,
                                   double w_sup, int n = 2000) {
    double m = 0.0;
    for (int i = 0; i <= n; ++i) {
        double y = -K + K * i / n;
        for (int j = -4; j <= 4; ++j) {
            double k = y + w_sup * j / 4.0;
            if (k < fl.lo || k > fl.hi) continue;
            m = std::max(m, std::abs(fl.entropy_flux_d3(k) - 2.0 * y * fl.A3(k)));
        }
    }
    return wt.d1_max * m / 6.0;
}

struct quad_form {
    double j1 = 0.0;
    double j2 = 0.0;
    double f = 0.0;
};

/// F(w) = J1 + J2: the epsilon^2 coefficient of the entropy derivative for
/// shift-corrected perturbations. Positive F witnesses destabilization.
inline quad_form eval_quadratic_form(const weight& wt, const flux_function& fl, double K,
                                     const scalar_pert_fn& f,
                                     const quadrature_plan& plan) {
    double sigma = rankine_hugoniot_speed(fl, 0.0, -K);
    quad_form out;
    double m1 = plan.integrate([&](double y) {
        double w = f.w(y);
        return wt.a0(-y / K) * fl.A2(y) * w * w;
    });
    double m2 = (2.0 / K) * plan.integrate([&](double y) {
        double w = f.w(y);
        return wt.a1(-y / K) * (fl.A1(y) - sigma) * w * w;
    });
    double m3 = -(1.0 / (K * K)) * plan.integrate([&](double y) {
        double w = f.w(y);
        return wt.a2(-y / K) * (fl.A(y) - sigma * y) * w * w;
    });
    out.j1 = m1 + m2 + m3;
    out.j2 = 2.0 * plan.integrate([&](double y) {
        double d = f.wy(y);
        return wt.a0(-y / K) * (fl.A(y) - sigma * y) * d * d;
    });
    out.f = out.j1 + out.j2;
    return out;
}

inline quad_form eval_quadratic_form(const weight& wt, const flux_function& fl, double K,
                                     const scalar_pert_fn& f,
                                     const std::vector<double>& mesh) {
    return eval_quadratic_form(wt, fl, K, f, quadrature_plan::gauss_cells(mesh));
}

// ---------------------------------------------------------------------------
// Construction of the base perturbation
// ---------------------------------------------------------------------------

namespace detail {

/// Base shape on [-1, 0]: 1 on [-1,-1/2], smoothstep ramp down on
/// [-1/2,-1/4], plateau -C on [-1/4, 0].
inline double base_shape(double s, double C) {
    if (s <= -0.5) return 1.0;
    if (s >= -0.25) return -C;
    double t = (s + 0.5) * 4.0;
    return 1.0 - (1.0 + C) * smoothstep(t);
}

inline double base_shape_deriv(double s, double C) {
    if (s <= -0.5 || s >= -0.25) return 0.0;
    double t = (s + 0.5) * 4.0;
    return -(1.0 + C) * smoothstep_deriv(t) * 4.0;
}

} // namespace detail

/// Correction bump centered at -K/2 with radius K/8; |phi| <= 1 and
/// |phi'| = O(1/K), so the bump is admissible uniformly in K.
inline scalar_pert_fn correction_bump(double K) {
    scalar_pert_fn phi;
    phi.w = [K](double y) { return bump((y + 0.5 * K) / (K / 8.0)); };
    phi.wy = [K](double y) { return bump_deriv((y + 0.5 * K) / (K / 8.0)) * 8.0 / K; };
    return phi;
}

/// Builds the base perturbation w(y) = wtilde(y/K), solving the plateau
/// constant so that int_0^1 a0(s) wtilde(-s) ds = 0.
inline perturbation build_base_perturbation(const weight& wt, double K) {
    if (!(K > 0.0)) throw domain_error("build_base_perturbation: K must be positive");
    // quadrature mesh in the shape variable with the breakpoints as anchors
    std::vector<double> smesh;
    for (int i = 0; i <= 400; ++i) smesh.push_back(0.25 * i / 400.0);
    for (int i = 1; i <= 400; ++i) smesh.push_back(0.25 + 0.25 * i / 400.0);
    for (int i = 1; i <= 800; ++i) smesh.push_back(0.5 + 0.5 * i / 800.0);

    auto constraint = [&](double C) {
        return integrate_cells(
            [&](double s) { return wt.a0(s) * detail::base_shape(-s, C); }, smesh);
    };
    double lo = wt.inf_a / wt.sup_a;
    double hi = 3.0 * wt.sup_a / wt.inf_a;
    double flo = constraint(lo);
    double fhi = constraint(hi);
    if (!(flo >= 0.0 && fhi <= 0.0))
        throw construction_error("base perturbation: plateau constant outside the "
                                 "admissible bracket");
    double C = bisect(constraint, lo, hi, 1e-15);

    perturbation p;
    p.K = K;
    p.C_w = C;
    p.fn.w = [K, C](double y) { return detail::base_shape(y / K, C); };
    p.fn.wy = [K, C](double y) { return detail::base_shape_deriv(y / K, C) / K; };
    p.phi = correction_bump(K);
    p.mesh = scalar_base_mesh(K);
    p.sample();
    return p;
}

// ---------------------------------------------------------------------------
// Compact-support projection
// ---------------------------------------------------------------------------

namespace detail {

/// One-sided taper in the distance s >= 0 from an endpoint: identically zero
/// for s <= zeta, logarithmic ramp up to ramp_top, one beyond. The ramp spans
/// many decades so its contribution to the gradient functional vanishes as
/// the collar shrinks (the weight degenerates linearly at the endpoints).
struct log_taper {
    double zeta = 0.0;
    double top = 0.0;
    double inv_span = 0.0; // 1 / ln(top/zeta)

    log_taper(double zeta_, double top_) : zeta(zeta_), top(top_) {
        inv_span = 1.0 / std::log(top / zeta);
    }
    double value(double s) const {
        if (s <= zeta) return 0.0;
        if (s >= top) return 1.0;
        return std::log(s / zeta) * inv_span;
    }
    double deriv(double s) const {
        if (s <= zeta || s >= top) return 0.0;
        return inv_span / s;
    }
};

} // namespace detail

/// Bump used to restore the linear constraint after tapering. It sits inside
/// the negative plateau at -K/8 where A'' is exponentially smaller than at
/// -K, so the correction barely moves the quadratic form.
inline scalar_pert_fn projection_bump(double K) {
    scalar_pert_fn x0;
    x0.w = [K](double y) { return bump((y + 0.125 * K) / (0.0625 * K)); };
    x0.wy = [K](double y) {
        return bump_deriv((y + 0.125 * K) / (0.0625 * K)) * 16.0 / K;
    };
    return x0;
}

/// Projects w to compact support in (-K, 0): hard zero on the half-collars
/// [-K, -K+delta/2] and [-delta/2, 0], logarithmic ramps (many decades, so
/// the gradient penalty fades as the collar shrinks), then kernel projection
/// to restore the linear constraint int abar q = 0. `left_top` bounds the
/// ramp extent at the -K end; for fluxes whose A'' concentrates near -K it
/// must finish below the concentration scale (0 selects K/8).
inline perturbation project_to_compact_support(const weight& wt, double K,
                                               const perturbation& base, double delta,
                                               double left_top = 0.0) {
    if (!(delta > 0.0) || delta >= K / 8.0)
        throw taper_error("taper collar must satisfy 0 < delta < K/8");
    double zeta = 0.5 * delta;
    double top_r = K / 8.0;
    double top_l = left_top > 0.0 ? std::max(std::min(left_top, K / 8.0), 2.0 * delta)
                                  : K / 8.0;
    detail::log_taper taper_r(zeta, top_r);
    detail::log_taper taper_l(zeta, top_l);

    auto wfun = base.fn.w;
    auto wyfun = base.fn.wy;
    auto T = [taper_r, taper_l, K](double y) {
        return taper_r.value(-y) * taper_l.value(y + K);
    };
    auto Ty = [taper_r, taper_l, K](double y) {
        return -taper_r.deriv(-y) * taper_l.value(y + K) +
               taper_r.value(-y) * taper_l.deriv(y + K);
    };

    scalar_pert_fn q0;
    q0.w = [wfun, T](double y) { return T(y) * wfun(y); };
    q0.wy = [wfun, wyfun, T, Ty](double y) { return Ty(y) * wfun(y) + T(y) * wyfun(y); };

    perturbation out = base;
    out.delta = delta;
    out.mesh = scalar_projected_mesh(K, zeta, std::max(top_l, top_r));

    // kernel projection q = q0 - f(q0) x0 with f = int abar(.) and f(x0) = 1
    scalar_pert_fn x0 = projection_bump(K);
    double ix0 = eval_linear_constraint(wt, K, x0, out.mesh);
    if (std::abs(ix0) < 1e-14 * K * wt.sup_a)
        throw degenerate_phi_error("projection bump has vanishing weighted mass");
    double defect = eval_linear_constraint(wt, K, q0, out.mesh);
    double c = defect / ix0;
    out.fn.w = [q0, c, x0](double y) { return q0.w(y) - c * x0.w(y); };
    out.fn.wy = [q0, c, x0](double y) { return q0.wy(y) - c * x0.wy(y); };
    out.sample();
    return out;
}

// ---------------------------------------------------------------------------
// Shift condition
// ---------------------------------------------------------------------------

/// Solves Y(eps w - eps^2 lambda phi) = 0 for lambda near the linearized
/// multiplier lambda_* = -int (abar'/2) w^2 / int abar phi.
inline perturbation solve_shift_condition(const weight& wt, double K,
                                          const perturbation& base, double eps) {
    if (!(eps > 0.0)) throw domain_error("solve_shift_condition: eps must be positive");
    const auto& mesh = base.mesh;
    double iphi = eval_linear_constraint(wt, K, base.phi, mesh);
    if (std::abs(iphi) < 1e-14 * K * wt.sup_a)
        throw degenerate_phi_error("shift condition: int abar phi vanishes");

    // abar'(y) = -a0'(-y/K)/K
    double num = integrate_cells(
        [&](double y) {
            double w = base.fn.w(y);
            return (-wt.a1(-y / K) / K) * 0.5 * w * w;
        },
        mesh);
    double lambda_star = -num / iphi;

    auto wfun = base.fn.w;
    auto wyfun = base.fn.wy;
    auto pfun = base.phi.w;
    auto pyfun = base.phi.wy;
    auto make = [&](double lam) {
        scalar_pert_fn f;
        f.w = [wfun, pfun, eps, lam](double y) {
            return eps * wfun(y) - eps * eps * lam * pfun(y);
        };
        f.wy = [wyfun, pyfun, eps, lam](double y) {
            return eps * wyfun(y) - eps * eps * lam * pyfun(y);
        };
        return f;
    };
    auto yval = [&](double lam) { return eval_shift_term(wt, K, make(lam), mesh); };

    double step = 0.5 * std::max(std::abs(lambda_star), 1e-3);
    bracket br = expand_bracket(yval, lambda_star, step);
    double lam = bisect(yval, br.lo, br.hi, 1e-15 * std::max(1.0, std::abs(lambda_star)));

    perturbation out = base;
    out.eps = eps;
    out.lambda = lam;
    out.lambda_star = lambda_star;
    out.fn = make(lam);
    out.sample();
    return out;
}

// ---------------------------------------------------------------------------
// Search over the shock amplitude
// ---------------------------------------------------------------------------

struct scan_row {
    double K = 0.0;
    double sigma = 0.0;
    double aprime_end = 0.0; // A'(-K)
    double j1 = 0.0, j2 = 0.0, f = 0.0;
    bool sigma_ok = false;   // |sigma / A'(-K)| <= rho
    bool aprime_ok = false;  // |A'(y)| <= rho |A'(-K)| on [-K/2, 0]
    bool abound_ok = false;  // |A(z)| <= rho K |A'(-K)| on [-K, 0]
    bool ratio_ok = false;   // rho A'(-K) <= A'(-theta K) < 0
    std::string error;
};

struct search_result {
    std::optional<double> k_star;
    double rho = 0.0;
    std::optional<double> theta;
    std::vector<scan_row> rows;
};

/// Geometric scan of K in [K0, K_max]: evaluates F on the base perturbation
/// and the speed/flux-derivative smallness conditions, and returns the
/// smallest K with F > 0.
inline search_result search_destabilizing_K(const flux_function& fl, const weight& wt,
                                            double K0, double K_max,
                                            double ratio = 1.25, int threads = 1) {
    if (!(K0 > 0.0) || !(K_max >= K0))
        throw domain_error("search_destabilizing_K: need 0 < K0 <= K_max");
    search_result res;
    res.rho = std::min({0.9, wt.inf_a / (48.0 * wt.sup_a),
                        3.0 / (200.0 * (1.0 + wt.sup_a + wt.d1_max))});
    res.theta = theta_for_weight(wt);

    std::vector<double> ks;
    for (double K = K0; K <= K_max * (1.0 + 1e-12); K *= ratio) {
        if (-K < fl.lo) break;
        ks.push_back(std::min(K, K_max));
    }

    auto eval_cell = [&](double K) {
        scan_row row;
        row.K = K;
        try {
            row.sigma = rankine_hugoniot_speed(fl, 0.0, -K);
            row.aprime_end = fl.A1(-K);
            perturbation base = build_base_perturbation(wt, K);
            quad_form qf = eval_quadratic_form(wt, fl, K, base.fn, base.mesh);
            row.j1 = qf.j1;
            row.j2 = qf.j2;
            row.f = qf.f;
            double ap = std::abs(row.aprime_end);
            row.sigma_ok = std::abs(row.sigma) <= res.rho * ap;
            row.aprime_ok = std::abs(fl.A1(-K / 2.0)) <= res.rho * ap;
            row.abound_ok = std::abs(fl.A(-K)) <= res.rho * K * ap;
            if (res.theta) {
                double at = fl.A1(-(*res.theta) * K);
                row.ratio_ok = (res.rho * row.aprime_end <= at) && (at < 0.0);
            }
        } catch (const error& e) {
            row.error = e.what();
        }
        return row;
    };

    if (threads > 1 && ks.size() > 1) {
        std::vector<std::future<scan_row>> futs;
        futs.reserve(ks.size());
        for (double K : ks)
            futs.push_back(std::async(std::launch::async, eval_cell, K));
        for (auto& f : futs) res.rows.push_back(f.get());
    } else {
        for (double K : ks) res.rows.push_back(eval_cell(K));
    }

    for (const auto& row : res.rows) {
        if (row.error.empty() && row.f > 0.0) {
            res.k_star = row.K;
            break;
        }
    }
    return res;
}

} // namespace ashock

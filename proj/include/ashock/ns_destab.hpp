#pragma once

#include <cmath>
#include <functional>
#include <future>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ashock/errors.hpp"
#include "ashock/flux.hpp"
#include "ashock/numerics.hpp"
#include "ashock/profile.hpp"
#include "ashock/scalar_destab.hpp"
#include "ashock/weight.hpp"

namespace ashock {

/// Shock-variable perturbation pair (w, g) on [v_+, v_-].
struct sys_pert_fn {
    std::function<double(double)> w;
    std::function<double(double)> wy;
    std::function<double(double)> g;
};

struct system_perturbation {
    double v_plus = 0.0, v_minus = 0.0;
    double alpha = 0.0;
    double eps = 1.0;
    double lambda = 0.0, lambda_star = 0.0;
    double smooth_width = 0.0; // indicator smoothing collar
    double delta = 0.0;        // taper collar width (0 = not projected)
    sys_pert_fn fn;
    scalar_pert_fn phi; // correction bump acts on the w component only
    std::vector<double> mesh;
    std::vector<double> w_nodes, wy_nodes, g_nodes;

    void sample() {
        w_nodes.resize(mesh.size());
        wy_nodes.resize(mesh.size());
        g_nodes.resize(mesh.size());
        for (std::size_t i = 0; i < mesh.size(); ++i) {
            w_nodes[i] = fn.w(mesh[i]);
            wy_nodes[i] = fn.wy(mesh[i]);
            g_nodes[i] = fn.g(mesh[i]);
        }
    }
};

// ---------------------------------------------------------------------------
// Meshes on [v_+, v_-]
// ---------------------------------------------------------------------------

inline std::vector<double> ns_base_mesh(double v_plus, double v_minus,
                                        double smooth_width) {
    std::vector<double> nodes;
    double wd = smooth_width;
    // indicator region [v_+, 2 v_+] with the smoothing breaks anchored
    std::vector<double> breaks = {v_plus, v_plus + wd, 2.0 * v_plus - wd, 2.0 * v_plus};
    for (std::size_t b = 0; b + 1 < breaks.size(); ++b) {
        double a = breaks[b], c = breaks[b + 1];
        int n = std::max(8, static_cast<int>(std::ceil((c - a) / (wd / 12.0))));
        for (int i = 0; i < n; ++i) nodes.push_back(a + (c - a) * i / n);
    }
    // log-spaced through the pressure layer, uniform top
    double mid = 0.5 * v_minus;
    if (2.0 * v_plus < mid) {
        int n = std::max(16, static_cast<int>(std::ceil(
                                 128.0 * std::log10(mid / (2.0 * v_plus)))));
        for (int i = 0; i < n; ++i)
            nodes.push_back(2.0 * v_plus * std::pow(mid / (2.0 * v_plus), double(i) / n));
    }
    int ntop = 768;
    double start = std::max(mid, 2.0 * v_plus);
    for (int i = 0; i <= ntop; ++i) nodes.push_back(start + (v_minus - start) * i / ntop);
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    return nodes;
}

inline std::vector<double> ns_projected_mesh(double v_plus, double v_minus,
                                             double smooth_width, double zeta,
                                             double ramp_top_plus, double ramp_top_minus,
                                             int nodes_per_decade = 48) {
    std::vector<double> nodes = ns_base_mesh(v_plus, v_minus, smooth_width);
    auto log_nodes = [&](double s0, double s1, std::vector<double>& out) {
        int n = std::max(4, static_cast<int>(std::ceil(
                                nodes_per_decade * std::log10(s1 / s0))));
        for (int i = 0; i <= n; ++i) out.push_back(s0 * std::pow(s1 / s0, double(i) / n));
    };
    std::vector<double> s_plus, s_minus;
    s_plus.push_back(zeta / 4.0);
    log_nodes(zeta / 4.0, std::max(ramp_top_plus, zeta), s_plus);
    s_minus.push_back(zeta / 4.0);
    log_nodes(zeta / 4.0, std::max(ramp_top_minus, zeta), s_minus);
    for (double d : s_plus) nodes.push_back(v_plus + d);
    for (double d : s_minus) nodes.push_back(v_minus - d);
    nodes.push_back(v_plus);
    nodes.push_back(v_minus);
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    while (!nodes.empty() && nodes.front() < v_plus) nodes.erase(nodes.begin());
    while (!nodes.empty() && nodes.back() > v_minus) nodes.pop_back();
    return nodes;
}

// ---------------------------------------------------------------------------
// Functionals
// ---------------------------------------------------------------------------

/// Ytilde((w,g)): the shift coefficient of the system entropy derivative.
inline double eval_shift_term_ns(const weight& wt, const ns_shock& sh,
                                 const sys_pert_fn& f, const quadrature_plan& plan) {
    const auto& pl = sh.pl;
    double pj = sh.p_jump;
    double sigma = sh.sigma;
    return plan.integrate([&](double y) {
        double w = f.w(y);
        if (!(w + y > 0.0)) throw vacuum_error("eval_shift_term_ns: w + y <= 0");
        double g = f.g(y);
        double b = sh.b(y);
        double dp = pl.dp(y);
        double t = wt.a1(b) * (dp / pj) * (pl.Q_rel(w + y, y) + 0.5 * g * g);
        t += wt.a0(b) * dp * (w - g / sigma);
        return t;
    });
}

inline double eval_shift_term_ns(const weight& wt, const ns_shock& sh,
                                 const sys_pert_fn& f, const std::vector<double>& mesh) {
    return eval_shift_term_ns(wt, sh, f, quadrature_plan::gauss_cells(mesh));
}

/// Linear part of the shift constraint: int a(b) p' w - (1/sigma) int a(b) p' g.
inline double eval_linear_constraint_ns(const weight& wt, const ns_shock& sh,
                                        const sys_pert_fn& f,
                                        const quadrature_plan& plan) {
    return plan.integrate([&](double y) {
        return wt.a0(sh.b(y)) * sh.pl.dp(y) * (f.w(y) - f.g(y) / sh.sigma);
    });
}

inline double eval_linear_constraint_ns(const weight& wt, const ns_shock& sh,
                                        const sys_pert_fn& f,
                                        const std::vector<double>& mesh) {
    return eval_linear_constraint_ns(wt, sh, f, quadrature_plan::gauss_cells(mesh));
}

struct bad_parts {
    double weight_d_p2 = 0.0;   // -(1/2[p]sigma) int a0'(b) p' |p(w+y)-p(y)|^2
    double rel_pressure = 0.0;  // -sigma int a0(b) p(w+y|y)
    double weight_dd = 0.0;     // -(1/2[p]^2) int a0''(b) (p')^2 q |...|^2
    double weight_d_mix = 0.0;  // -(1/2[p]) int a0'(b) (sigma + p'/sigma) |...|^2
    double total = 0.0;
};

inline bad_parts eval_bad_terms(const weight& wt, const ns_shock& sh,
                                const sys_pert_fn& f, const quadrature_plan& plan) {
    const auto& pl = sh.pl;
    double pj = sh.p_jump;
    double sigma = sh.sigma;
    bad_parts out;
    out.weight_d_p2 = -(0.5 / (pj * sigma)) * plan.integrate([&](double y) {
        double d = pl.p_diff(y, f.w(y));
        return wt.a1(sh.b(y)) * pl.dp(y) * d * d;
    });
    out.rel_pressure = -sigma * plan.integrate(
        [&](double y) { return wt.a0(sh.b(y)) * pl.p_rel(f.w(y) + y, y); });
    out.weight_dd = -(0.5 / (pj * pj)) * plan.integrate([&](double y) {
        double d = pl.p_diff(y, f.w(y));
        double dp = pl.dp(y);
        return wt.a2(sh.b(y)) * dp * dp * sh.q(y) * d * d;
    });
    out.weight_d_mix = -(0.5 / pj) * plan.integrate([&](double y) {
        double d = pl.p_diff(y, f.w(y));
        return wt.a1(sh.b(y)) * (sigma + pl.dp(y) / sigma) * d * d;
    });
    out.total = out.weight_d_p2 + out.rel_pressure + out.weight_dd + out.weight_d_mix;
    return out;
}

inline bad_parts eval_bad_terms(const weight& wt, const ns_shock& sh,
                                const sys_pert_fn& f, const std::vector<double>& mesh) {
    return eval_bad_terms(wt, sh, f, quadrature_plan::gauss_cells(mesh));
}

struct good_parts {
    double effective = 0.0;   // -(sigma/2[p]) int a0'(b) p' (g - (p(w+y)-p(y))/sigma)^2
    double rel_entropy = 0.0; // -(sigma/[p]) int a0'(b) p' Q(w+y|y)
    double gradient = 0.0;    // -int a0(b) |p'(w+y) w_y + p'(w+y) - p'(y)|^2 q
    double total = 0.0;
};

inline good_parts eval_good_terms(const weight& wt, const ns_shock& sh,
                                  const sys_pert_fn& f, const quadrature_plan& plan) {
    const auto& pl = sh.pl;
    double pj = sh.p_jump;
    double sigma = sh.sigma;
    good_parts out;
    out.effective = -(0.5 * sigma / pj) * plan.integrate([&](double y) {
        double d = f.g(y) - pl.p_diff(y, f.w(y)) / sigma;
        return wt.a1(sh.b(y)) * pl.dp(y) * d * d;
    });
    out.rel_entropy = -(sigma / pj) * plan.integrate(
        [&](double y) { return wt.a1(sh.b(y)) * pl.dp(y) * pl.Q_rel(f.w(y) + y, y); });
    out.gradient = -plan.integrate([&](double y) {
        double w = f.w(y);
        double d = pl.dp(w + y) * f.wy(y) + pl.dp_diff(y, w);
        return wt.a0(sh.b(y)) * d * d * sh.q(y);
    });
    out.total = out.effective + out.rel_entropy + out.gradient;
    return out;
}

inline good_parts eval_good_terms(const weight& wt, const ns_shock& sh,
                                  const sys_pert_fn& f, const std::vector<double>& mesh) {
    return eval_good_terms(wt, sh, f, quadrature_plan::gauss_cells(mesh));
}

struct sys_quad_form {
    double j1 = 0.0;
    double j2 = 0.0;
    double j3 = 0.0;
    double f = 0.0;
};

/// F((w,g)) = J1 + J2 + J3: the epsilon^2 coefficient of the system entropy
/// derivative. J2 is the positive term.
inline sys_quad_form eval_quadratic_form_ns(const weight& wt, const ns_shock& sh,
                                            const sys_pert_fn& f,
                                            const quadrature_plan& plan) {
    const auto& pl = sh.pl;
    double pj = sh.p_jump;
    double sigma = sh.sigma;
    sys_quad_form out;
    out.j1 = -(0.5 * sigma / pj) * plan.integrate([&](double y) {
            double dp = pl.dp(y);
            double w = f.w(y);
            return wt.a1(sh.b(y)) * dp * dp * w * w;
        });
    out.j1 += plan.integrate([&](double y) {
            double dpw = pl.ddp(y) * f.w(y) + pl.dp(y) * f.wy(y); // (p' w)_y
            return wt.a0(sh.b(y)) * dpw * dpw * sh.q(y);
        });
    out.j2 = -(0.5 * sigma) * plan.integrate([&](double y) {
            double w = f.w(y);
            return wt.a0(sh.b(y)) * pl.ddp(y) * w * w;
        });
    double t1 = -(0.5 / (pj * sigma)) * plan.integrate([&](double y) {
            double dp = pl.dp(y);
            double w = f.w(y);
            return wt.a1(sh.b(y)) * dp * dp * dp * w * w;
        });
    double t2 = -(0.5 / (pj * pj)) * plan.integrate([&](double y) {
            double dp = pl.dp(y);
            double w = f.w(y);
            return wt.a2(sh.b(y)) * dp * dp * dp * dp * sh.q(y) * w * w;
        });
    double t3 = -(0.5 / pj) * plan.integrate([&](double y) {
            double dp = pl.dp(y);
            double w = f.w(y);
            return wt.a1(sh.b(y)) * (sigma + dp / sigma) * dp * dp * w * w;
        });
    double t4 = (0.5 * sigma / pj) * plan.integrate([&](double y) {
            double d = f.g(y) - pl.dp(y) * f.w(y) / sigma;
            return wt.a1(sh.b(y)) * pl.dp(y) * d * d;
        });
    out.j3 = t1 + t2 + t3 + t4;
    out.f = out.j1 + out.j2 + out.j3;
    return out;
}

inline sys_quad_form eval_quadratic_form_ns(const weight& wt, const ns_shock& sh,
                                            const sys_pert_fn& f,
                                            const std::vector<double>& mesh) {
    return eval_quadratic_form_ns(wt, sh, f, quadrature_plan::gauss_cells(mesh));
}

// ---------------------------------------------------------------------------
// Construction
// ---------------------------------------------------------------------------

/// Smoothed indicator of [v_+, 2 v_+] with smoothstep collars of the given
/// width folded inside the interval.
inline std::function<double(double)> smoothed_indicator(double v_plus, double width) {
    return [v_plus, width](double y) {
        if (y <= v_plus || y >= 2.0 * v_plus) return 0.0;
        double up = smoothstep((y - v_plus) / width);
        double down = smoothstep((2.0 * v_plus - y) / width);
        return up * down;
    };
}

/// alpha = sigma int a(b) dy / int a(b) p' chi dy, computed against the
/// smoothed indicator so the linear shift constraint holds exactly for the
/// default pair (w, g) = (1/p', alpha chi).
inline double compute_alpha(const weight& wt, const ns_shock& sh,
                            const std::function<double(double)>& chi,
                            const std::vector<double>& mesh) {
    if (!(2.0 * sh.v_plus < sh.v_minus))
        throw interval_error("compute_alpha: need 2 v_+ < v_-");
    double num = sh.sigma *
                 integrate_cells([&](double y) { return wt.a0(sh.b(y)); }, mesh);
    double den = integrate_cells(
        [&](double y) { return wt.a0(sh.b(y)) * sh.pl.dp(y) * chi(y); }, mesh);
    return num / den;
}

/// Max over the mesh of |q(y) p'(y)| / |sigma| (the profile-slope bound).
inline double q_bound_ratio(const ns_shock& sh, const std::vector<double>& mesh) {
    double m = 0.0;
    for (double y : mesh) {
        if (!(y > sh.v_plus && y < sh.v_minus)) continue;
        m = std::max(m, std::abs(sh.q(y) * sh.pl.dp(y)) / std::abs(sh.sigma));
    }
    return m;
}

/// Default destabilizing pair: w = 1/p', g = alpha * smoothed indicator.
inline system_perturbation build_base_perturbation_ns(const weight& wt,
                                                      const ns_shock& sh,
                                                      double smooth_frac = 0.1) {
    system_perturbation p;
    p.v_plus = sh.v_plus;
    p.v_minus = sh.v_minus;
    p.smooth_width = smooth_frac * sh.v_plus;
    p.mesh = ns_base_mesh(sh.v_plus, sh.v_minus, p.smooth_width);

    auto chi = smoothed_indicator(sh.v_plus, p.smooth_width);
    p.alpha = compute_alpha(wt, sh, chi, p.mesh);
    pressure_law pl = sh.pl;
    p.fn.w = [pl](double y) { return 1.0 / pl.dp(y); };
    p.fn.wy = [pl](double y) {
        double dp = pl.dp(y);
        return -pl.ddp(y) / (dp * dp);
    };
    double alpha = p.alpha;
    p.fn.g = [alpha, chi](double y) { return alpha * chi(y); };

    double mid = 0.5 * (sh.v_plus + sh.v_minus);
    double rad = 0.125 * (sh.v_minus - sh.v_plus);
    p.phi.w = [mid, rad](double y) { return bump((y - mid) / rad); };
    p.phi.wy = [mid, rad](double y) { return bump_deriv((y - mid) / rad) / rad; };
    p.sample();
    return p;
}

/// Correction shape for the system kernel projection: x0 = psi / p' with psi
/// a bump supported right of the indicator [v_+, 2v_+], so (p' x0)' = psi'
/// stays moderate and the q-weighted term of J1 is barely disturbed.
inline scalar_pert_fn ns_projection_bump(const ns_shock& sh) {
    double span = sh.v_minus - sh.v_plus;
    double lo = std::min(std::max(2.2 * sh.v_plus, sh.v_plus + 0.3 * span),
                         sh.v_plus + 0.6 * span);
    double hi = sh.v_plus + 0.95 * span;
    double mid = 0.5 * (lo + hi);
    double rad = 0.5 * (hi - lo);
    pressure_law pl = sh.pl;
    scalar_pert_fn x0;
    x0.w = [mid, rad, pl](double y) { return bump((y - mid) / rad) / pl.dp(y); };
    x0.wy = [mid, rad, pl](double y) {
        double dp = pl.dp(y);
        return bump_deriv((y - mid) / rad) / (rad * dp) -
               bump((y - mid) / rad) * pl.ddp(y) / (dp * dp);
    };
    return x0;
}

/// Compact-support projection of both components, constraint restored through
/// the w component. The ramp toward v_- spans many decades up to span/8; the
/// ramp toward v_+ is kept short so it does not overlap the g indicator.
inline system_perturbation project_system_to_compact_support(const weight& wt,
                                                             const ns_shock& sh,
                                                             const system_perturbation& base,
                                                             double delta) {
    double span = sh.v_minus - sh.v_plus;
    if (!(delta > 0.0) || delta >= span / 8.0)
        throw taper_error("system taper collar must satisfy 0 < delta < (v_- - v_+)/8");
    double zeta = 0.5 * delta;
    double top_minus = span / 8.0;
    double top_plus = std::min(span / 8.0, std::max(8.0 * delta, 1e-3 * sh.v_plus));
    detail::log_taper taper_p(zeta, top_plus);
    detail::log_taper taper_m(zeta, top_minus);
    double vp = sh.v_plus, vm = sh.v_minus;
    auto T = [taper_p, taper_m, vp, vm](double y) {
        return taper_p.value(y - vp) * taper_m.value(vm - y);
    };
    auto Ty = [taper_p, taper_m, vp, vm](double y) {
        return taper_p.deriv(y - vp) * taper_m.value(vm - y) -
               taper_p.value(y - vp) * taper_m.deriv(vm - y);
    };

    auto wfun = base.fn.w;
    auto wyfun = base.fn.wy;
    auto gfun = base.fn.g;
    sys_pert_fn q0;
    q0.w = [wfun, T](double y) { return T(y) * wfun(y); };
    q0.wy = [wfun, wyfun, T, Ty](double y) { return Ty(y) * wfun(y) + T(y) * wyfun(y); };
    q0.g = [gfun, T](double y) { return T(y) * gfun(y); };

    system_perturbation out = base;
    out.delta = delta;
    out.mesh = ns_projected_mesh(sh.v_plus, sh.v_minus, base.smooth_width, zeta,
                                 top_plus, top_minus);

    scalar_pert_fn cb = ns_projection_bump(sh);
    sys_pert_fn x0{cb.w, cb.wy, [](double) { return 0.0; }};
    double ix0 = eval_linear_constraint_ns(wt, sh, x0, out.mesh);
    if (std::abs(ix0) < 1e-300)
        throw degenerate_phi_error("system projection bump has vanishing weighted mass");
    double defect = eval_linear_constraint_ns(wt, sh, q0, out.mesh);
    double c = defect / ix0;
    out.fn.w = [q0, c, cb](double y) { return q0.w(y) - c * cb.w(y); };
    out.fn.wy = [q0, c, cb](double y) { return q0.wy(y) - c * cb.wy(y); };
    out.fn.g = q0.g;
    out.sample();
    return out;
}

/// Solves Ytilde(eps w + eps^2 lambda phi, eps g) = 0 for lambda near the
/// linearized multiplier.
inline system_perturbation solve_system_shift(const weight& wt, const ns_shock& sh,
                                              const system_perturbation& base,
                                              double eps) {
    if (!(eps > 0.0)) throw domain_error("solve_system_shift: eps must be positive");
    const auto& mesh = base.mesh;
    const auto& pl = sh.pl;
    double pj = sh.p_jump;
    sys_pert_fn phi3{base.phi.w, base.phi.wy, [](double) { return 0.0; }};
    double iphi = integrate_cells(
        [&](double y) { return wt.a0(sh.b(y)) * pl.dp(y) * base.phi.w(y); }, mesh);
    if (std::abs(iphi) < 1e-300)
        throw degenerate_phi_error("system shift: int a p' phi vanishes");
    // linearized multiplier from the implicit-function expansion: the
    // quadratic relative-entropy term contributes (p')^2 w^2 / (2 [p])
    double num = integrate_cells(
        [&](double y) {
            double dp = pl.dp(y);
            double w = base.fn.w(y);
            double g = base.fn.g(y);
            return wt.a1(sh.b(y)) *
                   (dp * dp / (2.0 * pj) * w * w - dp / (2.0 * pj) * g * g);
        },
        mesh);
    double lambda_star = num / iphi;

    auto wfun = base.fn.w;
    auto wyfun = base.fn.wy;
    auto gfun = base.fn.g;
    auto pfun = base.phi.w;
    auto pyfun = base.phi.wy;
    auto make = [&](double lam) {
        sys_pert_fn f;
        f.w = [wfun, pfun, eps, lam](double y) {
            return eps * wfun(y) + eps * eps * lam * pfun(y);
        };
        f.wy = [wyfun, pyfun, eps, lam](double y) {
            return eps * wyfun(y) + eps * eps * lam * pyfun(y);
        };
        f.g = [gfun, eps](double y) { return eps * gfun(y); };
        return f;
    };
    auto yval = [&](double lam) { return eval_shift_term_ns(wt, sh, make(lam), mesh); };

    double step = 0.5 * std::max(std::abs(lambda_star), 1e-3);
    bracket br = expand_bracket(yval, lambda_star, step);
    double lam = bisect(yval, br.lo, br.hi, 1e-15 * std::max(1.0, std::abs(lambda_star)));

    system_perturbation out = base;
    out.eps = eps;
    out.lambda = lam;
    out.lambda_star = lambda_star;
    out.fn = make(lam);
    out.sample();

    double vmin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < out.mesh.size(); ++i)
        vmin = std::min(vmin, out.mesh[i] + out.w_nodes[i]);
    if (!(vmin > 0.0)) throw vacuum_error("solve_system_shift: v + w is not positive");
    return out;
}

// ---------------------------------------------------------------------------
// Sweep over v_+
// ---------------------------------------------------------------------------

struct sweep_row {
    double v_plus = 0.0;
    double sigma = 0.0;
    double p_jump = 0.0;
    double alpha = 0.0;
    double j1 = 0.0, j2 = 0.0, j3 = 0.0, f = 0.0;
    double d_j1 = 0.0;    // |J1| [p] / |sigma|
    double d_j2 = 0.0;    // J2 / |sigma|
    double d_j3 = 0.0;    // |J3| [p] / |sigma|
    double d_alpha = 0.0; // |alpha| sqrt(p(v_+))
    double q_ratio = 0.0; // max |q p'| / |sigma|
    std::string error;
};

struct sweep_result {
    std::vector<sweep_row> rows;
    std::optional<double> v_star; // smallest swept v_+ with F > 0
};

inline sweep_result sweep_vplus(const pressure_law& pl, const weight& wt,
                                double v_minus, double u_minus,
                                const std::vector<double>& v_plus_list,
                                int threads = 1) {
    auto eval_cell = [&](double vp) {
        sweep_row row;
        row.v_plus = vp;
        try {
            // cap the profile sample count; the functionals are quadratures in
            // the shock variable and do not depend on the xi resolution
            double spacing = 0.0;
            {
                ns_shock probe;
                probe.pl = pl;
                probe.v_minus = v_minus;
                probe.v_plus = vp;
                probe.p_jump = pl.p(vp) - pl.p(v_minus);
                probe.sigma = -std::sqrt(-probe.p_jump / (vp - v_minus));
                double rl = probe.q_deriv(v_minus), rr = probe.q_deriv(vp);
                double need = std::log((v_minus - vp) / (1e-10 * (v_minus - vp)));
                double hw = 1.25 * need * (1.0 / std::min(rl, -rr) + 0.2 / std::max(rl, -rr));
                spacing = std::max(std::min(0.05 * (v_minus - vp), 0.1 / rl), hw / 20000.0);
            }
            ns_shock sh = solve_ns_profile(pl, v_minus, u_minus, vp, 0.0, spacing);
            row.sigma = sh.sigma;
            row.p_jump = sh.p_jump;
            system_perturbation base = build_base_perturbation_ns(wt, sh);
            row.alpha = base.alpha;
            sys_quad_form qf = eval_quadratic_form_ns(wt, sh, base.fn, base.mesh);
            row.j1 = qf.j1;
            row.j2 = qf.j2;
            row.j3 = qf.j3;
            row.f = qf.f;
            double s = std::abs(sh.sigma);
            row.d_j1 = std::abs(qf.j1) * sh.p_jump / s;
            row.d_j2 = qf.j2 / s;
            row.d_j3 = std::abs(qf.j3) * sh.p_jump / s;
            row.d_alpha = std::abs(base.alpha) * std::sqrt(pl.p(vp));
            row.q_ratio = q_bound_ratio(sh, base.mesh);
        } catch (const error& e) {
            row.error = e.what();
        }
        return row;
    };

    sweep_result res;
    if (threads > 1 && v_plus_list.size() > 1) {
        std::vector<std::future<sweep_row>> futs;
        for (double vp : v_plus_list)
            futs.push_back(std::async(std::launch::async, eval_cell, vp));
        for (auto& f : futs) res.rows.push_back(f.get());
    } else {
        for (double vp : v_plus_list) res.rows.push_back(eval_cell(vp));
    }

    double smallest = std::numeric_limits<double>::infinity();
    for (const auto& r : res.rows)
        if (r.error.empty()) smallest = std::min(smallest, r.v_plus);
    for (const auto& r : res.rows)
        if (r.error.empty() && r.v_plus == smallest && r.f > 0.0) res.v_star = r.v_plus;
    return res;
}

} // namespace ashock

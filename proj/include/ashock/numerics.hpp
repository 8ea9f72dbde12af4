#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "ashock/errors.hpp"

namespace ashock {

inline constexpr double golden_ratio = 0.6180339887498949;

// ---------------------------------------------------------------------------
// Shape functions
// ---------------------------------------------------------------------------

/// Cubic smoothstep on [0,1]: s(0)=0, s(1)=1, s'(0)=s'(1)=0.
inline double smoothstep(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    return t * t * (3.0 - 2.0 * t);
}

inline double smoothstep_deriv(double t) {
    if (t <= 0.0 || t >= 1.0) return 0.0;
    return 6.0 * t * (1.0 - t);
}

/// Standard C-infinity bump, supported on |t| < 1, value e^{-1} at t = 0.
inline double bump(double t) {
    double t2 = t * t;
    if (t2 >= 1.0) return 0.0;
    return std::exp(1.0 / (t2 - 1.0));
}

inline double bump_deriv(double t) {
    double t2 = t * t;
    if (t2 >= 1.0) return 0.0;
    double d = t2 - 1.0;
    return std::exp(1.0 / d) * (-2.0 * t / (d * d));
}

inline double bump_deriv2(double t) {
    double t2 = t * t;
    if (t2 >= 1.0) return 0.0;
    double d = t2 - 1.0;
    double phi1 = -2.0 * t / (d * d);
    double phi2 = -2.0 / (d * d) + 8.0 * t2 / (d * d * d);
    return std::exp(1.0 / d) * (phi1 * phi1 + phi2);
}

// ---------------------------------------------------------------------------
// Root finding and 1-D minimization
// ---------------------------------------------------------------------------

/// Bisection on a sign change. Requires f(lo), f(hi) of opposite sign.
inline double bisect(const std::function<double(double)>& f, double lo, double hi,
                     double xtol, int max_iter = 200) {
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if (std::signbit(flo) == std::signbit(fhi))
        throw bracket_error("bisect: no sign change in bracket");
    for (int i = 0; i < max_iter; ++i) {
        double mid = 0.5 * (lo + hi);
        double fm = f(mid);
        if (fm == 0.0 || 0.5 * (hi - lo) < xtol) return mid;
        if (std::signbit(fm) == std::signbit(flo)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

struct bracket {
    double lo = 0.0;
    double hi = 0.0;
};

/// Expand a bracket around `center` until f changes sign. Throws bracket_error
/// if no sign change is found within `max_expand` doublings.
inline bracket expand_bracket(const std::function<double(double)>& f, double center,
                              double step, int max_expand = 60) {
    double fc = f(center);
    if (fc == 0.0) return {center, center};
    for (int i = 0; i < max_expand; ++i) {
        double lo = center - step;
        double hi = center + step;
        if (std::signbit(f(lo)) != std::signbit(fc)) return {lo, center};
        if (std::signbit(f(hi)) != std::signbit(fc)) return {center, hi};
        step *= 2.0;
    }
    throw bracket_error("expand_bracket: no sign change found");
}

/// Golden-section minimization of a unimodal-ish function on [a,b].
inline double golden_min(const std::function<double(double)>& f, double a, double b,
                         double xtol, int max_iter = 200) {
    double x1 = b - golden_ratio * (b - a);
    double x2 = a + golden_ratio * (b - a);
    double f1 = f(x1);
    double f2 = f(x2);
    for (int i = 0; i < max_iter && (b - a) > xtol; ++i) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - golden_ratio * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + golden_ratio * (b - a);
            f2 = f(x2);
        }
    }
    return f1 <= f2 ? x1 : x2;
}

// ---------------------------------------------------------------------------
// Quadrature
// ---------------------------------------------------------------------------

/// Composite 2-point Gauss-Legendre over the cells of a sorted node vector.
/// Exact for cubics per cell, O(h^4) globally.
inline double integrate_cells(const std::function<double(double)>& f,
                              const std::vector<double>& nodes) {
    // abscissae +-1/sqrt(3) on [-1,1]
    constexpr double c = 0.5773502691896257;
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
        double a = nodes[i];
        double b = nodes[i + 1];
        double mid = 0.5 * (a + b);
        double half = 0.5 * (b - a);
        sum += half * (f(mid - c * half) + f(mid + c * half));
    }
    return sum;
}

/// Evaluation points and weights of a composite quadrature. Two flavors:
/// Gauss points inside each cell (for integrands with closed-form
/// evaluators), or the nodes themselves with 4th-order nodal weights (for
/// integrands only known exactly at the nodes, e.g. transported states).
struct quadrature_plan {
    std::vector<double> points;
    std::vector<double> weights;

    double integrate(const std::function<double(double)>& f) const {
        double s = 0.0;
        for (std::size_t i = 0; i < points.size(); ++i) s += weights[i] * f(points[i]);
        return s;
    }

    static quadrature_plan gauss_cells(const std::vector<double>& nodes) {
        constexpr double c = 0.5773502691896257;
        quadrature_plan p;
        p.points.reserve(2 * nodes.size());
        p.weights.reserve(2 * nodes.size());
        for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
            double mid = 0.5 * (nodes[i] + nodes[i + 1]);
            double half = 0.5 * (nodes[i + 1] - nodes[i]);
            p.points.push_back(mid - c * half);
            p.weights.push_back(half);
            p.points.push_back(mid + c * half);
            p.weights.push_back(half);
        }
        return p;
    }

    /// Nodal composite rule: each interval integrates the Lagrange cubic
    /// through its four surrounding nodes; O(h^4) on smooth data, evaluates
    /// only at the given nodes.
    static quadrature_plan nodal4(const std::vector<double>& nodes) {
        quadrature_plan p;
        std::size_t n = nodes.size();
        p.points = nodes;
        p.weights.assign(n, 0.0);
        if (n < 4) {
            for (std::size_t i = 0; i + 1 < n; ++i) {
                double half = 0.5 * (nodes[i + 1] - nodes[i]);
                p.weights[i] += half;
                p.weights[i + 1] += half;
            }
            return p;
        }
        // 3-point Gauss per interval, exact for the cubic basis
        static constexpr double gx[3] = {0.1127016653792583, 0.5, 0.8872983346207417};
        static constexpr double gw[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
        for (std::size_t i = 0; i + 1 < n; ++i) {
            std::size_t s0 = (i == 0) ? 0 : (i + 2 >= n ? n - 4 : i - 1);
            double a = nodes[i], b = nodes[i + 1];
            for (int k = 0; k < 4; ++k) {
                double xk = nodes[s0 + k];
                double wk = 0.0;
                for (int g = 0; g < 3; ++g) {
                    double x = a + (b - a) * gx[g];
                    double L = 1.0;
                    for (int m = 0; m < 4; ++m) {
                        if (m == k) continue;
                        L *= (x - nodes[s0 + m]) / (xk - nodes[s0 + m]);
                    }
                    wk += gw[g] * L;
                }
                p.weights[s0 + k] += (b - a) * wk;
            }
        }
        return p;
    }
};

/// 5-point Gauss-Legendre on [0,1]; used for the Taylor-integral forms of
/// relative quantities, which avoid the catastrophic cancellation of
/// f(u) - f(v) for nearby states.
template <typename F>
inline double gauss5_01(F&& f) {
    static constexpr double x[5] = {0.046910077030668004, 0.230765344947158450,
                                    0.5, 0.769234655052841550, 0.953089922969331996};
    static constexpr double w[5] = {0.118463442528094544, 0.239314335249683234,
                                    0.284444444444444444, 0.239314335249683234,
                                    0.118463442528094544};
    double s = 0.0;
    for (int i = 0; i < 5; ++i) s += w[i] * f(x[i]);
    return s;
}

namespace detail {
inline double adaptive_simpson_rec(const std::function<double(double)>& f, double a,
                                   double b, double fa, double fm, double fb,
                                   double whole, double tol, int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m);
    double rm = 0.5 * (m + b);
    double flm = f(lm);
    double frm = f(rm);
    double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}
} // namespace detail

/// Adaptive Simpson with absolute tolerance `tol`.
inline double adaptive_simpson(const std::function<double(double)>& f, double a,
                               double b, double tol, int max_depth = 40) {
    if (a == b) return 0.0;
    double fa = f(a);
    double fb = f(b);
    double fm = f(0.5 * (a + b));
    double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    double floor_tol = std::max(tol, std::abs(whole) * 1e-14);
    return detail::adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, floor_tol, max_depth);
}

/// 4th-order composite rule for uniformly sampled data (extended closed rule;
/// needs at least 8 samples).
inline double integrate_uniform(const std::vector<double>& y, double h) {
    std::size_t n = y.size();
    if (n < 8) {
        // trapezoid fallback for tiny arrays
        double s = 0.0;
        for (std::size_t i = 0; i + 1 < n; ++i) s += 0.5 * (y[i] + y[i + 1]);
        return s * h;
    }
    constexpr double w0 = 17.0 / 48.0, w1 = 59.0 / 48.0, w2 = 43.0 / 48.0, w3 = 49.0 / 48.0;
    double s = w0 * (y[0] + y[n - 1]) + w1 * (y[1] + y[n - 2]) + w2 * (y[2] + y[n - 3]) +
               w3 * (y[3] + y[n - 4]);
    for (std::size_t i = 4; i + 4 < n; ++i) s += y[i];
    return s * h;
}

// ---------------------------------------------------------------------------
// Meshes
// ---------------------------------------------------------------------------

/// Mesh on [a,b] graded geometrically toward both endpoints: first cells of
/// widths edge_a resp. edge_b grow by `ratio` until the interior target width
/// is reached; the middle is uniform. Used for integrands with endpoint
/// layers on widely separated scales.
inline std::vector<double> graded_mesh(double a, double b, double edge_a, double edge_b,
                                       double h_interior, double ratio = 1.15) {
    if (!(b > a)) throw domain_error("graded_mesh: empty interval");
    double span = b - a;
    h_interior = std::min(h_interior, span / 16.0);
    edge_a = std::min(edge_a, h_interior);
    edge_b = std::min(edge_b, h_interior);

    std::vector<double> left, right;
    left.push_back(a);
    double h = edge_a;
    double x = a;
    while (h < h_interior && x + h < a + 0.45 * span) {
        x += h;
        left.push_back(x);
        h *= ratio;
    }
    right.push_back(b);
    h = edge_b;
    double z = b;
    while (h < h_interior && z - h > b - 0.45 * span) {
        z -= h;
        right.push_back(z);
        h *= ratio;
    }
    double lo = left.back();
    double hi = right.back();
    int n_mid = std::max(1, static_cast<int>(std::ceil((hi - lo) / h_interior)));
    std::vector<double> nodes = left;
    for (int i = 1; i < n_mid; ++i) nodes.push_back(lo + (hi - lo) * i / n_mid);
    for (auto it = right.rbegin(); it != right.rend(); ++it) nodes.push_back(*it);
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    return nodes;
}

/// Uniform node vector with n cells on [a,b].
inline std::vector<double> uniform_mesh(double a, double b, int n_cells) {
    std::vector<double> nodes(n_cells + 1);
    for (int i = 0; i <= n_cells; ++i) nodes[i] = a + (b - a) * i / n_cells;
    return nodes;
}

/// Refine a mesh by splitting every cell into `k` equal parts.
inline std::vector<double> refine_mesh(const std::vector<double>& nodes, int k) {
    std::vector<double> out;
    out.reserve((nodes.size() - 1) * k + 1);
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
        for (int j = 0; j < k; ++j)
            out.push_back(nodes[i] + (nodes[i + 1] - nodes[i]) * j / k);
    }
    out.push_back(nodes.back());
    return out;
}

} // namespace ashock

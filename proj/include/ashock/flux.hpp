#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>

#include "ashock/errors.hpp"
#include "ashock/numerics.hpp"

namespace ashock {

/// A smooth strictly convex scalar flux with derivative evaluators up to third
/// order on a declared interval. Normalized so A(0) = 0 and A'(0) = 0.
struct flux_function {
    std::string id;
    double lo = 0.0;
    double hi = 0.0;
    double convexity_tol = 1e-12;
    std::function<double(double)> f0, f1, f2, f3;

    void check_domain(double u) const {
        if (!(u >= lo && u <= hi))
            throw domain_error("flux '" + id + "': argument " + std::to_string(u) +
                               " outside declared interval");
    }

    double A(double u) const { check_domain(u); return f0(u); }
    double A1(double u) const { check_domain(u); return f1(u); }
    double A2(double u) const { check_domain(u); return f2(u); }
    double A3(double u) const { check_domain(u); return f3(u); }

    /// Relative flux A(u|v) = A(u) - A(v) - A'(v)(u - v). For nearby states
    /// the Taylor-integral form d^2 int (1-t) A''(v + t d) dt avoids the
    /// cancellation of the direct difference.
    double rel(double u, double v) const {
        double d = u - v;
        if (std::abs(d) <= 0.1) {
            check_domain(u);
            check_domain(v);
            return d * d * gauss5_01([&](double t) { return (1.0 - t) * f2(v + t * d); });
        }
        return A(u) - A(v) - A1(v) * (u - v);
    }

    /// Third derivative of the entropy flux G for eta(u) = u^2, G' = 2 u A'.
    double entropy_flux_d3(double u) const { return 4.0 * A2(u) + 2.0 * u * A3(u); }

    /// Strict convexity on a dense grid of the declared interval.
    bool convex_on_grid(int n = 10000) const {
        for (int i = 0; i <= n; ++i) {
            double u = lo + (hi - lo) * i / n;
            if (!(f2(u) > convexity_tol)) return false;
        }
        return true;
    }

    /// Finite-difference agreement of A', A'', A''' with A at a sample point.
    /// Steps are chosen per derivative order to balance truncation against
    /// roundoff in the divided differences.
    double derivative_residual(double u) const {
        double s = std::max(1.0, std::abs(u));
        double h1 = 1e-6 * s, h2 = 1e-4 * s, h3 = 5e-4 * s;
        double d1 = (f0(u + h1) - f0(u - h1)) / (2 * h1);
        double d2 = (f0(u + h2) - 2 * f0(u) + f0(u - h2)) / (h2 * h2);
        double d3 = (f0(u + 2 * h3) - 2 * f0(u + h3) + 2 * f0(u - h3) - f0(u - 2 * h3)) /
                    (2 * h3 * h3 * h3);
        double mag = std::max(1.0, std::abs(f0(u)));
        double r1 = std::abs(d1 - f1(u)) / std::max(mag, std::abs(f1(u)));
        double r2 = std::abs(d2 - f2(u)) / std::max(mag, std::abs(f2(u)));
        double r3 = std::abs(d3 - f3(u)) / std::max(mag, std::abs(f3(u)));
        return std::max({r1, r2, r3});
    }
};

/// A(u) = e^{-u} + u - 1. Super-polynomial growth of |A'| on the negative
/// axis; the declared interval keeps e^{|u|} within double range.
inline flux_function exponential_flux() {
    flux_function f;
    f.id = "exponential";
    f.lo = -80.0;
    f.hi = 5.0;
    f.f0 = [](double u) { return std::expm1(-u) + u; };
    f.f1 = [](double u) { return 1.0 - std::exp(-u); };
    f.f2 = [](double u) { return std::exp(-u); };
    f.f3 = [](double u) { return -std::exp(-u); };
    return f;
}

inline flux_function burgers_flux() {
    flux_function f;
    f.id = "burgers";
    f.lo = -1e7;
    f.hi = 1e7;
    f.f0 = [](double u) { return 0.5 * u * u; };
    f.f1 = [](double u) { return u; };
    f.f2 = [](double) { return 1.0; };
    f.f3 = [](double) { return 0.0; };
    return f;
}

inline flux_function quartic_flux() {
    flux_function f;
    f.id = "quartic";
    f.lo = -1e3;
    f.hi = 1e3;
    f.f0 = [](double u) { return u * u * u * u / 12.0 + 0.5 * u * u; };
    f.f1 = [](double u) { return u * u * u / 3.0 + u; };
    f.f2 = [](double u) { return u * u + 1.0; };
    f.f3 = [](double u) { return 2.0 * u; };
    return f;
}

inline flux_function make_flux(const std::string& id) {
    if (id == "exponential") return exponential_flux();
    if (id == "burgers") return burgers_flux();
    if (id == "quartic") return quartic_flux();
    throw config_error("unknown flux id '" + id + "'");
}

/// Chord slope of the flux between two end states.
inline double rankine_hugoniot_speed(const flux_function& f, double u_minus,
                                     double u_plus) {
    if (u_minus == u_plus)
        throw degenerate_shock_error("equal end states");
    return (f.A(u_plus) - f.A(u_minus)) / (u_plus - u_minus);
}

/// Searches [search_limit, 0) for a point where |A'| exceeds every polynomial
/// of the given degree with coefficients bounded by coefficient_bound, i.e.
/// |A'(x)| > bound * sum_j |x|^j. Returns the witness of smallest |x| found on
/// the scan grid, or nothing.
inline std::optional<double> superpoly_witness(const flux_function& f, int degree,
                                               double coefficient_bound,
                                               double search_limit, int n_grid = 20000) {
    if (degree < 0 || !(search_limit < 0.0))
        throw domain_error("superpoly_witness: need degree >= 0 and search_limit < 0");
    double lo = std::max(search_limit, f.lo);
    for (int i = 1; i <= n_grid; ++i) {
        double x = lo * i / n_grid;
        double poly = 0.0;
        double p = 1.0;
        for (int j = 0; j <= degree; ++j) {
            poly += p;
            p *= -x;
        }
        poly *= coefficient_bound;
        if (std::abs(f.A1(x)) > poly) return x;
    }
    return std::nullopt;
}

/// Finds x < 0 with A'(theta x) < 0 and A'(x)/A'(theta x) >= target, scanning
/// down to search_limit. Witnesses the growth ratio used for the speed bound.
inline std::optional<double> phi_growth_witness(const flux_function& f, double theta,
                                                double target, double search_limit,
                                                int n_grid = 20000) {
    if (!(theta > 0.0 && theta < 1.0))
        throw domain_error("phi_growth_witness: theta must lie in (0,1)");
    double lo = std::max(search_limit, f.lo);
    for (int i = 1; i <= n_grid; ++i) {
        double x = lo * i / n_grid;
        double denom = f.A1(theta * x);
        if (!(denom < 0.0)) continue;
        if (f.A1(x) / denom >= target) return x;
    }
    return std::nullopt;
}

/// Pressure law p(v) = v^{-gamma} with its entropy flux Q, Q' = -p.
struct pressure_law {
    double gamma = 5.0 / 3.0;

    void check_domain(double v) const {
        if (!(v > 0.0)) throw vacuum_error("pressure evaluated at v <= 0");
    }
    double p(double v) const { check_domain(v); return std::pow(v, -gamma); }
    double dp(double v) const { check_domain(v); return -gamma * std::pow(v, -gamma - 1.0); }
    double ddp(double v) const {
        check_domain(v);
        return gamma * (gamma + 1.0) * std::pow(v, -gamma - 2.0);
    }
    double Q(double v) const { check_domain(v); return std::pow(v, 1.0 - gamma) / (gamma - 1.0); }
    /// Q(u|v) = Q(u) - Q(v) - Q'(v)(u - v) with Q' = -p. Taylor-integral form
    /// (Q'' = -p') for nearby states, avoiding cancellation.
    double Q_rel(double u, double v) const {
        double d = u - v;
        if (std::abs(d) <= 0.1 * v) {
            check_domain(u);
            return d * d * gauss5_01([&](double t) { return -(1.0 - t) * dp(v + t * d); });
        }
        return Q(u) - Q(v) + p(v) * (u - v);
    }
    /// p(u|v) = p(u) - p(v) - p'(v)(u - v).
    double p_rel(double u, double v) const {
        double d = u - v;
        if (std::abs(d) <= 0.1 * v) {
            check_domain(u);
            return d * d * gauss5_01([&](double t) { return (1.0 - t) * ddp(v + t * d); });
        }
        return p(u) - p(v) - dp(v) * (u - v);
    }
    /// p(v + d) - p(v) without cancellation for small d.
    double p_diff(double v, double d) const {
        if (std::abs(d) <= 0.1 * v)
            return d * gauss5_01([&](double t) { return dp(v + t * d); });
        return p(v + d) - p(v);
    }
    /// p'(v + d) - p'(v) without cancellation for small d.
    double dp_diff(double v, double d) const {
        if (std::abs(d) <= 0.1 * v)
            return d * gauss5_01([&](double t) { return ddp(v + t * d); });
        return dp(v + d) - dp(v);
    }
};

} // namespace ashock

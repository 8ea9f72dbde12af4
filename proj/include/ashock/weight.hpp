#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>

#include "ashock/errors.hpp"
#include "ashock/numerics.hpp"

namespace ashock {

/// Weight generator on [0,1] with two derivatives; strictly positive. Bounds
/// are computed by dense sampling at construction.
struct weight {
    std::string id;
    std::function<double(double)> a0, a1, a2;
    double inf_a = 0.0;
    double sup_a = 0.0;
    double d1_max = 0.0;
    double d2_max = 0.0;

    double eval(double s) const { return a0(s); }
    double deriv(double s) const { return a1(s); }
    double deriv2(double s) const { return a2(s); }

    void finalize(int n = 10000) {
        inf_a = std::numeric_limits<double>::infinity();
        sup_a = 0.0;
        d1_max = 0.0;
        d2_max = 0.0;
        for (int i = 0; i <= n; ++i) {
            double s = static_cast<double>(i) / n;
            double v = a0(s);
            if (!(v > 0.0))
                throw construction_error("weight '" + id + "' not positive at s=" +
                                         std::to_string(s));
            inf_a = std::min(inf_a, v);
            sup_a = std::max(sup_a, v);
            d1_max = std::max(d1_max, std::abs(a1(s)));
            d2_max = std::max(d2_max, std::abs(a2(s)));
        }
    }
};

inline weight constant_weight() {
    weight w;
    w.id = "constant";
    w.a0 = [](double) { return 1.0; };
    w.a1 = [](double) { return 0.0; };
    w.a2 = [](double) { return 0.0; };
    w.finalize();
    return w;
}

/// a(s) = 1 + c s; requires |c| < 1 so the weight stays positive.
inline weight affine_weight(double c) {
    if (!(std::abs(c) < 1.0))
        throw construction_error("affine weight slope must satisfy |c| < 1");
    weight w;
    w.id = "affine";
    w.a0 = [c](double s) { return 1.0 + c * s; };
    w.a1 = [c](double) { return c; };
    w.a2 = [](double) { return 0.0; };
    w.finalize();
    return w;
}

/// Constant weight perturbed by a smooth bump supported on (1/4, 3/4); the
/// nonzero second derivative exercises the a'' terms of the decompositions.
inline weight bump_weight(double amp) {
    if (!(amp > -1.0))
        throw construction_error("bump weight amplitude must exceed -1");
    weight w;
    w.id = "bump";
    const double c = std::exp(1.0); // normalize bump peak to 1
    w.a0 = [amp, c](double s) { return 1.0 + amp * c * bump(4.0 * s - 2.0); };
    w.a1 = [amp, c](double s) { return 4.0 * amp * c * bump_deriv(4.0 * s - 2.0); };
    w.a2 = [amp, c](double s) { return 16.0 * amp * c * bump_deriv2(4.0 * s - 2.0); };
    w.finalize();
    return w;
}

inline weight make_weight(const std::string& id, double param = 0.5) {
    if (id == "constant") return constant_weight();
    if (id == "affine") return affine_weight(param);
    if (id == "bump") return bump_weight(param);
    throw config_error("unknown weight id '" + id + "'");
}

/// Smallest theta in (1/2, 1) with min_{[theta,1]} a >= (9/10) a(1), sampled;
/// nothing if no such theta exists for this weight.
inline std::optional<double> theta_for_weight(const weight& w, int n = 4000) {
    double target = 0.9 * w.eval(1.0);
    double min_tail = w.eval(1.0);
    std::optional<double> best;
    // scan theta downward from 1; maintain running min of a on [theta, 1]
    for (int i = 0; i <= n; ++i) {
        double theta = 1.0 - 0.5 * i / n;
        min_tail = std::min(min_tail, w.eval(theta));
        if (theta <= 0.5 + 1e-12) break;
        if (min_tail >= target) best = theta;
        else break;
    }
    return best;
}

/// Weight composed with a profile: evaluators for a, a', a'' as functions of
/// the line coordinate.
struct weight_on_line {
    std::function<double(double)> a, da, dda;
};

/// Generic composition a(x) = a0(inner(x)) by the chain rule; `inner_d` and
/// `inner_dd` are the first and second derivatives of the inner map.
inline weight_on_line compose_weight(const weight& w,
                                     std::function<double(double)> inner,
                                     std::function<double(double)> inner_d,
                                     std::function<double(double)> inner_dd) {
    weight_on_line out;
    out.a = [w, inner](double x) { return w.a0(inner(x)); };
    out.da = [w, inner, inner_d](double x) { return w.a1(inner(x)) * inner_d(x); };
    out.dda = [w, inner, inner_d, inner_dd](double x) {
        double s = inner(x);
        double ds = inner_d(x);
        return w.a2(s) * ds * ds + w.a1(s) * inner_dd(x);
    };
    return out;
}

} // namespace ashock

#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "ashock/errors.hpp"

namespace ashock {

/// Accepted steps of an adaptive scalar ODE integration: abscissae, values and
/// right-hand sides (slopes), ordered along the direction of integration.
struct ode_trace {
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> f;
    bool hit_stop = false;
};

/// Cash-Karp 4(5) integration of y' = f(y) (autonomous) starting at (x0, y0),
/// marching in direction `dir` (+1/-1) until `stop(y)` holds or |x-x0| exceeds
/// `x_cap`. Throws integration_error on step-size collapse or non-finite
/// values.
inline ode_trace integrate_autonomous(const std::function<double(double)>& rhs,
                                      double x0, double y0, int dir,
                                      const std::function<bool(double)>& stop,
                                      double x_cap, double rel_tol = 1e-12,
                                      double abs_tol = 1e-14,
                                      std::size_t max_steps = 2000000,
                                      double max_step = 0.0) {
    static constexpr double a2 = 0.2, a3 = 0.3, a4 = 0.6, a5 = 1.0, a6 = 0.875;
    static constexpr double b21 = 0.2;
    static constexpr double b31 = 3.0 / 40.0, b32 = 9.0 / 40.0;
    static constexpr double b41 = 0.3, b42 = -0.9, b43 = 1.2;
    static constexpr double b51 = -11.0 / 54.0, b52 = 2.5, b53 = -70.0 / 27.0,
                            b54 = 35.0 / 27.0;
    static constexpr double b61 = 1631.0 / 55296.0, b62 = 175.0 / 512.0,
                            b63 = 575.0 / 13824.0, b64 = 44275.0 / 110592.0,
                            b65 = 253.0 / 4096.0;
    static constexpr double c1 = 37.0 / 378.0, c3 = 250.0 / 621.0, c4 = 125.0 / 594.0,
                            c6 = 512.0 / 1771.0;
    static constexpr double d1 = c1 - 2825.0 / 27648.0, d3 = c3 - 18575.0 / 48384.0,
                            d4 = c4 - 13525.0 / 55296.0, d5 = -277.0 / 14336.0,
                            d6 = c6 - 0.25;
    (void)a2; (void)a3; (void)a4; (void)a5; (void)a6;

    ode_trace tr;
    double x = x0;
    double y = y0;
    double fy = rhs(y);
    tr.x.push_back(x);
    tr.y.push_back(y);
    tr.f.push_back(fy);

    double scale0 = std::max(std::abs(y0), abs_tol);
    double h = dir * std::min(0.01 * scale0 / std::max(std::abs(fy), 1e-300), x_cap);
    if (h == 0.0) h = dir * 1e-6;

    for (std::size_t step = 0; step < max_steps; ++step) {
        if (stop(y)) {
            tr.hit_stop = true;
            return tr;
        }
        if (std::abs(x - x0) >= x_cap) return tr;
        if (max_step > 0.0 && std::abs(h) > max_step) h = dir * max_step;
        if (std::abs(x + h - x0) > x_cap) h = dir * (x_cap - std::abs(x - x0));

        double k1 = fy;
        double k2 = rhs(y + h * b21 * k1);
        double k3 = rhs(y + h * (b31 * k1 + b32 * k2));
        double k4 = rhs(y + h * (b41 * k1 + b42 * k2 + b43 * k3));
        double k5 = rhs(y + h * (b51 * k1 + b52 * k2 + b53 * k3 + b54 * k4));
        double k6 = rhs(y + h * (b61 * k1 + b62 * k2 + b63 * k3 + b64 * k4 + b65 * k5));
        double dy = h * (c1 * k1 + c3 * k3 + c4 * k4 + c6 * k6);
        double err = std::abs(h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6));
        double tol = abs_tol + rel_tol * std::max(std::abs(y), std::abs(y + dy));

        if (!std::isfinite(dy) || !std::isfinite(err))
            throw integration_error("integrate_autonomous: non-finite step");

        if (err <= tol) {
            x += h;
            y += dy;
            fy = rhs(y);
            tr.x.push_back(x);
            tr.y.push_back(y);
            tr.f.push_back(fy);
            double grow = err > 0.0 ? 0.9 * std::pow(tol / err, 0.2) : 5.0;
            h *= std::min(5.0, std::max(0.2, grow));
            if (max_step > 0.0 && std::abs(h) > max_step) h = dir * max_step;
        } else {
            h *= std::max(0.1, 0.9 * std::pow(tol / err, 0.25));
            if (std::abs(h) < 1e-300 * std::max(1.0, std::abs(x)))
                throw integration_error("integrate_autonomous: step size collapsed");
        }
    }
    throw integration_error("integrate_autonomous: step budget exhausted");
}

} // namespace ashock

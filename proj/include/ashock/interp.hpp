#pragma once

#include <cmath>
#include <vector>

#include "ashock/errors.hpp"

namespace ashock {

/// Piecewise-cubic Hermite interpolant on sorted nodes. When constructed from
/// exact nodal slopes of a smooth function the error is O(h^4). Monotone data
/// with consistent slopes yields a monotone curve, so the inverse below is
/// well defined; `inverse` brackets with the node table and bisects on the
/// forward evaluation.
class hermite_curve {
public:
    hermite_curve() = default;

    hermite_curve(std::vector<double> x, std::vector<double> y, std::vector<double> m)
        : x_(std::move(x)), y_(std::move(y)), m_(std::move(m)) {
        if (x_.size() != y_.size() || x_.size() != m_.size() || x_.size() < 2)
            throw construction_error("hermite_curve: inconsistent sample arrays");
    }

    /// Slopes estimated from the data (Fritsch-Carlson style limited secants).
    static hermite_curve from_samples(std::vector<double> x, std::vector<double> y) {
        std::vector<double> m = pchip_slopes(x, y);
        return hermite_curve(std::move(x), std::move(y), std::move(m));
    }

    double front_x() const { return x_.front(); }
    double back_x() const { return x_.back(); }
    double front_y() const { return y_.front(); }
    double back_y() const { return y_.back(); }
    const std::vector<double>& xs() const { return x_; }
    const std::vector<double>& ys() const { return y_; }

    double operator()(double x) const { return eval(x); }

    double eval(double x) const {
        std::size_t i = locate(x);
        double h = x_[i + 1] - x_[i];
        double t = (x - x_[i]) / h;
        double t2 = t * t;
        double t3 = t2 * t;
        double h00 = 2 * t3 - 3 * t2 + 1;
        double h10 = t3 - 2 * t2 + t;
        double h01 = -2 * t3 + 3 * t2;
        double h11 = t3 - t2;
        return h00 * y_[i] + h10 * h * m_[i] + h01 * y_[i + 1] + h11 * h * m_[i + 1];
    }

    double deriv(double x) const {
        std::size_t i = locate(x);
        double h = x_[i + 1] - x_[i];
        double t = (x - x_[i]) / h;
        double t2 = t * t;
        double d00 = (6 * t2 - 6 * t) / h;
        double d10 = 3 * t2 - 4 * t + 1;
        double d01 = (-6 * t2 + 6 * t) / h;
        double d11 = 3 * t2 - 2 * t;
        return d00 * y_[i] + d10 * m_[i] + d01 * y_[i + 1] + d11 * m_[i + 1];
    }

    /// Piecewise-linear second derivative of the cubic; O(h^2) accurate.
    double deriv2(double x) const {
        std::size_t i = locate(x);
        double h = x_[i + 1] - x_[i];
        double t = (x - x_[i]) / h;
        double s00 = (12 * t - 6) / (h * h);
        double s10 = (6 * t - 4) / h;
        double s01 = (-12 * t + 6) / (h * h);
        double s11 = (6 * t - 2) / h;
        return s00 * y_[i] + s10 * m_[i] + s01 * y_[i + 1] + s11 * m_[i + 1];
    }

    /// Inverse for strictly monotone curves. `y` must lie strictly between the
    /// end values.
    double inverse(double y, double xtol_rel = 1e-14) const {
        bool incr = y_.back() > y_.front();
        double ylo = incr ? y_.front() : y_.back();
        double yhi = incr ? y_.back() : y_.front();
        if (!(y > ylo && y < yhi))
            throw range_error("hermite_curve::inverse: value outside open range");
        // bracket by nodes
        std::size_t lo = 0, hi = x_.size() - 1;
        while (hi - lo > 1) {
            std::size_t mid = (lo + hi) / 2;
            bool below = incr ? (y_[mid] <= y) : (y_[mid] >= y);
            if (below) lo = mid; else hi = mid;
        }
        double a = x_[lo], b = x_[hi];
        double xtol = xtol_rel * std::max(1.0, std::max(std::abs(a), std::abs(b)));
        for (int it = 0; it < 200 && (b - a) > xtol; ++it) {
            double m = 0.5 * (a + b);
            double fm = eval(m) - y;
            if (fm == 0.0) return m;
            bool left = incr ? (fm < 0.0) : (fm > 0.0);
            if (left) a = m; else b = m;
        }
        return 0.5 * (a + b);
    }

    /// 4th-order finite-difference slopes for uniformly spaced samples;
    /// preferred over the limited pchip slopes when the data is smooth and
    /// the derivative enters quantities with strong cancellation.
    static std::vector<double> fd4_slopes(const std::vector<double>& x,
                                          const std::vector<double>& y) {
        std::size_t n = x.size();
        std::vector<double> m(n);
        if (n < 5) return pchip_slopes(x, y);
        double h = x[1] - x[0];
        for (std::size_t i = 2; i + 2 < n; ++i)
            m[i] = (-y[i + 2] + 8.0 * y[i + 1] - 8.0 * y[i - 1] + y[i - 2]) / (12.0 * h);
        // 4th-order one-sided stencils at the edges
        auto edge = [&](std::size_t i, int dir) {
            return dir *
                   (-25.0 * y[i] + 48.0 * y[i + dir] - 36.0 * y[i + 2 * dir] +
                    16.0 * y[i + 3 * dir] - 3.0 * y[i + 4 * dir]) /
                   (12.0 * h);
        };
        m[0] = edge(0, +1);
        m[1] = (-3.0 * y[0] - 10.0 * y[1] + 18.0 * y[2] - 6.0 * y[3] + y[4]) / (12.0 * h);
        m[n - 1] = edge(n - 1, -1);
        m[n - 2] = (3.0 * y[n - 1] + 10.0 * y[n - 2] - 18.0 * y[n - 3] + 6.0 * y[n - 4] -
                    y[n - 5]) /
                   (12.0 * h);
        return m;
    }

    static std::vector<double> pchip_slopes(const std::vector<double>& x,
                                            const std::vector<double>& y) {
        std::size_t n = x.size();
        std::vector<double> d(n - 1), m(n);
        for (std::size_t i = 0; i + 1 < n; ++i) d[i] = (y[i + 1] - y[i]) / (x[i + 1] - x[i]);
        m[0] = d[0];
        m[n - 1] = d[n - 2];
        for (std::size_t i = 1; i + 1 < n; ++i) {
            if (d[i - 1] * d[i] <= 0.0) {
                m[i] = 0.0;
            } else {
                double w1 = 2.0 * (x[i + 1] - x[i]) + (x[i] - x[i - 1]);
                double w2 = (x[i + 1] - x[i]) + 2.0 * (x[i] - x[i - 1]);
                m[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
            }
        }
        return m;
    }

private:
    std::size_t locate(double x) const {
        if (x <= x_.front()) return 0;
        if (x >= x_.back()) return x_.size() - 2;
        std::size_t lo = 0, hi = x_.size() - 1;
        while (hi - lo > 1) {
            std::size_t mid = (lo + hi) / 2;
            if (x_[mid] <= x) lo = mid; else hi = mid;
        }
        return lo;
    }

    std::vector<double> x_, y_, m_;
};

} // namespace ashock

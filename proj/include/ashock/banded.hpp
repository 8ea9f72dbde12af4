#pragma once

#include <cmath>
#include <vector>

#include "ashock/errors.hpp"

namespace ashock {

/// Tridiagonal solve (Thomas algorithm). a = sub, b = diag, c = super; d is
/// the right-hand side and receives the solution. No pivoting; intended for
/// diagonally dominant systems.
inline void solve_tridiagonal(std::vector<double>& a, std::vector<double>& b,
                              std::vector<double>& c, std::vector<double>& d) {
    std::size_t n = b.size();
    for (std::size_t i = 1; i < n; ++i) {
        double w = a[i] / b[i - 1];
        b[i] -= w * c[i - 1];
        d[i] -= w * d[i - 1];
    }
    d[n - 1] /= b[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) d[i] = (d[i] - c[i] * d[i + 1]) / b[i];
}

/// Dense-banded matrix with kl sub- and ku super-diagonals, row-major band
/// storage. Entry (i,j) is stored when |i-j| is within the band.
class banded_matrix {
public:
    banded_matrix(std::size_t n, int kl, int ku)
        : n_(n), kl_(kl), ku_(ku), w_(kl + ku + 1), data_(n * (kl + ku + 1), 0.0) {}

    std::size_t size() const { return n_; }
    int lower() const { return kl_; }
    int upper() const { return ku_; }

    double& at(std::size_t i, std::size_t j) {
        return data_[i * w_ + (static_cast<int>(j) - static_cast<int>(i)) + kl_];
    }
    double at(std::size_t i, std::size_t j) const {
        return data_[i * w_ + (static_cast<int>(j) - static_cast<int>(i)) + kl_];
    }
    bool in_band(std::size_t i, std::size_t j) const {
        int d = static_cast<int>(j) - static_cast<int>(i);
        return d >= -kl_ && d <= ku_;
    }
    void clear() { std::fill(data_.begin(), data_.end(), 0.0); }

    /// In-place LU (no pivoting) and solve. The matrix is consumed.
    void solve(std::vector<double>& rhs) {
        for (std::size_t k = 0; k + 1 < n_; ++k) {
            double piv = at(k, k);
            if (piv == 0.0 || !std::isfinite(piv))
                throw integration_error("banded solve: zero or non-finite pivot");
            std::size_t imax = std::min(n_ - 1, k + kl_);
            std::size_t jmax = std::min(n_ - 1, k + ku_);
            for (std::size_t i = k + 1; i <= imax; ++i) {
                double m = at(i, k) / piv;
                if (m == 0.0) continue;
                at(i, k) = 0.0;
                for (std::size_t j = k + 1; j <= jmax; ++j) at(i, j) -= m * at(k, j);
                rhs[i] -= m * rhs[k];
            }
        }
        for (std::size_t i = n_; i-- > 0;) {
            double s = rhs[i];
            std::size_t jmax = std::min(n_ - 1, i + ku_);
            for (std::size_t j = i + 1; j <= jmax; ++j) s -= at(i, j) * rhs[j];
            rhs[i] = s / at(i, i);
        }
    }

private:
    std::size_t n_;
    int kl_, ku_;
    int w_;
    std::vector<double> data_;
};

} // namespace ashock

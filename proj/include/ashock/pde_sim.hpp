#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "ashock/banded.hpp"
#include "ashock/errors.hpp"
#include "ashock/flux.hpp"
#include "ashock/interp.hpp"
#include "ashock/ns_destab.hpp"
#include "ashock/numerics.hpp"
#include "ashock/profile.hpp"
#include "ashock/scalar_destab.hpp"
#include "ashock/weight.hpp"

namespace ashock {

// ---------------------------------------------------------------------------
// Grid
// ---------------------------------------------------------------------------

struct sim_grid {
    double xl = 0.0;
    double h = 0.0;
    int n = 0; // cells; nodes 0..n
    double x(int i) const { return xl + h * i; }
    int nodes() const { return n + 1; }
};

namespace detail {

/// kappa = 1/3 MUSCL reconstruction at the face between ext nodes (i, i+1);
/// `ext` carries one ghost at each end. Face f (1..n) separates solution
/// nodes f-1 and f, i.e. ext indices f and f+1.
inline void reconstruct_face(const std::vector<double>& ext, int f, double& uL,
                             double& uR) {
    constexpr double k1 = 1.0 / 6.0; // (1-kappa)/4 at kappa = 1/3
    constexpr double k2 = 1.0 / 3.0; // (1+kappa)/4
    double um = ext[f - 1], u0 = ext[f], u1 = ext[f + 1], u2 = ext[f + 2];
    uL = u0 + k1 * (u0 - um) + k2 * (u1 - u0);
    uR = u1 - k1 * (u2 - u1) - k2 * (u1 - u0);
}

} // namespace detail

// ---------------------------------------------------------------------------
// Scalar simulation: u_t = u_xx + sigma u_x - (A(u))_x in the co-moving frame
// ---------------------------------------------------------------------------

/// Semi-discrete scheme: MUSCL (kappa=1/3) upwind-biased fluxes with frozen
/// local dissipation, Crank-Nicolson diffusion, Heun outer stage. Boundary
/// nodes are pinned to the discrete steady profile; the steady state is the
/// exact fixed point of `step`.
class scalar_sim {
public:
    scalar_sim(const flux_function& fl, const shock_profile& pr, sim_grid g)
        : flux_(fl), sigma_(pr.sigma), grid_(g) {
        int n = grid_.n;
        seed_.resize(n + 1);
        for (int i = 0; i <= n; ++i) seed_[i] = pr.value(grid_.x(i));
        // ghosts from the linearized tails of the profile (one cell outward)
        double rl = -pr.sigma;                       // decay rate toward u_-
        double rr = fl.A1(pr.u_plus) - pr.sigma;     // negative rate toward u_+
        ghost_l_ = pr.u_minus + (seed_[0] - pr.u_minus) * std::exp(std::max(-700.0, -rl * grid_.h));
        ghost_r_ = pr.u_plus + (seed_[n] - pr.u_plus) * std::exp(std::max(-700.0, rr * grid_.h));
        alpha_face_.assign(n + 1, 0.0);
        double amax = 0.0;
        for (int f = 1; f <= n; ++f) {
            double a = std::max(std::abs(fl.A1(seed_[f - 1]) - sigma_),
                                std::abs(fl.A1(seed_[f]) - sigma_));
            alpha_face_[f] = 1.05 * a;
            amax = std::max(amax, alpha_face_[f]);
        }
        cfl_dt_ = grid_.h / std::max(amax, 1e-300);
        solve_steady();
        u_ = steady_;
        t_ = 0.0;
    }

    const sim_grid& grid() const { return grid_; }
    const std::vector<double>& steady() const { return steady_; }
    const std::vector<double>& state() const { return u_; }
    double time() const { return t_; }
    double sigma() const { return sigma_; }
    double cfl_limit() const { return cfl_dt_; }

    void set_state(std::vector<double> u, double t = 0.0) {
        if (static_cast<int>(u.size()) != grid_.nodes())
            throw domain_error("scalar_sim::set_state: wrong size");
        u_ = std::move(u);
        u_.front() = steady_.front();
        u_.back() = steady_.back();
        t_ = t;
    }

    /// One IMEX step. Throws cfl_error when dt exceeds the advective limit and
    /// blowup_error on non-finite values.
    void step(double dt) {
        if (dt > cfl_dt_)
            throw cfl_error("scalar step: dt " + std::to_string(dt) +
                            " exceeds advective limit " + std::to_string(cfl_dt_));
        int n = grid_.n;
        std::vector<double> adv0 = advective_rhs(u_);
        std::vector<double> lap0 = laplacian(u_);
        // predictor
        std::vector<double> rhs(n - 1);
        for (int i = 1; i < n; ++i)
            rhs[i - 1] = u_[i] + dt * adv0[i] + 0.5 * dt * lap0[i];
        std::vector<double> up = cn_solve(rhs, dt);
        std::vector<double> adv1 = advective_rhs(up);
        for (int i = 1; i < n; ++i)
            rhs[i - 1] = u_[i] + 0.5 * dt * (adv0[i] + adv1[i]) + 0.5 * dt * lap0[i];
        std::vector<double> un = cn_solve(rhs, dt);
        u_ = std::move(un);
        t_ += dt;
        for (int i = 0; i <= n; i += std::max(1, n / 16))
            if (!std::isfinite(u_[i])) throw blowup_error("scalar step: non-finite state");
    }

    /// Steady residual (advective + diffusive) at interior nodes; used by the
    /// stationarity diagnostics.
    std::vector<double> residual(const std::vector<double>& u) const {
        std::vector<double> adv = advective_rhs(u);
        std::vector<double> lap = laplacian(u);
        std::vector<double> r(grid_.n + 1, 0.0);
        for (int i = 1; i < grid_.n; ++i) r[i] = adv[i] + lap[i];
        return r;
    }

private:
    std::vector<double> extend(const std::vector<double>& u) const {
        std::vector<double> ext(u.size() + 2);
        ext[0] = ghost_l_;
        std::copy(u.begin(), u.end(), ext.begin() + 1);
        ext.back() = ghost_r_;
        return ext;
    }

    /// -(F_{i+1/2} - F_{i-1/2})/h with the frozen-dissipation MUSCL flux of
    /// g(u) = A(u) - sigma u.
    std::vector<double> advective_rhs(const std::vector<double>& u) const {
        int n = grid_.n;
        std::vector<double> ext = extend(u);
        std::vector<double> F(n + 1, 0.0);
        for (int f = 1; f <= n; ++f) {
            double uL, uR;
            detail::reconstruct_face(ext, f, uL, uR);
            double gl = flux_.A(uL) - sigma_ * uL;
            double gr = flux_.A(uR) - sigma_ * uR;
            F[f] = 0.5 * (gl + gr) - 0.5 * alpha_face_[f] * (uR - uL);
        }
        std::vector<double> adv(n + 1, 0.0);
        for (int i = 1; i < n; ++i) adv[i] = -(F[i + 1] - F[i]) / grid_.h;
        return adv;
    }

    std::vector<double> laplacian(const std::vector<double>& u) const {
        int n = grid_.n;
        std::vector<double> lap(n + 1, 0.0);
        double h2 = grid_.h * grid_.h;
        for (int i = 1; i < n; ++i) lap[i] = (u[i + 1] - 2.0 * u[i] + u[i - 1]) / h2;
        return lap;
    }

    /// Solves (I - dt/2 Lap) u = rhs on the interior with pinned boundaries.
    std::vector<double> cn_solve(std::vector<double> rhs, double dt) const {
        int n = grid_.n;
        double r = 0.5 * dt / (grid_.h * grid_.h);
        std::vector<double> a(n - 1, -r), b(n - 1, 1.0 + 2.0 * r), c(n - 1, -r);
        rhs.front() += r * steady_.front();
        rhs.back() += r * steady_.back();
        solve_tridiagonal(a, b, c, rhs);
        std::vector<double> u(n + 1);
        u[0] = steady_.front();
        for (int i = 1; i < n; ++i) u[i] = rhs[i - 1];
        u[n] = steady_.back();
        return u;
    }

    void solve_steady() {
        int n = grid_.n;
        steady_ = seed_;
        auto resid = [&](const std::vector<double>& u) {
            std::vector<double> r = residual(u);
            return std::vector<double>(r.begin() + 1, r.end() - 1);
        };
        std::vector<double> r = resid(steady_);
        double r0 = 0.0;
        for (double v : r) r0 = std::max(r0, std::abs(v));
        double tol = std::max(1e-13 * r0, 1e-290);
        double scale = 0.0;
        for (double v : steady_) scale = std::max(scale, std::abs(v));
        for (int it = 0; it < 40; ++it) {
            double rn = 0.0;
            for (double v : r) rn = std::max(rn, std::abs(v));
            if (rn <= tol) break;
            // banded Jacobian by 5-coloring finite differences
            banded_matrix J(n - 1, 2, 2);
            double eta = 1e-7 * std::max(scale, 1.0e-6);
            for (int color = 0; color < 5; ++color) {
                std::vector<double> up = steady_;
                for (int i = 1; i < n; ++i)
                    if ((i - 1) % 5 == color) up[i] += eta;
                std::vector<double> rp = resid(up);
                for (int i = 0; i < n - 1; ++i) {
                    for (int j = std::max(0, i - 2); j <= std::min(n - 2, i + 2); ++j) {
                        if (j % 5 != color) continue;
                        J.at(i, j) = (rp[i] - r[i]) / eta;
                    }
                }
            }
            std::vector<double> delta(r.begin(), r.end());
            J.solve(delta);
            double lambda = 1.0;
            for (int back = 0; back < 10; ++back) {
                std::vector<double> trial = steady_;
                for (int i = 1; i < n; ++i) trial[i] -= lambda * delta[i - 1];
                std::vector<double> rt = resid(trial);
                double rtn = 0.0;
                for (double v : rt) rtn = std::max(rtn, std::abs(v));
                if (rtn < rn || lambda < 1e-3) {
                    steady_ = std::move(trial);
                    r = std::move(rt);
                    break;
                }
                lambda *= 0.5;
            }
        }
    }

    flux_function flux_;
    double sigma_;
    sim_grid grid_;
    std::vector<double> seed_, steady_, u_;
    std::vector<double> alpha_face_;
    double ghost_l_ = 0.0, ghost_r_ = 0.0;
    double cfl_dt_ = 0.0;
    double t_ = 0.0;
};

// ---------------------------------------------------------------------------
// Transformed Navier-Stokes simulation:
//   v_t - sigma v_x - h_x = -p(v)_xx,  h_t - sigma h_x + p(v)_x = 0
// ---------------------------------------------------------------------------

class ns_sim {
public:
    ns_sim(const ns_shock& sh, sim_grid g) : pl_(sh.pl), sigma_(sh.sigma), grid_(g) {
        int n = grid_.n;
        seed_v_.resize(n + 1);
        seed_h_.resize(n + 1);
        for (int i = 0; i <= n; ++i) {
            double v = sh.value(grid_.x(i));
            seed_v_[i] = v;
            seed_h_[i] = sh.h_of_v(v);
        }
        double rl = sh.q_deriv(sh.v_minus);          // positive rate toward v_-
        double rr = sh.q_deriv(sh.v_plus);           // negative rate toward v_+
        ghost_vl_ = sh.v_minus + (seed_v_[0] - sh.v_minus) * std::exp(std::max(-700.0, -rl * grid_.h));
        ghost_vr_ = sh.v_plus + (seed_v_[n] - sh.v_plus) * std::exp(std::max(-700.0, rr * grid_.h));
        ghost_hl_ = sh.h_of_v(ghost_vl_);
        ghost_hr_ = sh.h_of_v(ghost_vr_);
        v_floor_ = 1e-3 * sh.v_plus;

        alpha_face_.assign(n + 1, 0.0);
        double amax = 0.0;
        for (int f = 1; f <= n; ++f) {
            double c = std::sqrt(std::max(-pl_.dp(seed_v_[f - 1]), -pl_.dp(seed_v_[f])));
            alpha_face_[f] = 1.1 * (std::abs(sigma_) + c);
            amax = std::max(amax, alpha_face_[f]);
        }
        cfl_dt_ = grid_.h / amax;
        solve_steady();
        v_ = steady_v_;
        h_ = steady_h_;
        t_ = 0.0;
    }

    const sim_grid& grid() const { return grid_; }
    const std::vector<double>& steady_v() const { return steady_v_; }
    const std::vector<double>& steady_h() const { return steady_h_; }
    const std::vector<double>& v() const { return v_; }
    const std::vector<double>& h() const { return h_; }
    double time() const { return t_; }
    double cfl_limit() const { return cfl_dt_; }

    void set_state(std::vector<double> v, std::vector<double> h, double t = 0.0) {
        if (static_cast<int>(v.size()) != grid_.nodes() ||
            static_cast<int>(h.size()) != grid_.nodes())
            throw domain_error("ns_sim::set_state: wrong size");
        v_ = std::move(v);
        h_ = std::move(h);
        v_.front() = steady_v_.front();
        v_.back() = steady_v_.back();
        h_.front() = steady_h_.front();
        h_.back() = steady_h_.back();
        guard(v_);
        t_ = t;
    }

    void step(double dt) {
        if (dt > cfl_dt_)
            throw cfl_error("ns step: dt exceeds advective limit");
        int n = grid_.n;
        std::vector<double> av0(n + 1), ah0(n + 1);
        advective_rhs(v_, h_, av0, ah0);
        std::vector<double> D0 = diffusivity(v_);
        std::vector<double> dv0 = diffusion(v_, D0);

        // predictor
        std::vector<double> rhs(n - 1);
        for (int i = 1; i < n; ++i) rhs[i - 1] = v_[i] + dt * av0[i] + 0.5 * dt * dv0[i];
        std::vector<double> vp = cn_solve(rhs, D0, dt);
        std::vector<double> hp(n + 1);
        hp[0] = steady_h_.front();
        hp[n] = steady_h_.back();
        for (int i = 1; i < n; ++i) hp[i] = h_[i] + dt * ah0[i];
        guard(vp);

        // corrector with one Picard update of the diffusivity
        std::vector<double> av1(n + 1), ah1(n + 1);
        advective_rhs(vp, hp, av1, ah1);
        std::vector<double> D1 = diffusivity(vp);
        std::vector<double> Dm(n + 1);
        for (int i = 0; i <= n; ++i) Dm[i] = 0.5 * (D0[i] + D1[i]);
        std::vector<double> dvm = diffusion(v_, Dm);
        for (int i = 1; i < n; ++i)
            rhs[i - 1] = v_[i] + 0.5 * dt * (av0[i] + av1[i]) + 0.5 * dt * dvm[i];
        std::vector<double> vn = cn_solve(rhs, Dm, dt);
        for (int i = 1; i < n; ++i) h_[i] += 0.5 * dt * (ah0[i] + ah1[i]);
        v_ = std::move(vn);
        guard(v_);
        t_ += dt;
    }

    /// Steady residual for both components at interior nodes.
    void residual(const std::vector<double>& v, const std::vector<double>& h,
                  std::vector<double>& rv, std::vector<double>& rh) const {
        int n = grid_.n;
        rv.assign(n + 1, 0.0);
        rh.assign(n + 1, 0.0);
        std::vector<double> av(n + 1), ah(n + 1);
        advective_rhs(v, h, av, ah);
        std::vector<double> dv = diffusion(v, diffusivity(v));
        for (int i = 1; i < n; ++i) {
            rv[i] = av[i] + dv[i];
            rh[i] = ah[i];
        }
    }

private:
    void guard(const std::vector<double>& v) const {
        for (double val : v) {
            if (!std::isfinite(val)) throw blowup_error("ns step: non-finite state");
            if (val <= v_floor_) throw vacuum_error("ns step: specific volume at floor");
        }
    }

    std::vector<double> diffusivity(const std::vector<double>& v) const {
        std::vector<double> D(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) D[i] = -pl_.dp(std::max(v[i], v_floor_));
        return D;
    }

    /// Fluxes G_v = -sigma v - h, G_h = -sigma h + p(v), LLF with frozen
    /// face dissipation.
    void advective_rhs(const std::vector<double>& v, const std::vector<double>& h,
                       std::vector<double>& av, std::vector<double>& ah) const {
        int n = grid_.n;
        std::vector<double> ev(n + 3), eh(n + 3);
        ev[0] = ghost_vl_;
        eh[0] = ghost_hl_;
        std::copy(v.begin(), v.end(), ev.begin() + 1);
        std::copy(h.begin(), h.end(), eh.begin() + 1);
        ev[n + 2] = ghost_vr_;
        eh[n + 2] = ghost_hr_;
        std::vector<double> Fv(n + 1, 0.0), Fh(n + 1, 0.0);
        for (int f = 1; f <= n; ++f) {
            double vL, vR, hL, hR;
            detail::reconstruct_face(ev, f, vL, vR);
            detail::reconstruct_face(eh, f, hL, hR);
            vL = std::max(vL, v_floor_);
            vR = std::max(vR, v_floor_);
            double gvl = -sigma_ * vL - hL, gvr = -sigma_ * vR - hR;
            double ghl = -sigma_ * hL + pl_.p(vL), ghr = -sigma_ * hR + pl_.p(vR);
            Fv[f] = 0.5 * (gvl + gvr) - 0.5 * alpha_face_[f] * (vR - vL);
            Fh[f] = 0.5 * (ghl + ghr) - 0.5 * alpha_face_[f] * (hR - hL);
        }
        av.assign(n + 1, 0.0);
        ah.assign(n + 1, 0.0);
        for (int i = 1; i < n; ++i) {
            av[i] = -(Fv[i + 1] - Fv[i]) / grid_.h;
            ah[i] = -(Fh[i + 1] - Fh[i]) / grid_.h;
        }
    }

    /// (D v_x)_x with face-averaged diffusivity (applied with a minus sign
    /// relative to p(v)_xx since D = -p'(v)).
    std::vector<double> diffusion(const std::vector<double>& v,
                                  const std::vector<double>& D) const {
        int n = grid_.n;
        std::vector<double> out(n + 1, 0.0);
        double h2 = grid_.h * grid_.h;
        for (int i = 1; i < n; ++i) {
            double Dp = 0.5 * (D[i] + D[i + 1]);
            double Dm = 0.5 * (D[i] + D[i - 1]);
            out[i] = (Dp * (v[i + 1] - v[i]) - Dm * (v[i] - v[i - 1])) / h2;
        }
        return out;
    }

    std::vector<double> cn_solve(std::vector<double> rhs, const std::vector<double>& D,
                                 double dt) const {
        int n = grid_.n;
        double r = 0.5 * dt / (grid_.h * grid_.h);
        std::vector<double> a(n - 1), b(n - 1), c(n - 1);
        for (int i = 1; i < n; ++i) {
            double Dp = 0.5 * (D[i] + D[i + 1]);
            double Dm = 0.5 * (D[i] + D[i - 1]);
            a[i - 1] = -r * Dm;
            b[i - 1] = 1.0 + r * (Dp + Dm);
            c[i - 1] = -r * Dp;
        }
        rhs.front() += r * 0.5 * (D[1] + D[0]) * steady_v_.front();
        rhs.back() += r * 0.5 * (D[n - 1] + D[n]) * steady_v_.back();
        solve_tridiagonal(a, b, c, rhs);
        std::vector<double> v(n + 1);
        v[0] = steady_v_.front();
        for (int i = 1; i < n; ++i) v[i] = rhs[i - 1];
        v[n] = steady_v_.back();
        return v;
    }

    void solve_steady() {
        int n = grid_.n;
        steady_v_ = seed_v_;
        steady_h_ = seed_h_;
        int m = 2 * (n - 1);
        auto resid = [&](const std::vector<double>& v, const std::vector<double>& h) {
            std::vector<double> rv, rh, r(m);
            residual(v, h, rv, rh);
            for (int i = 1; i < n; ++i) {
                r[2 * (i - 1)] = rv[i];
                r[2 * (i - 1) + 1] = rh[i];
            }
            return r;
        };
        std::vector<double> r = resid(steady_v_, steady_h_);
        double r0 = 0.0;
        for (double val : r) r0 = std::max(r0, std::abs(val));
        double tol = std::max(1e-13 * r0, 1e-290);
        double vscale = *std::max_element(seed_v_.begin(), seed_v_.end());
        for (int it = 0; it < 40; ++it) {
            double rn = 0.0;
            for (double val : r) rn = std::max(rn, std::abs(val));
            if (rn <= tol) break;
            banded_matrix J(m, 5, 5);
            for (int comp = 0; comp < 2; ++comp) {
                double eta = (comp == 0 ? 1e-8 * vscale : 1e-8 * (1.0 + std::abs(sigma_)));
                for (int color = 0; color < 5; ++color) {
                    std::vector<double> vp = steady_v_, hp = steady_h_;
                    for (int i = 1; i < n; ++i) {
                        if ((i - 1) % 5 != color) continue;
                        if (comp == 0) vp[i] += eta; else hp[i] += eta;
                    }
                    std::vector<double> rp = resid(vp, hp);
                    for (int row = 0; row < m; ++row) {
                        int inode = row / 2 + 1;
                        for (int jn = std::max(1, inode - 2); jn <= std::min(n - 1, inode + 2); ++jn) {
                            if ((jn - 1) % 5 != color) continue;
                            int col = 2 * (jn - 1) + comp;
                            if (!J.in_band(row, col)) continue;
                            J.at(row, col) = (rp[row] - r[row]) / eta;
                        }
                    }
                }
            }
            std::vector<double> delta(r.begin(), r.end());
            J.solve(delta);
            double lambda = 1.0;
            for (int back = 0; back < 10; ++back) {
                std::vector<double> vt = steady_v_, ht = steady_h_;
                for (int i = 1; i < n; ++i) {
                    vt[i] -= lambda * delta[2 * (i - 1)];
                    ht[i] -= lambda * delta[2 * (i - 1) + 1];
                }
                bool ok = true;
                for (double val : vt)
                    if (!(val > v_floor_)) { ok = false; break; }
                if (ok) {
                    std::vector<double> rt = resid(vt, ht);
                    double rtn = 0.0;
                    for (double val : rt) rtn = std::max(rtn, std::abs(val));
                    if (rtn < rn || lambda < 1e-3) {
                        steady_v_ = std::move(vt);
                        steady_h_ = std::move(ht);
                        r = std::move(rt);
                        break;
                    }
                }
                lambda *= 0.5;
            }
        }
    }

    pressure_law pl_;
    double sigma_;
    sim_grid grid_;
    std::vector<double> seed_v_, seed_h_, steady_v_, steady_h_, v_, h_;
    std::vector<double> alpha_face_;
    double ghost_vl_ = 0, ghost_vr_ = 0, ghost_hl_ = 0, ghost_hr_ = 0;
    double v_floor_ = 0.0;
    double cfl_dt_ = 0.0;
    double t_ = 0.0;
};

// ---------------------------------------------------------------------------
// Weighted relative entropy
// ---------------------------------------------------------------------------

/// Quadrature of int a(x) |u(x + shift) - S(x)|^2 dx over the grid window
/// with `clip` cells excluded at each end (shift margin). The state is
/// sampled at x + shift through a monotone interpolant.
inline double weighted_relative_entropy_scalar(const sim_grid& g,
                                               const std::vector<double>& a_nodes,
                                               const std::vector<double>& steady,
                                               const hermite_curve& state,
                                               double shift, int clip) {
    if (std::abs(shift) > 0.125 * (g.h * g.n))
        throw window_error("weighted relative entropy: shift too large for window");
    int n = g.n;
    std::vector<double> f;
    f.reserve(n + 1 - 2 * clip);
    for (int i = clip; i <= n - clip; ++i) {
        double u = (shift == 0.0) ? state.ys()[i] : state.eval(g.x(i) + shift);
        double d = u - steady[i];
        f.push_back(a_nodes[i] * d * d);
    }
    return integrate_uniform(f, g.h);
}

/// System version with the effective-velocity entropy
/// (h - htilde)^2/2 + Q(v | vtilde).
inline double weighted_relative_entropy_ns(const sim_grid& g, const pressure_law& pl,
                                           const std::vector<double>& a_nodes,
                                           const std::vector<double>& steady_v,
                                           const std::vector<double>& steady_h,
                                           const hermite_curve& vstate,
                                           const hermite_curve& hstate,
                                           double shift, int clip) {
    if (std::abs(shift) > 0.125 * (g.h * g.n))
        throw window_error("weighted relative entropy: shift too large for window");
    int n = g.n;
    std::vector<double> f;
    f.reserve(n + 1 - 2 * clip);
    for (int i = clip; i <= n - clip; ++i) {
        double v = (shift == 0.0) ? vstate.ys()[i] : vstate.eval(g.x(i) + shift);
        double hh = (shift == 0.0) ? hstate.ys()[i] : hstate.eval(g.x(i) + shift);
        double dh = hh - steady_h[i];
        f.push_back(a_nodes[i] * (0.5 * dh * dh + pl.Q_rel(v, steady_v[i])));
    }
    return integrate_uniform(f, g.h);
}

// ---------------------------------------------------------------------------
// Transport of a simulated state to the shock variable
// ---------------------------------------------------------------------------

/// w(y) = u(S^{-1}(y) + shift) - y on the mesh range, with the chain-rule
/// derivative w_y = u_x / S' - 1. The steady interpolant provides both the
/// inverse and the slope.
inline scalar_pert_fn transport_scalar_state(const hermite_curve& steady_curve,
                                             const hermite_curve& state,
                                             double shift) {
    auto inv = [steady_curve](double y) { return steady_curve.inverse(y); };
    scalar_pert_fn f;
    f.w = [state, inv, shift](double y) { return state.eval(inv(y) + shift) - y; };
    f.wy = [state, steady_curve, inv, shift](double y) {
        double x = inv(y);
        return state.deriv(x + shift) / steady_curve.deriv(x) - 1.0;
    };
    return f;
}

inline sys_pert_fn transport_ns_state(const hermite_curve& steady_vcurve,
                                      const hermite_curve& steady_hcurve,
                                      const hermite_curve& vstate,
                                      const hermite_curve& hstate, double shift) {
    auto inv = [steady_vcurve](double y) { return steady_vcurve.inverse(y); };
    sys_pert_fn f;
    f.w = [vstate, inv, shift](double y) { return vstate.eval(inv(y) + shift) - y; };
    f.wy = [vstate, steady_vcurve, inv, shift](double y) {
        double x = inv(y);
        return vstate.deriv(x + shift) / steady_vcurve.deriv(x) - 1.0;
    };
    f.g = [hstate, steady_hcurve, inv, shift](double y) {
        double x = inv(y);
        return hstate.eval(x + shift) - steady_hcurve.eval(x);
    };
    return f;
}

// ---------------------------------------------------------------------------
// Decomposition formulas
// ---------------------------------------------------------------------------

struct scalar_decomposition {
    double y_term = 0.0;
    double z_term = 0.0;
    double r1_term = 0.0;
    double value(double rate) const { return 2.0 * rate * y_term + z_term + r1_term; }
};

inline scalar_decomposition eval_scalar_decomposition(const weight& wt,
                                                      const flux_function& fl, double K,
                                                      const scalar_pert_fn& f,
                                                      const quadrature_plan& plan) {
    scalar_decomposition d;
    d.y_term = eval_shift_term(wt, K, f, plan);
    d.z_term = eval_production(wt, fl, K, f, plan).total;
    d.r1_term = eval_cubic_remainder(wt, fl, K, f, plan);
    return d;
}

inline scalar_decomposition eval_scalar_decomposition(const weight& wt,
                                                      const flux_function& fl, double K,
                                                      const scalar_pert_fn& f,
                                                      const std::vector<double>& mesh) {
    return eval_scalar_decomposition(wt, fl, K, f, quadrature_plan::gauss_cells(mesh));
}

struct ns_decomposition {
    double y_term = 0.0;
    double b_term = 0.0;
    double g_term = 0.0;
    double value(double rate) const { return -rate * y_term + b_term - g_term; }
};

inline ns_decomposition eval_ns_decomposition(const weight& wt, const ns_shock& sh,
                                              const sys_pert_fn& f,
                                              const quadrature_plan& plan) {
    ns_decomposition d;
    d.y_term = eval_shift_term_ns(wt, sh, f, plan);
    d.b_term = eval_bad_terms(wt, sh, f, plan).total;
    d.g_term = eval_good_terms(wt, sh, f, plan).total;
    return d;
}

inline ns_decomposition eval_ns_decomposition(const weight& wt, const ns_shock& sh,
                                              const sys_pert_fn& f,
                                              const std::vector<double>& mesh) {
    return eval_ns_decomposition(wt, sh, f, quadrature_plan::gauss_cells(mesh));
}

// ---------------------------------------------------------------------------
// Shift paths
// ---------------------------------------------------------------------------

/// Sampled shift path X(t_i) with X(0) = 0 and a Lipschitz rate bound.
struct shift_path {
    std::vector<double> t;
    std::vector<double> x;
    double lip = 0.0;
    bool mollified = false;

    double eval(double tt) const {
        if (t.empty()) return 0.0;
        if (tt <= t.front()) return x.front();
        if (tt >= t.back()) return x.back();
        std::size_t lo = 0, hi = t.size() - 1;
        while (hi - lo > 1) {
            std::size_t mid = (lo + hi) / 2;
            if (t[mid] <= tt) lo = mid; else hi = mid;
        }
        double s = (tt - t[lo]) / (t[hi] - t[lo]);
        return x[lo] + s * (x[hi] - x[lo]);
    }
    double max_rate() const {
        double m = 0.0;
        for (std::size_t i = 0; i + 1 < t.size(); ++i)
            m = std::max(m, std::abs(x[i + 1] - x[i]) / (t[i + 1] - t[i]));
        return m;
    }
};

/// Mollification X_n = phi_{1/n} * X with the one-sided kernel supported on
/// [0, 2/n], so X_n(0) = 0 when X vanishes on the negative axis (the path is
/// extended by zero outside its sample range).
inline shift_path mollify_shift(const shift_path& in, int n_mollify) {
    if (n_mollify < 1) throw domain_error("mollify_shift: n must be positive");
    shift_path out = in;
    out.mollified = true;
    double radius = 2.0 / n_mollify;
    const int m = 256;
    std::vector<double> ker(m + 1), s(m + 1);
    double sum = 0.0;
    for (int j = 0; j <= m; ++j) {
        s[j] = radius * j / m;
        ker[j] = bump(n_mollify * s[j] - 1.0);
        sum += ker[j] * (j == 0 || j == m ? 0.5 : 1.0);
    }
    double ds = radius / m;
    for (double& k : ker) k /= (sum * ds);
    auto x_ext = [&](double tt) { return tt <= 0.0 ? 0.0 : in.eval(tt); };
    for (std::size_t i = 0; i < out.t.size(); ++i) {
        double acc = 0.0;
        for (int j = 0; j <= m; ++j)
            acc += ker[j] * x_ext(out.t[i] - s[j]) * ds * (j == 0 || j == m ? 0.5 : 1.0);
        out.x[i] = acc;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Shift optimization
// ---------------------------------------------------------------------------

/// Argmin of `phi_of_shift` over [-reach, reach]: coarse grid scan followed by
/// golden-section refinement, deterministic tie-break toward smaller |shift|.
inline double optimize_shift(const std::function<double(double)>& phi_of_shift,
                             double reach, int grid_points = 17) {
    if (!(reach > 0.0)) return 0.0;
    double best_x = 0.0;
    double best_v = phi_of_shift(0.0);
    std::vector<double> xs(grid_points);
    for (int i = 0; i < grid_points; ++i)
        xs[i] = -reach + 2.0 * reach * i / (grid_points - 1);
    std::sort(xs.begin(), xs.end(),
              [](double a, double b) { return std::abs(a) < std::abs(b); });
    for (double x : xs) {
        double v = phi_of_shift(x);
        if (v < best_v * (1.0 - 1e-15) - 1e-300) {
            best_v = v;
            best_x = x;
        }
    }
    double step = 2.0 * reach / (grid_points - 1);
    double lo = std::max(-reach, best_x - step);
    double hi = std::min(reach, best_x + step);
    double refined = golden_min(phi_of_shift, lo, hi, 1e-3 * step);
    double rv = phi_of_shift(refined);
    if (rv < best_v * (1.0 - 1e-15) - 1e-300) return refined;
    return best_x;
}

} // namespace ashock

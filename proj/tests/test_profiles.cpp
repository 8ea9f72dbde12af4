#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "ashock/profile.hpp"

using namespace ashock;

namespace {
double burgers_exact(double x, double K) {
    // closed form for A(u) = u^2/2: separate S' = S(S+K)/2
    return -K / (1.0 + std::exp(-K * x / 2.0));
}
} // namespace

TEST_CASE("burgers K=2 profile matches the closed form") {
    auto fb = burgers_flux();
    auto pr = solve_scalar_profile(fb, 2.0, 40.0, 0.01);
    CHECK(pr.sigma == doctest::Approx(-1.0));
    CHECK(pr.value(0.0) == doctest::Approx(-1.0).epsilon(1e-12)); // midpoint normalization
    CHECK(pr.deriv(0.0) == doctest::Approx(-0.5).epsilon(1e-10));
    double max_err = 0.0;
    for (std::size_t i = 0; i < pr.x.size(); ++i)
        max_err = std::max(max_err, std::abs(pr.s[i] - burgers_exact(pr.x[i], 2.0)));
    CHECK(max_err < 1e-8);
}

TEST_CASE("profile invariants: monotone, decayed tails, ODE residual") {
    auto fe = exponential_flux();
    for (double K : {2.0, 8.0}) {
        auto pr = solve_scalar_profile(fe, K, 0.0, 0.0);
        // non-increasing everywhere; strict wherever the values are
        // representably distinct from the end states
        for (std::size_t i = 0; i + 1 < pr.s.size(); ++i) {
            CHECK(pr.s[i] >= pr.s[i + 1]);
            bool resolvable = pr.s[i] < -1e-12 * K && pr.s[i + 1] > -K + 1e-12 * K;
            if (resolvable) CHECK(pr.s[i] > pr.s[i + 1]);
        }
        CHECK(std::abs(pr.s.front() - 0.0) <= pr.tail_tol);
        CHECK(std::abs(pr.s.back() + K) <= pr.tail_tol);
        // residual of the interpolated profile at cell midpoints
        double budget = 1e-8 * std::max(1.0, std::abs(fe.A1(-K)));
        double worst = 0.0;
        for (std::size_t i = 0; i + 1 < pr.x.size(); i += 7) {
            double xm = 0.5 * (pr.x[i] + pr.x[i + 1]);
            worst = std::max(worst,
                             std::abs(pr.curve.deriv(xm) - pr.ode_rhs(pr.curve.eval(xm))));
        }
        CHECK(worst <= budget);
    }
}

TEST_CASE("window too small raises") {
    auto fb = burgers_flux();
    CHECK_THROWS_AS(solve_scalar_profile(fb, 2.0, 5.0, 0.01), window_error);
    CHECK_THROWS_AS(solve_scalar_profile(fb, -1.0, 30.0, 0.01), domain_error);
}

TEST_CASE("inverse map") {
    auto fb = burgers_flux();
    auto pr = solve_scalar_profile(fb, 2.0, 40.0, 0.01);
    CHECK(pr.invert(-1.0) == doctest::Approx(0.0).epsilon(1e-10));
    double y1 = -2.0 / (1.0 + std::exp(1.0));
    CHECK(pr.invert(y1) == doctest::Approx(-1.0).epsilon(1e-6));
    CHECK_THROWS_AS(pr.invert(-2.0), range_error);
    CHECK_THROWS_AS(pr.invert(0.0), range_error);

    // round trip on random interior values
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> u(-1.95, -0.05);
    for (int k = 0; k < 100; ++k) {
        double y = u(rng);
        CHECK(pr.value(pr.invert(y)) == doctest::Approx(y).epsilon(1e-8));
    }
}

TEST_CASE("translate inequality for the sampled profile") {
    auto fb = burgers_flux();
    auto pr = solve_scalar_profile(fb, 2.0, 40.0, 0.01);
    // discrete L2 norms on the grid
    double dnorm = 0.0;
    for (std::size_t i = 0; i < pr.x.size(); ++i) dnorm += pr.sp[i] * pr.sp[i];
    dnorm = std::sqrt(dnorm * pr.spacing);
    for (double m : {0.01, 0.1, 1.0}) {
        double diff = 0.0;
        for (std::size_t i = 0; i < pr.x.size(); ++i) {
            double xm = pr.x[i] + m;
            double sv = xm > pr.x.back() ? pr.s.back() : pr.curve.eval(xm);
            diff += (pr.s[i] - sv) * (pr.s[i] - sv);
        }
        diff = std::sqrt(diff * pr.spacing);
        CHECK(diff <= dnorm * m * (1.0 + 1e-3));
    }
}

TEST_CASE("refinement order of the sampled profile") {
    auto fe = exponential_flux();
    auto p1 = solve_scalar_profile(fe, 3.0, 30.0, 0.04);
    auto p2 = solve_scalar_profile(fe, 3.0, 30.0, 0.02);
    auto p3 = solve_scalar_profile(fe, 3.0, 30.0, 0.01);
    double e12 = 0.0, e23 = 0.0;
    for (double x : {-4.0, -1.5, -0.3, 0.6, 2.5}) {
        e12 = std::max(e12, std::abs(p1.value(x) - p2.value(x)));
        e23 = std::max(e23, std::abs(p2.value(x) - p3.value(x)));
    }
    double order = std::log2(e12 / e23);
    CHECK(order >= 3.8); // stepper + fill are at least 4th order
}

TEST_CASE("steep-layer spacing for the exponential flux at large K") {
    auto fe = exponential_flux();
    double K = 25.0;
    auto pr = solve_scalar_profile(fe, K, 0.0, 0.0);
    CHECK(pr.spacing <= 0.1 / std::abs(fe.A1(-K)));
    CHECK(std::abs(pr.s.back() + K) <= pr.tail_tol);
}

TEST_CASE("navier-stokes shock: end states and speed") {
    pressure_law pl{2.0};
    auto sh = solve_ns_profile(pl, 1.0, 0.0, 0.5, 0.0, 0.0);
    CHECK(sh.sigma == doctest::Approx(-std::sqrt(6.0)).epsilon(1e-14));
    CHECK(sh.u_plus == doctest::Approx(-std::sqrt(6.0) / 2.0).epsilon(1e-14));
    CHECK(sh.p_jump == doctest::Approx(3.0).epsilon(1e-14));

    // Rankine-Hugoniot residuals
    double r1 = -sh.sigma * (sh.v_plus - sh.v_minus) - (sh.u_plus - sh.u_minus);
    double r2 = -sh.sigma * (sh.u_plus - sh.u_minus) + sh.p_jump;
    CHECK(std::abs(r1) <= 1e-10 * std::abs(sh.sigma));
    CHECK(std::abs(r2) <= 1e-10 * std::abs(sh.p_jump));

    // Lax conditions for the 1-shock
    CHECK(sh.sigma < 0.0);
    CHECK(sh.u_plus < sh.u_minus);

    // profile fixed points and the pressure-normalized coordinate
    CHECK(std::abs(sh.q(sh.v_minus - 1e-13)) < 1e-10);
    CHECK(std::abs(sh.q(sh.v_plus + 1e-13)) < 1e-10);
    CHECK(sh.b(sh.v_minus) == doctest::Approx(0.0));
    CHECK(sh.b(sh.v_plus) == doctest::Approx(1.0));

    // monotone decreasing volume, strict in the resolvable band
    for (std::size_t i = 0; i + 1 < sh.v.size(); ++i) {
        CHECK(sh.v[i] >= sh.v[i + 1]);
        if (sh.v[i] < 1.0 - 1e-12 && sh.v[i + 1] > 0.5 + 1e-12)
            CHECK(sh.v[i] > sh.v[i + 1]);
    }
    CHECK(std::abs(sh.v.front() - 1.0) <= sh.tail_tol);
    CHECK(std::abs(sh.v.back() - 0.5) <= sh.tail_tol);

    // integrated second profile equation: h = u_- + (p(v) - p(v_-))/sigma
    for (std::size_t i = 0; i < sh.v.size(); i += 97) {
        double expect = sh.u_minus + (pl.p(sh.v[i]) - pl.p(sh.v_minus)) / sh.sigma;
        CHECK(sh.h[i] == doctest::Approx(expect).epsilon(1e-10));
    }

    // ODE residual at midpoints
    double worst = 0.0;
    for (std::size_t i = 0; i + 1 < sh.xi.size(); i += 11) {
        double xm = 0.5 * (sh.xi[i] + sh.xi[i + 1]);
        worst = std::max(worst, std::abs(sh.vcurve.deriv(xm) - sh.q(sh.vcurve.eval(xm))));
    }
    CHECK(worst <= 1e-8 * (sh.v_minus - sh.v_plus));
}

TEST_CASE("navier-stokes shock error paths") {
    pressure_law pl{5.0 / 3.0};
    CHECK_THROWS_AS(solve_ns_profile(pl, 1.0, 0.0, 1.5, 0.0, 0.0), wrong_branch_error);
    CHECK_THROWS_AS(solve_ns_profile(pl, 1.0, 0.0, -0.5, 0.0, 0.0), vacuum_error);
    auto sh = solve_ns_profile(pl, 1.0, 0.0, 0.3, 0.0, 0.0);
    CHECK_THROWS_AS(sh.invert(0.3), range_error);
    CHECK(sh.invert(0.65) == doctest::Approx(0.0).epsilon(1e-8)); // midpoint normalization
}

TEST_CASE("profile csv export") {
    auto fb = burgers_flux();
    auto pr = solve_scalar_profile(fb, 2.0, 30.0, 0.5);
    std::string csv = profile_csv(pr);
    CHECK(csv.substr(0, 4) == "x,S\n");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == static_cast<long>(pr.x.size()) + 1);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "ashock/banded.hpp"
#include "ashock/interp.hpp"
#include "ashock/numerics.hpp"
#include "ashock/ode.hpp"

using namespace ashock;

TEST_CASE("bisection finds simple roots") {
    auto f = [](double x) { return x * x * x - 2.0; };
    double r = bisect(f, 0.0, 2.0, 1e-14);
    CHECK(r == doctest::Approx(std::cbrt(2.0)).epsilon(1e-12));
    CHECK_THROWS_AS(bisect([](double) { return 1.0; }, 0.0, 1.0, 1e-12), bracket_error);
}

TEST_CASE("bracket expansion locates a sign change") {
    auto f = [](double x) { return x - 10.0; };
    bracket br = expand_bracket(f, 0.0, 0.5);
    CHECK(f(br.lo) * f(br.hi) <= 0.0);
}

TEST_CASE("golden-section minimization") {
    auto f = [](double x) { return (x - 0.3) * (x - 0.3) + 1.0; };
    double m = golden_min(f, -1.0, 1.0, 1e-10);
    CHECK(m == doctest::Approx(0.3).epsilon(1e-6));
}

TEST_CASE("composite Gauss quadrature is 4th order") {
    auto f = [](double x) { return std::exp(x) * std::sin(3.0 * x); };
    double exact = (std::exp(1.0) * (std::sin(3.0) - 3.0 * std::cos(3.0)) + 3.0) / 10.0;
    double e1 = std::abs(integrate_cells(f, uniform_mesh(0, 1, 16)) - exact);
    double e2 = std::abs(integrate_cells(f, uniform_mesh(0, 1, 32)) - exact);
    double e3 = std::abs(integrate_cells(f, uniform_mesh(0, 1, 64)) - exact);
    CHECK(e1 / e2 > 3.9 * 3.9); // Richardson ratio for a 4th-order rule is ~16
    CHECK(e2 / e3 > 3.9 * 3.9);
}

TEST_CASE("nodal 4-point composite matches Gauss on graded meshes") {
    auto f = [](double x) { return std::sin(3.0 * x) / (0.01 + x); };
    auto mesh = graded_mesh(0.0, 1.0, 1e-5, 1e-4, 0.005);
    double g = integrate_cells(f, mesh);
    double n = quadrature_plan::nodal4(mesh).integrate(f);
    CHECK(n == doctest::Approx(g).epsilon(1e-6));
}

TEST_CASE("adaptive Simpson handles smooth integrands tightly") {
    double v = adaptive_simpson([](double x) { return std::cos(x); }, 0.0, 2.0, 1e-13);
    CHECK(v == doctest::Approx(std::sin(2.0)).epsilon(1e-12));
}

TEST_CASE("uniform 4th-order rule") {
    int n = 64;
    std::vector<double> y(n + 1);
    for (int i = 0; i <= n; ++i) y[i] = std::exp(i / double(n));
    double v = integrate_uniform(y, 1.0 / n);
    CHECK(v == doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-9));
}

TEST_CASE("hermite curve reproduces smooth functions and inverts") {
    int n = 200;
    std::vector<double> x(n + 1), y(n + 1), m(n + 1);
    for (int i = 0; i <= n; ++i) {
        x[i] = -3.0 + 6.0 * i / n;
        y[i] = std::tanh(x[i]);
        m[i] = 1.0 - y[i] * y[i];
    }
    hermite_curve c(x, y, m);
    CHECK(c.eval(0.725) == doctest::Approx(std::tanh(0.725)).epsilon(1e-7));
    CHECK(c.deriv(-1.2) ==
          doctest::Approx(1.0 - std::tanh(-1.2) * std::tanh(-1.2)).epsilon(1e-6));
    double xr = c.inverse(std::tanh(0.9));
    CHECK(xr == doctest::Approx(0.9).epsilon(1e-9));
    CHECK_THROWS_AS(c.inverse(1.5), range_error);
}

TEST_CASE("fd4 slopes are 4th order on uniform grids") {
    int n = 128;
    std::vector<double> x(n + 1), y(n + 1);
    for (int i = 0; i <= n; ++i) {
        x[i] = i / double(n);
        y[i] = std::sin(3.0 * x[i]);
    }
    auto m = hermite_curve::fd4_slopes(x, y);
    double err = 0.0;
    for (int i = 0; i <= n; ++i)
        err = std::max(err, std::abs(m[i] - 3.0 * std::cos(3.0 * x[i])));
    CHECK(err < 5e-7);
}

TEST_CASE("adaptive ODE integration hits a known trajectory") {
    // y' = -2y from y(0) = 1, integrate until y <= 1e-6
    auto tr = integrate_autonomous([](double y) { return -2.0 * y; }, 0.0, 1.0, +1,
                                   [](double y) { return y <= 1e-6; }, 100.0);
    CHECK(tr.hit_stop);
    double t_end = tr.x.back();
    CHECK(tr.y.back() == doctest::Approx(std::exp(-2.0 * t_end)).epsilon(1e-9));
}

TEST_CASE("tridiagonal and banded solvers agree with dense references") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    int n = 40;
    std::vector<double> a(n, 0.0), b(n), c(n, 0.0), d(n), sol(n);
    for (int i = 0; i < n; ++i) {
        sol[i] = u(rng);
        b[i] = 4.0 + u(rng);
        if (i) a[i] = u(rng);
        if (i + 1 < n) c[i] = u(rng);
    }
    for (int i = 0; i < n; ++i) {
        d[i] = b[i] * sol[i];
        if (i) d[i] += a[i] * sol[i - 1];
        if (i + 1 < n) d[i] += c[i] * sol[i + 1];
    }
    auto aa = a, bb = b, cc = c, dd = d;
    solve_tridiagonal(aa, bb, cc, dd);
    for (int i = 0; i < n; ++i) CHECK(dd[i] == doctest::Approx(sol[i]).epsilon(1e-10));

    banded_matrix J(n, 2, 2);
    std::vector<double> rhs(n, 0.0), ref(n);
    for (int i = 0; i < n; ++i) ref[i] = u(rng);
    for (int i = 0; i < n; ++i) {
        for (int j = std::max(0, i - 2); j <= std::min(n - 1, i + 2); ++j)
            J.at(i, j) = (i == j ? 6.0 : 0.0) + 0.5 * u(rng);
    }
    for (int i = 0; i < n; ++i)
        for (int j = std::max(0, i - 2); j <= std::min(n - 1, i + 2); ++j)
            rhs[i] += J.at(i, j) * ref[j];
    J.solve(rhs);
    for (int i = 0; i < n; ++i) CHECK(rhs[i] == doctest::Approx(ref[i]).epsilon(1e-8));
}

TEST_CASE("graded mesh brackets the interval and grows gently") {
    auto mesh = graded_mesh(-2.0, 3.0, 1e-8, 1e-6, 0.05);
    CHECK(mesh.front() == -2.0);
    CHECK(mesh.back() == 3.0);
    for (std::size_t i = 0; i + 1 < mesh.size(); ++i) CHECK(mesh[i] < mesh[i + 1]);
}

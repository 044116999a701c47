#include "rmtlab/errors.hpp"
#include "rmtlab/quadrature.hpp"
#include "rmtlab/reference.hpp"
#include "support.hpp"

#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

using namespace rmtlab;

TEST_CASE("sine kernel") {
    CHECK(sine_kernel(0.3, 0.3) == 1.0);
    CHECK(sine_kernel(1.0, 0.5) == doctest::Approx(2.0 / M_PI).epsilon(1e-15));
    CHECK(std::abs(sine_kernel(2.0, 1.0)) < 1e-16);
    // the series branch joins the direct formula
    for (double d : {0.99e-4, 1.01e-4, 5e-5, 1e-9})
        CHECK(sine_kernel(d, 0.0) == doctest::Approx(std::sin(M_PI * d) / (M_PI * d)).epsilon(1e-15));
    CHECK(sine_kernel(0.2, 0.7) == sine_kernel(0.7, 0.2));
}

TEST_CASE("fredholm determinant of the sine kernel") {
    CHECK(fredholm_det(0.0).value == 1.0);
    // high-precision values from an independent Nystrom evaluation
    CHECK(gap_probability(0.5) == doctest::Approx(0.5150733950728518771).epsilon(1e-12));
    CHECK(gap_probability(1.0) == doctest::Approx(0.1702174213791852307).epsilon(1e-12));
    CHECK(gap_probability(2.0) == doctest::Approx(0.003497325149169097698).epsilon(1e-10));
    CHECK(gap_probability(4.0) == doctest::Approx(1.090795377954551526e-9).epsilon(1e-7));

    for (double s : {0.01, 0.05, 0.1}) {
        for (int m : {40, 80}) {
            const double r = fredholm_det_at_order(s, m) - (1.0 - s);
            CHECK(std::abs(r) <= s * s);
        }
    }
    const auto at2 = fredholm_det(2.0);
    CHECK(at2.error < 1e-10);
    CHECK(std::abs(fredholm_det_at_order(2.0, 40) - fredholm_det_at_order(2.0, 80)) < 1e-10);
    CHECK(fredholm_det_converged(5.0).error < 1e-10);

    double previous = 1.0;
    for (double s = 0.0; s <= 6.0 + 1e-12; s += 0.05) {
        const double e = gap_probability(s);
        CHECK(e > 0.0);
        CHECK(e <= previous);
        previous = e;
    }
}

TEST_CASE("gaudin distribution") {
    CHECK(std::abs(gaudin_density_at(0.0)) < 1e-4);
    CHECK(gaudin_density_at(1.0) == doctest::Approx(0.90290378958021465).epsilon(1e-6));
    CHECK(gaudin_density_at(0.5) == doctest::Approx(0.59323015852012235).epsilon(1e-6));
    CHECK(gaudin_cdf_at(1.0) == doctest::Approx(0.53389856666756595).epsilon(1e-7));

    const double h = 0.01;
    const auto grid = uniform_grid(0.0, 6.0, h);
    REQUIRE(grid.size() == 601);
    const auto p = gaudin_density(grid);
    std::vector<double> sp(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
        CHECK(p.values[k] >= 0.0);
        sp[k] = grid[k] * p.values[k];
    }
    CHECK(std::abs(simpson(p.values, h) - 1.0) < 1e-4);
    CHECK(std::abs(simpson(sp, h) - 1.0) < 1e-3);

    // two routes to the cdf: cumulative quadrature of p, and 1 + E'(s)
    for (std::size_t upto : {100u, 200u, 300u}) {
        const std::vector<double> head(p.values.begin(), p.values.begin() + static_cast<long>(upto) + 1);
        CHECK(std::abs(simpson(head, h) - gaudin_cdf_at(grid[upto])) < 1e-4);
    }
    const auto c = gaudin_cdf(grid);
    CHECK(std::is_sorted(c.values.begin(), c.values.end()));
    CHECK(c.values.front() == doctest::Approx(0.0).epsilon(1e-8));
    CHECK(c.values.back() <= 1.0 + 1e-8);
    CHECK(p.metadata.count("diff_step") == 1);
}

TEST_CASE("hermite functions and the GUE kernel") {
    SUBCASE("orthonormality") {
        const int n = 12;
        Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(n, n);
        for (int a = 0; a < n; ++a)
            for (int b = 0; b <= a; ++b) {
                gram(a, b) = integrate_real_line([&](double u) {
                    const auto phi = hermite_functions(n, u);
                    return phi[static_cast<std::size_t>(a)] * phi[static_cast<std::size_t>(b)];
                }, 1e-12);
                gram(b, a) = gram(a, b);
            }
        CHECK((gram - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-10);
    }
    SUBCASE("no overflow far out and at large order") {
        const auto phi = hermite_functions(10000, 100.0);
        for (double v : phi) CHECK(std::isfinite(v));
        CHECK(std::isfinite(gue_kernel(10000, 150.0, 150.0)));
        CHECK_THROWS_AS(gue_kernel(10001, 0.0, 0.0), DomainError);
        CHECK_THROWS_AS(gue_kernel(0, 0.0, 0.0), DomainError);
    }
    SUBCASE("n = 1 is the standard normal density") {
        for (double x : {-2.0, -0.3, 0.0, 1.7})
            CHECK(gue_kernel(1, x, x) == doctest::Approx(std::exp(-x * x / 2) / std::sqrt(2 * M_PI)).epsilon(1e-14));
    }
    SUBCASE("reference values") {
        // direct Hermite-polynomial sums in extended precision
        CHECK(gue_kernel(5, 0.3, 0.3) == doctest::Approx(0.33159733665012082).epsilon(1e-13));
        CHECK(gue_kernel(5, 0.3, -1.1) == doctest::Approx(0.23561686879030566).epsilon(1e-13));
        CHECK(gue_kernel(20, 1.5, 1.5) == doctest::Approx(0.32205424394511727).epsilon(1e-13));
    }
    SUBCASE("trace and reproducing identities") {
        for (int n : {1, 3, 10, 40}) {
            const double trace = integrate_real_line([&](double x) { return gue_kernel(n, x, x); }, 1e-12);
            CHECK(std::abs(trace - n) < 1e-6);
        }
        testgen::Gen g(601);
        for (int k = 0; k < 6; ++k) {
            const int n = static_cast<int>(g.index(2, 15));
            const double x = g.uniform(-5.0, 5.0), y = g.uniform(-5.0, 5.0);
            const double composed = integrate_real_line([&](double t) { return gue_kernel(n, x, t) * gue_kernel(n, t, y); }, 1e-12);
            CHECK(std::abs(composed - gue_kernel(n, x, y)) < 1e-6);
            CHECK(gue_kernel(n, x, y) == gue_kernel(n, y, x));
        }
    }
    SUBCASE("the bulk kernel approaches the sine kernel") {
        // fine-scale density at 0 is 1/pi, so pi K_n(x/pi... ) is compared in unfolded units
        const int n = 400;
        for (double d : {0.25, 0.5, 1.5}) {
            const double unfolded = M_PI * gue_kernel(n, 0.0, M_PI * d);
            CHECK(std::abs(unfolded - sine_kernel(0.0, d)) < 5e-3);
        }
    }
}

TEST_CASE("sine-kernel correlations") {
    CHECK(correlation_reference({0.7}) == doctest::Approx(1.0));
    CHECK(std::abs(correlation_reference({0.0, 0.0})) < 1e-15);
    CHECK(correlation_reference({0.0, 0.5}) == doctest::Approx(1.0 - 4.0 / (M_PI * M_PI)).epsilon(1e-14));
    CHECK_THROWS_AS(correlation_reference({0, 1, 2, 3, 4, 5, 6}), DomainError);
    testgen::Gen g(602);
    for (int k = 0; k < 200; ++k) {
        std::vector<double> t(g.index(1, 4));
        for (auto& v : t) v = g.uniform(-3.0, 3.0);
        CHECK(correlation_reference(t) >= -1e-12);
    }
    CHECK(gue_correlation(5, {0.3}) == doctest::Approx(gue_kernel(5, 0.3, 0.3)));
    const double two = gue_correlation(5, {0.3, -1.1});
    CHECK(two == doctest::Approx(gue_kernel(5, 0.3, 0.3) * gue_kernel(5, -1.1, -1.1) - std::pow(gue_kernel(5, 0.3, -1.1), 2)));
}

TEST_CASE("least singular value law") {
    const auto grid = uniform_grid(0.01, 4.0, 0.01);
    const auto sol = solve_lsv_ode(grid);
    REQUIRE(sol.f.size() == grid.size());
    const double t0 = 1e-3;
    const auto at_seed = solve_lsv_ode({t0});
    const double ratio = at_seed.f[0] / (-t0 / M_PI);
    CHECK(ratio == doctest::Approx(1.0 + t0 / M_PI + t0 * t0 / (M_PI * M_PI)).epsilon(1e-12));
    CHECK(std::abs(ratio - 1.0) < 4e-4);

    const auto cdf = lsv_cdf(uniform_grid(0.0, 4.0, 0.05));
    CHECK(cdf.values.front() == 0.0);
    CHECK(std::is_sorted(cdf.values.begin(), cdf.values.end()));
    CHECK(cdf.values.back() < 1.0);

    // exp(int f / x) is the sine-kernel gap probability of an interval holding t / pi eigenvalues on average
    const auto gap = lsv_gap_probability(grid);
    for (std::size_t k = 0; k < grid.size(); k += 37)
        CHECK(gap.values[k] == doctest::Approx(gap_probability(grid[k] / M_PI)).epsilon(1e-7));
    CHECK_THROWS_AS(lsv_cdf({0.5, 4.5}), DomainError);
}

TEST_CASE("reference curves interpolate") {
    ReferenceCurve c{"line", {0.0, 1.0, 2.0}, {0.0, 2.0, 3.0}, {}};
    CHECK(c.at(0.5) == doctest::Approx(1.0));
    CHECK(c.at(1.5) == doctest::Approx(2.5));
    CHECK(c.at(-1.0) == 0.0);
    CHECK(c.at(9.0) == 3.0);
    const auto g = uniform_grid(0.0, 1.0, 0.1);
    CHECK(g.size() == 11);
    CHECK(g.back() == 1.0);
}

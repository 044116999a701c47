#include "rmtlab/errors.hpp"
#include "rmtlab/harness.hpp"
#include "rmtlab/spectral.hpp"
#include "support.hpp"

#include <doctest.h>

#include <atomic>
#include <cmath>

using namespace rmtlab;

namespace {

ExperimentConfig small_experiment(EnsembleSpec a, EnsembleSpec b, std::size_t trials, std::uint64_t seed) {
    ExperimentConfig c;
    const std::size_t n = a.n;
    c.ensemble_a = std::move(a);
    c.ensemble_b = std::move(b);
    c.statistic = StatisticSpec::classical(n, {n / 2}, TestFunctionKind::bump, 1.0, 0.1);
    c.trials = trials;
    c.seed = seed;
    return c;
}

EnsembleSpec bernoulli(std::size_t n) {
    const auto pm = AtomDistribution::discrete({{-1.0, 0.5}, {1.0, 0.5}});
    return EnsembleSpec::wigner_hermitian(n, pm, pm, Normalization::fine);
}

}  // namespace

TEST_CASE("parallel_for covers every index once") {
    for (std::size_t jobs : {1u, 2u, 5u}) {
        std::vector<std::atomic<int>> hits(97);
        parallel_for(hits.size(), jobs, [&](std::size_t i) { hits[i]++; });
        for (auto& h : hits) CHECK(h.load() == 1);
    }
    CHECK_THROWS_AS(parallel_for(10, 3, [](std::size_t i) { if (i == 7) throw DomainError("boom"); }), DomainError);
    CHECK(trial_seed(1, 2) != trial_seed(2, 1));
    CHECK(trial_seed(5, 0) == trial_seed(5, 0));
}

TEST_CASE("test functions") {
    const TestFunction bump{TestFunctionKind::bump, 3.0, 2.0};
    CHECK(bump(3.0) == doctest::Approx(1.0));
    CHECK(bump(5.0) == 0.0);
    CHECK(bump(0.9) == 0.0);
    CHECK(bump(4.0) > 0.0);
    const TestFunction step{TestFunctionKind::smooth_step, 0.0, 1.0};
    CHECK(step(-1.0) == 1.0);
    CHECK(step(1.0) == 0.0);
    CHECK(step(0.0) == doctest::Approx(0.5));
    double previous = 2.0;
    for (double x = -1.5; x <= 1.5; x += 0.01) {
        CHECK(step(x) <= previous);
        previous = step(x);
    }
    const TestFunction gauss{TestFunctionKind::gaussian, 0.0, 1.0};
    const auto bounds = gauss.derivative_bounds(3);
    REQUIRE(bounds.size() == 4);
    CHECK(bounds[0] == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(bounds[1] == doctest::Approx(0.6065306597102073).epsilon(1e-3));
    CHECK(bounds[2] == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(bounds[3] == doctest::Approx(1.3801190461471984).epsilon(1e-3));
    const auto wide = TestFunction{TestFunctionKind::gaussian, 0.0, 2.0}.derivative_bounds(2);
    CHECK(wide[1] == doctest::Approx(bounds[1] / 2).epsilon(1e-3));
    for (auto k : {TestFunctionKind::bump, TestFunctionKind::gaussian, TestFunctionKind::smooth_step})
        CHECK(parse_test_function(test_function_name(k)) == k);
    CHECK_THROWS_AS(parse_test_function("box"), DomainError);
}

TEST_CASE("statistic specs") {
    const auto s = StatisticSpec::classical(100, {50}, TestFunctionKind::bump, 1.0, 0.1);
    REQUIRE(s.functions.size() == 1);
    CHECK(s.functions[0].center == doctest::Approx(100.0 * classical_location(50.5 / 100.0)));
    s.validate(100);
    CHECK_THROWS_AS(StatisticSpec::classical(100, {5}, TestFunctionKind::bump, 1.0, 0.1).validate(100), DomainError);
    CHECK_THROWS_AS(StatisticSpec::classical(100, {95}, TestFunctionKind::bump, 1.0, 0.1).validate(100), DomainError);
    StatisticSpec edge = StatisticSpec::classical(100, {5}, TestFunctionKind::bump, 1.0, 0.1);
    edge.bulk = false;
    edge.validate(100);

    StatisticSpec two{{1, 2}, {{TestFunctionKind::gaussian, 0.0, 1.0}, {TestFunctionKind::gaussian, 1.0, 1.0}}, 0.1, false};
    CHECK(two.evaluate({-5.0, 0.5, 2.0}) == doctest::Approx(std::exp(-0.125) * std::exp(-0.5)));

    const auto m = estimate_mean({1.0, 2.0, 3.0});
    CHECK(m.mean == 2.0);
    CHECK(m.stderr_ == doctest::Approx(1.0 / std::sqrt(3.0)));
}

TEST_CASE("four moment comparison") {
    SUBCASE("identical specs give exactly zero difference") {
        const auto c = small_experiment(EnsembleSpec::gue(40, Normalization::fine), EnsembleSpec::gue(40, Normalization::fine), 30, 11);
        const auto r = four_moment_compare(c);
        CHECK(r.delta == 0.0);
        CHECK(r.values_a == r.values_b);
        CHECK(r.match_order_off_diag == 4);
        CHECK(r.match_order_diag == 4);
    }
    SUBCASE("results do not depend on the worker count") {
        auto c = small_experiment(EnsembleSpec::gue(30, Normalization::fine), bernoulli(30), 24, 12);
        const auto one = four_moment_compare(c);
        c.jobs = 3;
        const auto three = four_moment_compare(c);
        CHECK(one.values_a == three.values_a);
        CHECK(one.values_b == three.values_b);
        CHECK(one.delta == three.delta);
        CHECK(one.match_order_off_diag == 3);
        CHECK(one.match_order_diag == 3);
    }
    SUBCASE("bad inputs") {
        auto c = small_experiment(EnsembleSpec::gue(30, Normalization::fine), EnsembleSpec::gue(31, Normalization::fine), 4, 1);
        CHECK_THROWS_AS(four_moment_compare(c), DomainError);
        // the statistic is defined on fine-scale eigenvalues whatever the spec asks for
        c = small_experiment(EnsembleSpec::gue(30, Normalization::coarse), EnsembleSpec::gue(30, Normalization::fine), 4, 1);
        const auto forced = four_moment_compare(c);
        CHECK(forced.values_a == forced.values_b);
        c = small_experiment(EnsembleSpec::gue(30, Normalization::fine), EnsembleSpec::gue(30, Normalization::fine), 4, 1);
        c.statistic = StatisticSpec::classical(30, {1}, TestFunctionKind::bump, 1.0, 0.1);
        CHECK_THROWS_AS(four_moment_compare(c), DomainError);
    }
}

TEST_CASE("lindeberg swapping") {
    const std::size_t n = 8;
    auto c = small_experiment(EnsembleSpec::gue(n, Normalization::fine), bernoulli(n), 40, 21);
    c.statistic = StatisticSpec::classical(n, {4}, TestFunctionKind::gaussian, 2.0, 0.1);
    const auto order = default_swap_order(n);
    REQUIRE(order.size() == n * (n + 1) / 2);
    CHECK(order.front() == std::pair<std::size_t, std::size_t>{0, 1});
    CHECK(order[n * (n - 1) / 2] == std::pair<std::size_t, std::size_t>{0, 0});
    CHECK(order.back() == std::pair<std::size_t, std::size_t>{n - 1, n - 1});

    SUBCASE("no swaps leaves ensemble A") {
        const auto r = lindeberg_swap_path(c, {});
        const auto direct = four_moment_compare(c);
        CHECK(r.start_values == direct.values_a);
        CHECK(r.end_values == r.start_values);
        CHECK(r.cumulative_drift == 0.0);
    }
    SUBCASE("the full path ends at ensemble B and the drift telescopes") {
        const auto r = lindeberg_swap_path(c, order);
        const auto direct = four_moment_compare(c);
        REQUIRE(r.end_values.size() == direct.values_b.size());
        for (std::size_t t = 0; t < r.end_values.size(); ++t)
            CHECK(r.end_values[t] == doctest::Approx(direct.values_b[t]).epsilon(1e-9));
        CHECK(r.cumulative_drift == doctest::Approx(r.end.mean - r.start.mean).epsilon(1e-9));
        for (const auto& s : r.steps) CHECK(s.match_order == 3);
    }
    SUBCASE("identical ensembles never move") {
        auto same = c;
        same.ensemble_b = same.ensemble_a;
        const auto r = lindeberg_swap_path(same, order);
        for (const auto& s : r.steps) CHECK(s.delta.mean == 0.0);
        CHECK(r.end_values == r.start_values);
    }
    SUBCASE("size guard") {
        auto big = small_experiment(EnsembleSpec::gue(201, Normalization::fine), bernoulli(201), 1, 1);
        CHECK_THROWS_AS(lindeberg_swap_path(big, {{0, 1}}), DomainError);
        CHECK_NOTHROW(lindeberg_swap_path(big, {{0, 1}}, 201));
    }
}

TEST_CASE("projection concentration") {
    const auto sign = AtomDistribution::discrete({{-1.0, 0.5}, {1.0, 0.5}});
    const std::vector<double> ts{0.5, 1.0, 2.0, 5.0};
    const auto full = projection_concentration_test(50, 50, sign, 20, ts, 3);
    for (double e : full.exceedance) CHECK(e == 0.0);  // |X|^2 = 50 exactly for signs
    CHECK(full.squared_norm.mean == doctest::Approx(50.0).epsilon(1e-12));
    const auto part = projection_concentration_test(200, 20, sign, 400, ts, 4);
    CHECK(std::abs(part.squared_norm.mean - 20.0) < 4 * part.squared_norm.stderr_);
    CHECK(part.atom_bound == 1.0);
    CHECK(part.envelope[3] == doctest::Approx(10.0 * std::exp(-2.5)));
    CHECK(part.exceedance[3] == 0.0);
    CHECK(std::is_sorted(part.exceedance.rbegin(), part.exceedance.rend()));
    const auto twice = projection_concentration_test(200, 20, sign, 400, ts, 4, 3);
    CHECK(twice.exceedance == part.exceedance);
}

TEST_CASE("random walk tails") {
    const auto rows = random_orthonormal_rows(3, 60, 5);
    CHECK((rows * rows.transpose() - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-12);
    const auto r = random_walk_tail_test(rows, AtomDistribution::gaussian(), 4000, {1.0, 2.0}, 6);
    CHECK(std::abs(r.second_moment.mean - 1.0) < 4 * r.second_moment.stderr_);
    CHECK(r.gaussian_tail[0] == doctest::Approx(0.31731050786291415));
    // pooled over 3 rows of 4000 trials
    const double se0 = std::sqrt(0.3173 * 0.6827 / 4000.0);
    CHECK(std::abs(r.upper_tail[0] - r.gaussian_tail[0]) < 4 * se0);
    CHECK(std::abs(r.upper_tail[1] - 0.04550026389635843) < 4 * std::sqrt(0.0455 / 4000.0));
    Eigen::MatrixXd skew = rows;
    skew(0, 0) += 1e-6;
    CHECK_THROWS_AS(random_walk_tail_test(skew, AtomDistribution::gaussian(), 10, {1.0}, 6), DomainError);
}

TEST_CASE("ESD concentration and lower tail drivers") {
    const auto spec = EnsembleSpec::gue(100, Normalization::fine);
    const auto esd = esd_concentration_test(spec, {{-2.5, 2.5}, {-0.5, 0.5}}, 10, 7);
    REQUIRE(esd.size() == 2);
    CHECK(esd[0].expected_fraction == doctest::Approx(1.0));
    for (double d : esd[0].deviation) CHECK(d <= 0.01);
    CHECK(esd[1].expected_fraction == doctest::Approx(0.3149623575257074).epsilon(1e-12));
    for (std::size_t t = 0; t < 10; ++t) CHECK(esd[1].ratio[t] == doctest::Approx(esd[1].deviation[t]));

    const auto lt = lower_tail_gap_test(spec, 50, {0.0, 0.25, 0.5, 1.0}, 60, 8);
    CHECK(lt.trials == 60);
    CHECK(std::is_sorted(lt.probability.rbegin(), lt.probability.rend()));
    // fine-scale bulk spacing is about pi, so a gap below 1 is already uncommon
    CHECK(lt.probability[0] > 0.0);
    CHECK(lt.probability[0] < 0.15);
    const auto lt3 = lower_tail_gap_test(spec, 50, {0.0, 0.25, 0.5, 1.0}, 60, 8, 3);
    CHECK(lt3.probability == lt.probability);
}

TEST_CASE("four moment scaling report") {
    auto c = small_experiment(EnsembleSpec::gue(40, Normalization::fine), bernoulli(40), 30, 31);
    const auto r = four_moment_scaling(c, {20, 40, 80});
    REQUIRE(r.points.size() == 3);
    CHECK(r.points[1].n == 40);
    // the 40 point is the plain comparison
    const auto direct = four_moment_compare(c);
    CHECK(r.points[1].delta == direct.delta);
    CHECK(r.fitted);
    double sx = 0, sy = 0;
    for (const auto& p : r.points) {
        sx += std::log(static_cast<double>(p.n));
        sy += std::log(std::abs(p.delta));
    }
    CHECK(sy / 3 == doctest::Approx(r.intercept + r.slope * sx / 3));

    auto same = c;
    same.ensemble_b = same.ensemble_a;
    const auto flat = four_moment_scaling(same, {20, 40});
    CHECK_FALSE(flat.fitted);
    CHECK_THROWS_AS(four_moment_scaling(c, {}), DomainError);
}

#include "rmtlab/errors.hpp"
#include "rmtlab/perturbation.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace rmtlab;

namespace {

HermitianMatrix real_matrix(std::initializer_list<std::initializer_list<double>> rows) {
    const auto n = static_cast<Eigen::Index>(rows.size());
    HermitianMatrix m(n, n);
    Eigen::Index i = 0;
    for (const auto& r : rows) {
        Eigen::Index j = 0;
        for (double v : r) m(i, j++) = v;
        ++i;
    }
    return m;
}

double max_abs(const HermitianMatrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("first variation") {
    const auto a = real_matrix({{0, 0}, {0, 1}});
    const auto s = EigenState::compute(a, 0);
    CHECK(first_variation(s, real_matrix({{1, 0}, {0, 0}})) == doctest::Approx(1.0));
    CHECK(std::abs(first_variation(s, real_matrix({{0, 0}, {0, 1}}))) < 1e-15);
    CHECK_THROWS_AS(EigenState::compute(real_matrix({{1, 0}, {0, 1}}), 0), SingularityError);

    testgen::Gen g(701);
    for (int k = 0; k < 10; ++k) {
        const auto base = g.hermitian(10);
        const auto dir = g.hermitian(10);
        const std::size_t i = g.index(0, 9);
        const auto st = EigenState::compute(base, i);
        const double exact = first_variation(st, dir);
        const double fd = fd_lambda(PerturbationPath::linear(base, dir), i, {1, 0}, 1e-5);
        CHECK(std::abs(exact - fd) <= 1e-7 * std::max(1.0, std::abs(exact)));
    }
}

TEST_CASE("projector variation") {
    const auto diag = real_matrix({{0, 0, 0}, {0, 1, 0}, {0, 0, 3}});
    const auto s = EigenState::compute(diag, 1);
    CHECK(max_abs(first_variation_projector(s, real_matrix({{2, 0, 0}, {0, -1, 0}, {0, 0, 5}}))) < 1e-15);

    testgen::Gen g(702);
    for (int k = 0; k < 10; ++k) {
        const auto base = g.hermitian(8);
        const auto dir = g.hermitian(8);
        const std::size_t i = g.index(0, 7);
        const auto st = EigenState::compute(base, i);
        const auto dp = first_variation_projector(st, dir);
        CHECK(hermitian_defect(dp) < 1e-12);
        CHECK(std::abs(dp.trace()) < 1e-12);
        const auto fd = fd_projector(PerturbationPath::linear(base, dir), i, 1e-4);
        CHECK(max_abs(dp - fd) < 1e-6);
    }
}

TEST_CASE("second variation") {
    // A(t) = [[0, t], [t, 1]]
    const auto base = real_matrix({{0, 0}, {0, 1}});
    const auto dir = real_matrix({{0, 1}, {1, 0}});
    const auto lower = second_variation(EigenState::compute(base, 0), dir);
    const auto upper = second_variation(EigenState::compute(base, 1), dir);
    CHECK(lower.eigenvector_sum == doctest::Approx(-2.0));
    CHECK(upper.eigenvector_sum == doctest::Approx(2.0));
    CHECK(lower.resolvent_form == doctest::Approx(-2.0));

    testgen::Gen g(703);
    for (int k = 0; k < 10; ++k) {
        const auto a = g.hermitian(10);
        const auto d = g.hermitian(10);
        double total = 0.0;
        for (std::size_t i = 0; i < 10; ++i) {
            const auto st = EigenState::compute(a, i);
            const auto sv = second_variation(st, d);
            CHECK(std::abs(sv.eigenvector_sum - sv.resolvent_form) <= 1e-9 * std::max(1.0, std::abs(sv.eigenvector_sum)));
            if (i == 0) CHECK(sv.eigenvector_sum <= 0.0);
            if (i == 3 || i == 7) {
                const double fd = fd_lambda(PerturbationPath::linear(a, d), i, {2, 0}, 1e-3);
                CHECK(std::abs(sv.eigenvector_sum - fd) <= 1e-5 * std::max(1.0, std::abs(fd)));
            }
            total += sv.eigenvector_sum;
        }
        CHECK(std::abs(total) < 1e-9);
    }
}

TEST_CASE("higher variations") {
    const auto base = real_matrix({{0, 0}, {0, 1}});
    const auto dir = real_matrix({{0, 1}, {1, 0}});
    const auto st = EigenState::compute(base, 0);
    const auto hv = higher_variation(st, PerturbationPath::linear(base, dir), 4);
    CHECK(hv.lambda_re(1) == doctest::Approx(0.0));
    CHECK(hv.lambda_re(2) == doctest::Approx(-2.0));
    CHECK(std::abs(hv.lambda_re(3)) < 1e-14);
    // lambda_-(t) = (1 - sqrt(1 + 4 t^2)) / 2 = -t^2 + t^4 - ...
    CHECK(hv.lambda_re(4) == doctest::Approx(24.0));
    CHECK_THROWS_AS(higher_variation(st, PerturbationPath::linear(base, dir), 6), DomainError);

    testgen::Gen g(704);
    SUBCASE("order one is the first variation") {
        const auto a = g.hermitian(8);
        const auto b1 = g.hermitian(8), b2 = g.hermitian(8);
        const auto s = EigenState::compute(a, 5);
        const auto h = higher_variation(s, PerturbationPath::linear(a, b1, b2), 1);
        CHECK(h.lambda.at({1, 0}) == doctest::Approx(first_variation(s, b1)).epsilon(1e-14));
        CHECK(h.lambda.at({0, 1}) == doctest::Approx(first_variation(s, b2)).epsilon(1e-14));
        CHECK(max_abs(h.p.at({1, 0}) - first_variation_projector(s, b1)) < 1e-14);
    }
    SUBCASE("orders three and four against finite differences") {
        for (int k = 0; k < 4; ++k) {
            const auto a = g.hermitian(8);
            const auto b1 = g.hermitian(8), b2 = g.hermitian(8);
            const std::size_t i = g.index(0, 7);
            const PerturbationPath path = PerturbationPath::linear(a, b1, b2);
            const auto h = higher_variation(EigenState::compute(a, i), path, 4);
            for (MultiIndex alpha : {MultiIndex{3, 0}, MultiIndex{2, 1}, MultiIndex{4, 0}, MultiIndex{2, 2}}) {
                const double exact = h.lambda.at(alpha);
                const double fd = fd_lambda(path, i, alpha, 1e-3);
                CHECK(std::abs(exact - fd) <= 1e-3 * std::max(1.0, std::abs(exact)));
            }
        }
    }
    SUBCASE("trace identities and projector structure") {
        for (int k = 0; k < 5; ++k) {
            const std::size_t n = g.index(3, 9);
            const auto a = g.hermitian(n);
            const auto b1 = g.hermitian(n), b2 = g.hermitian(n);
            const PerturbationPath path = PerturbationPath::linear(a, b1, b2);
            std::map<MultiIndex, double> sums;
            for (std::size_t i = 0; i < n; ++i) {
                const auto h = higher_variation(EigenState::compute(a, i), path, 5);
                for (const auto& [alpha, v] : h.lambda) sums[alpha] += v;
                for (const auto& [alpha, dp] : h.p) {
                    if (alpha == MultiIndex{0, 0}) continue;
                    CHECK(hermitian_defect(dp) < 1e-8 * std::max(1.0, max_abs(dp)));
                    CHECK(std::abs(dp.trace()) < 1e-8 * std::max(1.0, max_abs(dp)));
                }
            }
            CHECK(sums.at({1, 0}) == doctest::Approx(b1.trace().real()).epsilon(1e-10));
            CHECK(sums.at({0, 1}) == doctest::Approx(b2.trace().real()).epsilon(1e-10));
            for (const auto& [alpha, v] : sums)
                if (alpha.first + alpha.second >= 2) CHECK(std::abs(v) < 1e-8 * std::pow(10.0, alpha.first + alpha.second));
        }
    }
    SUBCASE("R P stays zero to every order") {
        const auto a = g.hermitian(7);
        const auto b1 = g.hermitian(7), b2 = g.hermitian(7);
        const auto s = EigenState::compute(a, 2);
        const auto h = higher_variation(s, PerturbationPath::linear(a, b1, b2), 4);
        // Leibniz expansion of d^alpha (R P)
        for (const auto& [alpha, r] : h.r) {
            if (alpha == MultiIndex{0, 0}) continue;
            HermitianMatrix acc = HermitianMatrix::Zero(7, 7);
            for (int a1 = 0; a1 <= alpha.first; ++a1)
                for (int a2 = 0; a2 <= alpha.second; ++a2) {
                    const MultiIndex left{a1, a2}, right{alpha.first - a1, alpha.second - a2};
                    const HermitianMatrix& rl = left == MultiIndex{0, 0} ? s.r : h.r.at(left);
                    const HermitianMatrix& pr = right == MultiIndex{0, 0} ? s.p : h.p.at(right);
                    acc += std::tgamma(alpha.first + 1) / (std::tgamma(a1 + 1) * std::tgamma(alpha.first - a1 + 1)) *
                           std::tgamma(alpha.second + 1) / (std::tgamma(a2 + 1) * std::tgamma(alpha.second - a2 + 1)) * rl * pr;
                }
            CHECK(max_abs(acc) < 1e-8 * std::max(1.0, max_abs(r)));
        }
    }
}

TEST_CASE("bound diagnostics") {
    testgen::Gen g(705);
    const auto a = g.hermitian(6);
    const auto b = g.hermitian(6);
    const auto s = EigenState::compute(a, 2);
    const auto d = bound_diagnostics(s, PerturbationPath::linear(a, b));
    CHECK(d.V == doctest::Approx(operator_norm(b)).epsilon(1e-12));
    CHECK(d.r == doctest::Approx(s.simple_gap));
    CHECK(d.r_alpha.size() == 5);
    CHECK(d.c_alpha == std::vector<double>(5, 1.0));
    double L = 0.0;
    for (double r : d.r_alpha) L += 1.0 / r;
    CHECK(d.L == doctest::Approx(L));
    CHECK(d.v <= d.V + 1e-12);
}

TEST_CASE("interlacing, eigenvector coordinate and Schur identities") {
    const auto flip = real_matrix({{0, 1}, {1, 0}});
    for (std::size_t i : {0u, 1u}) {
        const auto r = interlacing_identity_residual(flip, i);
        CHECK_FALSE(r.skipped);
        CHECK(r.residual < 1e-15);
        CHECK(eigenvector_coordinate_residual(flip, i).residual < 1e-15);
    }
    const auto decoupled = real_matrix({{1, 0}, {0, 2}});
    const auto ec = eigenvector_coordinate_residual(decoupled, 0);
    CHECK((ec.skipped || ec.residual < 1e-15));
    CHECK(interlacing_identity_residual(decoupled, 0).skipped);

    const HermitianMatrix one = real_matrix({{2.5}});
    CHECK(schur_stieltjes_residual(one, {0.3, 0.7}).residual < 1e-16);
    CHECK(schur_stieltjes_residual(real_matrix({{1, 0, 0}, {0, -2, 0}, {0, 0, 4}}), {0.3, 0.7}).residual < 1e-15);
    CHECK(schur_stieltjes_residual(one, {2.5, 0.0}).skipped);

    testgen::Gen g(706);
    for (int k = 0; k < 10; ++k) {
        const auto a = g.hermitian(12);
        const double norm = operator_norm(a);
        const std::size_t i = g.index(0, 11);
        const auto il = interlacing_identity_residual(a, i);
        CHECK_FALSE(il.skipped);
        CHECK(il.residual <= 1e-8 * norm);
        const auto co = eigenvector_coordinate_residual(a, i);
        CHECK_FALSE(co.skipped);
        CHECK(co.residual <= 1e-9);
        const auto w = g.hermitian(10);
        CHECK(schur_stieltjes_residual(w, {0.3, 0.7}).residual <= 1e-10);
    }
}

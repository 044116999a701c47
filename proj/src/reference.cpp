#include "rmtlab/reference.hpp"

#include "rmtlab/errors.hpp"
#include "rmtlab/quadrature.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <numbers>

namespace rmtlab {

using std::numbers::pi;

double ReferenceCurve::at(double x) const {
    if (grid.empty()) throw DomainError("ReferenceCurve::at: empty curve");
    if (x <= grid.front()) return values.front();
    if (x >= grid.back()) return values.back();
    const auto it = std::upper_bound(grid.begin(), grid.end(), x);
    const std::size_t k = static_cast<std::size_t>(it - grid.begin());
    const double w = (x - grid[k - 1]) / (grid[k] - grid[k - 1]);
    return (1.0 - w) * values[k - 1] + w * values[k];
}

std::vector<double> uniform_grid(double a, double b, double h) {
    if (!(h > 0.0) || b < a) throw DomainError("uniform_grid: need h > 0 and b >= a");
    const auto count = static_cast<std::size_t>(std::llround((b - a) / h));
    std::vector<double> g(count + 1);
    for (std::size_t k = 0; k <= count; ++k) g[k] = a + static_cast<double>(k) * h;
    return g;
}

double sine_kernel(double x, double y) {
    const double d = pi * (x - y);
    if (std::abs(x - y) < 1e-4) {
        const double d2 = d * d;
        return 1.0 - d2 / 6.0 + d2 * d2 / 120.0;
    }
    return std::sin(d) / d;
}

double fredholm_det_at_order(double s, int m) {
    if (s == 0.0) return 1.0;
    if (m < 4) throw DomainError("fredholm_det: order must be at least 4");
    const auto rule = gauss_legendre(m, 0.0, s);
    Eigen::MatrixXd a(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            a(i, j) = (i == j ? 1.0 : 0.0) - sine_kernel(rule.nodes[i], rule.nodes[j]) * rule.weights[j];
    return a.partialPivLu().determinant();
}

FredholmValue fredholm_det(double s, int m) {
    const double coarse = fredholm_det_at_order(s, m);
    const double fine = fredholm_det_at_order(s, 2 * m);
    return {fine, std::abs(fine - coarse), 2 * m};
}

FredholmValue fredholm_det_converged(double s, double tol) {
    int m = 40;
    FredholmValue v = fredholm_det(s, m);
    while (v.error > tol && m < 640) {
        m *= 2;
        v = fredholm_det(s, m);
    }
    return v;
}

double gap_probability(double s) { return fredholm_det_at_order(s, 40); }

namespace {

double second_difference(double s, double h, int m) {
    return (fredholm_det_at_order(s + h, m) - 2.0 * fredholm_det_at_order(s, m) +
            fredholm_det_at_order(s - h, m)) /
           (h * h);
}

double first_difference(double s, double h, int m) {
    return (fredholm_det_at_order(s + h, m) - fredholm_det_at_order(s - h, m)) / (2.0 * h);
}

}  // namespace

double gaudin_density_at(double s, double h, int m) {
    double p = (4.0 * second_difference(s, 0.5 * h, m) - second_difference(s, h, m)) / 3.0;
    if (p < -1e-8)
        throw Error("gaudin_density: negative density " + std::to_string(p) + " at s = " +
                    std::to_string(s));
    return std::max(p, 0.0);
}

double gaudin_cdf_at(double s, double h, int m) {
    if (s <= 0.0) return 0.0;
    const double d = (4.0 * first_difference(s, 0.5 * h, m) - first_difference(s, h, m)) / 3.0;
    return std::clamp(1.0 + d, 0.0, 1.0);
}

ReferenceCurve gaudin_density(const std::vector<double>& s_grid, double h, int m) {
    ReferenceCurve c{"gaudin_density", s_grid, {}, {{"quadrature_order", m}, {"diff_step", h}}};
    c.values.reserve(s_grid.size());
    for (double s : s_grid) c.values.push_back(gaudin_density_at(s, h, m));
    return c;
}

ReferenceCurve gaudin_cdf(const std::vector<double>& s_grid, double h, int m) {
    ReferenceCurve c{"gaudin_cdf", s_grid, {}, {{"quadrature_order", m}, {"diff_step", h}}};
    c.values.reserve(s_grid.size());
    double running = 0.0;
    for (double s : s_grid) {
        running = std::max(running, gaudin_cdf_at(s, h, m));
        c.values.push_back(running);
    }
    return c;
}

std::vector<double> hermite_functions(int n, double u) {
    if (n < 1) throw DomainError("hermite_functions: n must be positive");
    std::vector<double> out(static_cast<std::size_t>(n));
    // phi_j = p_j * exp(e); p_j stays O(1) up to periodic rescaling.
    double e = -0.5 * u * u;
    double prev = 0.0;
    double cur = std::pow(pi, -0.25);
    auto value = [&e](double p) {
        if (p == 0.0) return 0.0;
        return std::copysign(std::exp(std::log(std::abs(p)) + e), p);
    };
    out[0] = value(cur);
    for (int j = 0; j + 1 < n; ++j) {
        const double next =
            std::sqrt(2.0 / (j + 1.0)) * u * cur - std::sqrt(j / (j + 1.0)) * prev;
        prev = cur;
        cur = next;
        if (std::abs(cur) > 1e150) {
            cur *= 1e-150;
            prev *= 1e-150;
            e += 150.0 * std::log(10.0);
        }
        out[static_cast<std::size_t>(j + 1)] = value(cur);
    }
    return out;
}

double gue_kernel(int n, double x, double y) {
    if (n < 1) throw DomainError("gue_kernel: n must be positive");
    if (n > 10000) throw DomainError("gue_kernel: n > 10^4 is not supported");
    const double c = std::sqrt(2.0 * n);
    const auto a = hermite_functions(n, x / c);
    if (x == y) {
        double sum = 0.0;
        for (double v : a) sum += v * v;
        return sum / c;
    }
    const auto b = hermite_functions(n, y / c);
    double sum = 0.0;
    for (int j = 0; j < n; ++j) sum += a[j] * b[j];
    return sum / c;
}

double correlation_reference(const std::vector<double>& t) {
    const auto k = static_cast<int>(t.size());
    if (k > 6) throw DomainError("correlation_reference: at most 6 points");
    if (k == 0) return 1.0;
    Eigen::MatrixXd a(k, k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) a(i, j) = sine_kernel(t[i], t[j]);
    return a.determinant();
}

double gue_correlation(int n, const std::vector<double>& x) {
    const auto k = static_cast<int>(x.size());
    if (k == 0) return 1.0;
    Eigen::MatrixXd a(k, k);
    for (int i = 0; i < k; ++i)
        for (int j = i; j < k; ++j) a(i, j) = a(j, i) = gue_kernel(n, x[i], x[j]);
    return a.determinant();
}

namespace {

using LsvState = std::array<double, 3>;  // f, f', int f/x

struct LsvSystem {
    bool* branch_failure;
    void operator()(const LsvState& y, LsvState& dy, double t) const {
        const double f = y[0], fp = y[1];
        const double a = t * fp - f;
        const double disc = -4.0 * a * (a + fp * fp);
        const double scale = 4.0 * std::abs(a) * (std::abs(a) + fp * fp) + 1e-300;
        if (disc < -1e-9 * scale) *branch_failure = true;
        dy[0] = fp;
        dy[1] = -std::sqrt(std::max(disc, 0.0)) / t;
        dy[2] = f / t;
    }
};

LsvState lsv_seed(double t) {
    const double p = pi, p2 = pi * pi, p3 = p2 * pi;
    return {-t / p - t * t / p2 - t * t * t / p3, -1.0 / p - 2.0 * t / p2 - 3.0 * t * t / p3,
            -t / p - t * t / (2.0 * p2) - t * t * t / (3.0 * p3)};
}

}  // namespace

LsvSolution solve_lsv_ode(const std::vector<double>& t_grid, double t0, double tol) {
    namespace ode = boost::numeric::odeint;
    if (!std::is_sorted(t_grid.begin(), t_grid.end()))
        throw DomainError("solve_lsv_ode: grid must be ascending");
    if (!t_grid.empty() && (t_grid.front() < 0.0 || t_grid.back() > 4.0 + 1e-12))
        throw DomainError("solve_lsv_ode: grid must lie in [0, 4]");

    LsvSolution out;
    bool failure = false;
    LsvSystem system{&failure};
    auto stepper = ode::make_controlled(tol, tol, ode::runge_kutta_cash_karp54<LsvState>());
    LsvState y = lsv_seed(t0);
    double t = t0;
    double dt = 1e-4;

    for (double target : t_grid) {
        if (target <= t0) {
            const auto s = lsv_seed(target);
            out.t.push_back(target);
            out.f.push_back(s[0]);
            out.df.push_back(s[1]);
            out.log_gap.push_back(target == 0.0 ? 0.0 : s[2]);
            continue;
        }
        while (t < target) {
            double step = std::min(dt, target - t);
            const LsvState saved = y;
            const double saved_t = t;
            failure = false;
            const auto result = stepper.try_step(system, y, t, step);
            if (failure) {
                y = saved;
                t = saved_t;
                dt = 0.5 * std::min(dt, step);
                ++out.rejected_steps;
                if (dt < 1e-13)
                    throw SingularityError("solve_lsv_ode: lost the root branch near t = " +
                                           std::to_string(t));
                continue;
            }
            if (result == ode::success) {
                ++out.accepted_steps;
                // try_step proposes the next step size in `step`.
                dt = step;
            } else {
                ++out.rejected_steps;
                dt = step;
            }
        }
        out.t.push_back(target);
        out.f.push_back(y[0]);
        out.df.push_back(y[1]);
        out.log_gap.push_back(y[2]);
    }
    return out;
}

ReferenceCurve lsv_gap_probability(const std::vector<double>& t_grid) {
    const auto sol = solve_lsv_ode(t_grid);
    ReferenceCurve c{"lsv_gap_probability", t_grid, {}, {{"seed_t0", 1e-3}, {"ode_tol", 1e-12}}};
    for (double g : sol.log_gap) c.values.push_back(std::exp(g));
    return c;
}

ReferenceCurve lsv_cdf(const std::vector<double>& t_grid) {
    auto c = lsv_gap_probability(t_grid);
    c.name = "lsv_cdf";
    for (double& v : c.values) v = 1.0 - v;
    return c;
}

}  // namespace rmtlab

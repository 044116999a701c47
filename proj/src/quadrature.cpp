#include "rmtlab/quadrature.hpp"

#include "rmtlab/errors.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/sinh_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <numbers>

namespace rmtlab {

double QuadratureRule::integrate(const std::function<double(double)>& f) const {
    double sum = 0.0;
    for (std::size_t k = 0; k < nodes.size(); ++k) sum += weights[k] * f(nodes[k]);
    return sum;
}

QuadratureRule gauss_legendre(int m, double a, double b) {
    if (m < 1) throw DomainError("gauss_legendre: order must be positive");
    QuadratureRule rule;
    rule.order = m;
    rule.nodes.resize(m);
    rule.weights.resize(m);
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    for (int k = 0; k < (m + 1) / 2; ++k) {
        double x = std::cos(std::numbers::pi * (k + 0.75) / (m + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int j = 2; j <= m; ++j) {
                const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            if (m == 1) p0 = 1.0;
            dp = m * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        // Recompute the derivative at the converged node.
        double p0 = 1.0, p1 = x;
        for (int j = 2; j <= m; ++j) {
            const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
            p0 = p1;
            p1 = p2;
        }
        if (m == 1) p0 = 1.0;
        dp = m * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        // Nodes ascending: index k holds the most negative root.
        rule.nodes[k] = mid - half * x;
        rule.nodes[m - 1 - k] = mid + half * x;
        rule.weights[k] = half * w;
        rule.weights[m - 1 - k] = half * w;
    }
    return rule;
}

double integrate_smooth(const std::function<double(double)>& f, double a, double b,
                        double tol) {
    if (a == b) return 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, 20, tol);
}

double integrate_singular(const std::function<double(double)>& f, double a, double b,
                          double tol) {
    if (a == b) return 0.0;
    boost::math::quadrature::tanh_sinh<double> integrator;
    return integrator.integrate(f, a, b, tol);
}

double integrate_real_line(const std::function<double(double)>& f, double tol) {
    boost::math::quadrature::sinh_sinh<double> integrator;
    return integrator.integrate(f, tol);
}

double simpson(const std::vector<double>& values, double h) {
    const std::size_t n = values.size();
    if (n < 2) return 0.0;
    const std::size_t panels = (n - 1) % 2 == 0 ? n - 1 : n - 2;
    double sum = 0.0;
    for (std::size_t k = 0; k + 2 <= panels; k += 2)
        sum += values[k] + 4.0 * values[k + 1] + values[k + 2];
    sum *= h / 3.0;
    if (panels != n - 1) sum += 0.5 * h * (values[n - 2] + values[n - 1]);
    return sum;
}

std::vector<double> cumulative_trapezoid(const std::vector<double>& grid,
                                         const std::vector<double>& values) {
    std::vector<double> out(grid.size(), 0.0);
    for (std::size_t k = 1; k < grid.size(); ++k)
        out[k] = out[k - 1] + 0.5 * (grid[k] - grid[k - 1]) * (values[k] + values[k - 1]);
    return out;
}

}  // namespace rmtlab

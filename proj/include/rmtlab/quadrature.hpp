#pragma once

#include <functional>
#include <vector>

namespace rmtlab {

/// Gauss-Legendre nodes and weights mapped to an interval.
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
    int order = 0;

    double integrate(const std::function<double(double)>& f) const;
};

/// m-point Gauss-Legendre rule on [a, b]. Nodes by Newton iteration on P_m,
/// exact for polynomials of degree <= 2m - 1.
QuadratureRule gauss_legendre(int m, double a, double b);

/// Adaptive Gauss-Kronrod (15-point) on a finite interval.
double integrate_smooth(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-13);

/// Double-exponential quadrature, tolerant of integrable endpoint
/// singularities (log or inverse square root).
double integrate_singular(const std::function<double(double)>& f, double a, double b,
                          double tol = 1e-13);

/// Integral over the whole real line.
double integrate_real_line(const std::function<double(double)>& f, double tol = 1e-13);

/// Composite Simpson on a uniform grid (odd number of points); falls back to
/// the trapezoid rule for the last panel when the point count is even.
double simpson(const std::vector<double>& values, double h);

/// Running trapezoid integral, same length as `values`, starting at 0.
std::vector<double> cumulative_trapezoid(const std::vector<double>& grid,
                                         const std::vector<double>& values);

}  // namespace rmtlab

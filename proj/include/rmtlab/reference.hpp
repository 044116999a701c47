#pragma once

// Exact and limiting reference laws: the sine kernel and its Fredholm
// determinant, the Gaudin spacing law, finite-n GUE kernels, and the limiting
// law of the least singular value.

#include <map>
#include <string>
#include <vector>

namespace rmtlab {

/// Tabulated curve plus the numerical parameters used to produce it.
struct ReferenceCurve {
    std::string name;
    std::vector<double> grid;
    std::vector<double> values;
    std::map<std::string, double> metadata;

    /// Linear interpolation; clamps to the end values outside the grid.
    double at(double x) const;
};

/// sin(pi (x - y)) / (pi (x - y)), with a series near the diagonal.
double sine_kernel(double x, double y);

struct FredholmValue {
    double value = 0.0;
    /// |det at order m - det at order 2m|.
    double error = 0.0;
    int order = 0;
};

/// det(I - K) for the sine kernel on L^2(0, s) by Nystrom discretization on
/// an m-point Gauss-Legendre rule. `value` is taken from the 2m rule.
/// Negative s gives the analytic continuation (used by finite differences
/// at s = 0).
FredholmValue fredholm_det(double s, int m = 40);

/// Doubles m from 40 until the m / 2m difference is below `tol` (or m = 640).
FredholmValue fredholm_det_converged(double s, double tol = 1e-10);

/// Single Nystrom evaluation at order m, no error estimate.
double fredholm_det_at_order(double s, int m);

/// Gap probability E(s) = det(I - K)_{(0, s)} at the default order.
double gap_probability(double s);

/// Gaudin density p(s) = E''(s): central second differences with step h and
/// one Richardson step. Values below -1e-8 raise; small negatives clip to 0.
ReferenceCurve gaudin_density(const std::vector<double>& s_grid, double h = 1e-3, int m = 40);
double gaudin_density_at(double s, double h = 1e-3, int m = 40);

/// Gaudin CDF, computed as 1 + E'(s) (central first difference, Richardson).
ReferenceCurve gaudin_cdf(const std::vector<double>& s_grid, double h = 1e-3, int m = 40);
double gaudin_cdf_at(double s, double h = 1e-3, int m = 40);

/// Orthonormal Hermite functions phi_0..phi_{n-1} at u, phi_j = h_j(u) e^{-u^2/2}
/// with h_j orthonormal for the weight e^{-u^2}. The gaussian factor is carried
/// as a separate exponent through the recurrence, so no intermediate overflows.
std::vector<double> hermite_functions(int n, double u);

/// Fine-scale GUE kernel K_n(x, y) = (1/sqrt(2n)) sum_{j<n} phi_j(x/sqrt(2n)) phi_j(y/sqrt(2n)).
double gue_kernel(int n, double x, double y);

/// det(K(t_i, t_j)) for the sine kernel, k = t.size() <= 6.
double correlation_reference(const std::vector<double>& t);

/// det(K_n(x_i, x_j)), the k-point correlation of fine-scale GUE.
double gue_correlation(int n, const std::vector<double>& x);

struct LsvSolution {
    std::vector<double> t;
    std::vector<double> f;
    std::vector<double> df;
    /// int_0^t f(x)/x dx
    std::vector<double> log_gap;
    int accepted_steps = 0;
    int rejected_steps = 0;
};

/// Integrates (t f'')^2 + 4 (t f' - f)(t f' - f + f'^2) = 0 from t0 with the
/// seed f = -t/pi - t^2/pi^2 - t^3/pi^3, taking at each step the root for f''
/// continuous with the seed (the negative one). Throws SingularityError if
/// the discriminant turns negative beyond round-off.
LsvSolution solve_lsv_ode(const std::vector<double>& t_grid, double t0 = 1e-3, double tol = 1e-12);

/// exp(int_0^t f/x): the probability that no eigenvalue of A_n lies within
/// t/2 of the origin, i.e. the limit of P(sigma_n > t / (2 sqrt n)).
ReferenceCurve lsv_gap_probability(const std::vector<double>& t_grid);

/// 1 - exp(int_0^t f/x), the limit of P(sigma_n <= t / (2 sqrt n)).
ReferenceCurve lsv_cdf(const std::vector<double>& t_grid);

/// Uniform grid a, a+h, ..., b (inclusive up to round-off).
std::vector<double> uniform_grid(double a, double b, double h);

}  // namespace rmtlab

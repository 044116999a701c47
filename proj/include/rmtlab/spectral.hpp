#pragma once

#include "rmtlab/ensemble.hpp"

#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace rmtlab {

/// Ascending eigenvalues and matching orthonormal eigenvectors (columns).
struct SpectralDecomposition {
    Eigen::VectorXd eigenvalues;
    Eigen::MatrixXcd eigenvectors;  // empty when computed without vectors
    /// max_i |A u_i - lambda_i u_i|, absolute.
    double residual = 0.0;

    std::size_t size() const { return static_cast<std::size_t>(eigenvalues.size()); }
    bool has_vectors() const { return eigenvectors.size() > 0; }
    double spectral_radius() const;
    std::vector<double> values() const;
};

/// Largest |A - A*| entry relative to max(1, max |A_ij|).
double hermitian_defect(const HermitianMatrix& a);

/// Dense Hermitian eigensolver. Real-valued input takes a real symmetric path.
/// Throws DomainError for non-finite or non-Hermitian input (defect > 1e-12).
SpectralDecomposition eigendecompose(const HermitianMatrix& a, bool with_vectors = true);

/// Eigenvalues only, ascending.
std::vector<double> eigenvalues(const HermitianMatrix& a);

/// Semicircle density (1/2pi) sqrt(4 - x^2) on [-2, 2].
double rho_sc(double x);
/// Integral of rho_sc over (-inf, x], in closed form.
double semicircle_cdf(double x);
/// Mass of the semicircle law on [a, b).
double semicircle_mass(double a, double b);
/// t(a) with semicircle_cdf(t(a)) = a, a in [0, 1].
double classical_location(double a);

struct StieltjesSample {
    std::complex<double> z;
    std::complex<double> s_n;
    std::complex<double> s;
};

/// (1/n) sum_i 1 / (lambda_i - z). Throws SingularityError on a pole.
std::complex<double> stieltjes_empirical(const std::vector<double>& eigs, std::complex<double> z);
std::complex<double> stieltjes_empirical(const SpectralDecomposition& d, std::complex<double> z);

/// sqrt(z^2 - 4) as sqrt(z - 2) * sqrt(z + 2), the branch asymptotic to z.
std::complex<double> semicircle_sqrt(std::complex<double> z);

/// (-z + sqrt(z^2 - 4)) / 2. Throws DomainError for z on [-2, 2]; evaluate
/// at x + i*eta with eta > 0 instead.
std::complex<double> stieltjes_semicircle(std::complex<double> z);

StieltjesSample stieltjes_sample(const std::vector<double>& eigs, std::complex<double> z);

/// Number of eigenvalues in [a, b). Eigenvalues must be ascending.
std::size_t count_interval(const std::vector<double>& eigs, double a, double b);

/// Integral of log|y - z| rho_sc(y) dy.
double log_potential(std::complex<double> z);
double log_potential_closed_form(std::complex<double> z);
double log_potential_quadrature(std::complex<double> z, double tol = 1e-14);

/// Operator norm of a Hermitian matrix (max |eigenvalue|).
double operator_norm(const HermitianMatrix& a);

}  // namespace rmtlab

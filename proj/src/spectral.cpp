#include "rmtlab/spectral.hpp"

#include "rmtlab/errors.hpp"
#include "rmtlab/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numbers>

namespace rmtlab {

using std::numbers::pi;

double SpectralDecomposition::spectral_radius() const {
    if (eigenvalues.size() == 0) return 0.0;
    return std::max(std::abs(eigenvalues(0)), std::abs(eigenvalues(eigenvalues.size() - 1)));
}

std::vector<double> SpectralDecomposition::values() const {
    return {eigenvalues.data(), eigenvalues.data() + eigenvalues.size()};
}

double hermitian_defect(const HermitianMatrix& a) {
    if (a.rows() != a.cols()) throw DomainError("matrix is not square");
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    return (a - a.adjoint()).cwiseAbs().maxCoeff() / scale;
}

namespace {

void check_input(const HermitianMatrix& a) {
    if (a.rows() != a.cols()) throw DomainError("eigendecompose: matrix is not square");
    if (!a.allFinite()) throw DomainError("eigendecompose: non-finite entry");
    const double defect = hermitian_defect(a);
    if (defect > 1e-12)
        throw DomainError("eigendecompose: matrix is not Hermitian (relative defect " +
                          std::to_string(defect) + ")");
}

bool is_real(const HermitianMatrix& a) { return (a.imag().array() == 0.0).all(); }

}  // namespace

SpectralDecomposition eigendecompose(const HermitianMatrix& a, bool with_vectors) {
    check_input(a);
    SpectralDecomposition d;
    if (a.rows() == 0) return d;
    const int options = with_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly;
    if (is_real(a)) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a.real(), options);
        if (solver.info() != Eigen::Success) throw Error("eigendecompose: solver failed");
        d.eigenvalues = solver.eigenvalues();
        if (with_vectors) d.eigenvectors = solver.eigenvectors().cast<std::complex<double>>();
    } else {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(a, options);
        if (solver.info() != Eigen::Success) throw Error("eigendecompose: solver failed");
        d.eigenvalues = solver.eigenvalues();
        if (with_vectors) d.eigenvectors = solver.eigenvectors();
    }
    if (with_vectors) {
        const Eigen::MatrixXcd r =
            a * d.eigenvectors - d.eigenvectors * d.eigenvalues.cast<std::complex<double>>().asDiagonal();
        d.residual = r.colwise().norm().maxCoeff();
    }
    return d;
}

std::vector<double> eigenvalues(const HermitianMatrix& a) {
    return eigendecompose(a, false).values();
}

double operator_norm(const HermitianMatrix& a) {
    return eigendecompose(a, false).spectral_radius();
}

double rho_sc(double x) {
    if (std::abs(x) >= 2.0) return 0.0;
    return std::sqrt(4.0 - x * x) / (2.0 * pi);
}

double semicircle_cdf(double x) {
    if (x <= -2.0) return 0.0;
    if (x >= 2.0) return 1.0;
    return 0.5 + x * std::sqrt(4.0 - x * x) / (4.0 * pi) + std::asin(x / 2.0) / pi;
}

double semicircle_mass(double a, double b) {
    if (b <= a) return 0.0;
    return semicircle_cdf(b) - semicircle_cdf(a);
}

double classical_location(double a) {
    if (!(a >= 0.0 && a <= 1.0)) throw DomainError("classical_location: a must lie in [0, 1]");
    if (a == 0.0) return -2.0;
    if (a == 1.0) return 2.0;
    if (a == 0.5) return 0.0;
    double lo = -2.0, hi = 2.0;
    while (hi - lo > 1e-15) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (semicircle_cdf(mid) < a ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

std::complex<double> stieltjes_empirical(const std::vector<double>& eigs, std::complex<double> z) {
    if (eigs.empty()) throw DomainError("stieltjes_empirical: empty spectrum");
    std::complex<double> sum = 0.0;
    for (double l : eigs) {
        const std::complex<double> d = l - z;
        if (std::abs(d) <= 1e-14 * (1.0 + std::abs(z)))
            throw SingularityError("stieltjes_empirical: z lies on the spectrum");
        sum += 1.0 / d;
    }
    return sum / static_cast<double>(eigs.size());
}

std::complex<double> stieltjes_empirical(const SpectralDecomposition& d, std::complex<double> z) {
    return stieltjes_empirical(d.values(), z);
}

std::complex<double> semicircle_sqrt(std::complex<double> z) {
    return std::sqrt(z - 2.0) * std::sqrt(z + 2.0);
}

std::complex<double> stieltjes_semicircle(std::complex<double> z) {
    if (z.imag() == 0.0 && std::abs(z.real()) <= 2.0)
        throw DomainError(
            "stieltjes_semicircle: z lies on the cut [-2, 2]; use z = x + i*eta with eta > 0");
    // (-z + q) / 2 rewritten as -2 / (z + q); |z + q| >= 2, so no cancellation.
    return -2.0 / (z + semicircle_sqrt(z));
}

StieltjesSample stieltjes_sample(const std::vector<double>& eigs, std::complex<double> z) {
    return {z, stieltjes_empirical(eigs, z), stieltjes_semicircle(z)};
}

std::size_t count_interval(const std::vector<double>& eigs, double a, double b) {
    if (!(b > a)) return 0;
    const auto lo = std::lower_bound(eigs.begin(), eigs.end(), a);
    const auto hi = std::lower_bound(eigs.begin(), eigs.end(), b);
    return static_cast<std::size_t>(hi - lo);
}

double log_potential_closed_form(std::complex<double> z) {
    const auto w = semicircle_sqrt(z);
    return 0.5 * ((z - w) / (z + w)).real() + std::log(std::abs((w + z) / 2.0));
}

double log_potential_quadrature(std::complex<double> z, double tol) {
    // y = 2 cos(phi) turns rho_sc(y) dy into (2/pi) sin^2(phi) dphi. The
    // integrand is split where 2 cos(phi) = Re z so that a log singularity on
    // the cut sits at an endpoint.
    auto f = [z](double phi) {
        const double s = std::sin(phi);
        const double y = 2.0 * std::cos(phi);
        const double dist = std::abs(std::complex<double>(y) - z);
        if (dist == 0.0) return 0.0;
        return (2.0 / pi) * s * s * std::log(dist);
    };
    const double x = std::clamp(z.real(), -2.0, 2.0);
    const double split = std::acos(x / 2.0);
    double total = 0.0;
    if (split > 0.0) total += integrate_singular(f, 0.0, split, tol);
    if (split < pi) total += integrate_singular(f, split, pi, tol);
    return total;
}

double log_potential(std::complex<double> z) {
    double dist;
    if (std::abs(z.real()) <= 2.0) {
        dist = std::abs(z.imag());
    } else {
        dist = std::abs(z - std::complex<double>(z.real() > 0 ? 2.0 : -2.0));
    }
    return dist > 0.1 ? log_potential_closed_form(z) : log_potential_quadrature(z);
}

}  // namespace rmtlab

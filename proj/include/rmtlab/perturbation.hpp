#pragma once

// Derivatives of a simple eigenvalue, its spectral projector P_i and its
// reduced resolvent R_i along Hermitian matrix paths, plus numerical checks of
// the interlacing, eigenvector-coordinate and Schur complement identities.

#include "rmtlab/ensemble.hpp"
#include "rmtlab/spectral.hpp"

#include <map>
#include <utility>

namespace rmtlab {

struct EigenState {
    HermitianMatrix a;
    std::size_t index = 0;
    double lambda = 0.0;
    Eigen::VectorXcd u;
    HermitianMatrix p;
    HermitianMatrix r;
    double simple_gap = 0.0;
    SpectralDecomposition decomposition;

    /// Throws SingularityError unless min_{j != i} |lambda_j - lambda_i|
    /// exceeds 1e-10 (1 + |A|_op).
    static EigenState compute(const HermitianMatrix& a, std::size_t i);
};

/// A(z) = base + Re(z) b1 + Im(z) b2.
struct PerturbationPath {
    HermitianMatrix base;
    HermitianMatrix b1;
    HermitianMatrix b2;

    /// A(0) + z e_p e_q^* + conj(z) e_q e_p^*. For p == q this is A(0) + 2 Re(z) e_p e_p^*.
    static PerturbationPath entry(const HermitianMatrix& base, std::size_t p, std::size_t q);
    static PerturbationPath linear(const HermitianMatrix& base, const HermitianMatrix& b1);
    static PerturbationPath linear(const HermitianMatrix& base, const HermitianMatrix& b1,
                                   const HermitianMatrix& b2);

    HermitianMatrix at(double re, double im = 0.0) const;
};

/// d lambda_i along the direction: tr(direction P_i).
double first_variation(const EigenState& s, const HermitianMatrix& direction);

/// d P_i = -R_i D P_i - P_i D R_i.
HermitianMatrix first_variation_projector(const EigenState& s, const HermitianMatrix& direction);

struct SecondVariation {
    /// -2 sum_{j != i} |u_j^* D u_i|^2 / (lambda_j - lambda_i)
    double eigenvector_sum = 0.0;
    /// -2 u_i^* D R_i D u_i
    double resolvent_form = 0.0;
};

SecondVariation second_variation(const EigenState& s, const HermitianMatrix& direction);

/// Multi-index (order in Re z, order in Im z).
using MultiIndex = std::pair<int, int>;

/// All mixed partial derivatives of lambda_i, P_i and R_i in (Re z, Im z) up
/// to total order k, by the Leibniz-type recursion for a linear path.
struct HigherVariation {
    int order = 0;
    std::map<MultiIndex, double> lambda;
    std::map<MultiIndex, HermitianMatrix> p;
    std::map<MultiIndex, HermitianMatrix> r;

    /// Derivative of order k purely in the Re z direction.
    double lambda_re(int k) const { return lambda.at({k, 0}); }
};

/// Requires 1 <= k <= 5. The path must be evaluated at z = 0 for `s`.
HigherVariation higher_variation(const EigenState& s, const PerturbationPath& path, int k);

/// Ingredients of the derivative bounds for one eigenvalue along a path,
/// using the partition into individual eigenvectors with c_alpha = 1.
struct BoundDiagnostics {
    double V = 0.0;  // max(|b1|_op, |b2|_op)
    double r = 0.0;  // min_{j != i} |lambda_j - lambda_i|
    double v = 0.0;  // max_{alpha, beta} |u_alpha^* b u_beta| over both directions
    double L = 0.0;  // sum_{j != i} 1 / r_j
    std::vector<double> r_alpha;
    std::vector<double> c_alpha;
};

BoundDiagnostics bound_diagnostics(const EigenState& s, const PerturbationPath& path);

/// Finite-difference oracles, evaluated with long double eigensolves so that
/// high-order stencils keep a usable noise floor.
/// Mixed partial of lambda_i(A(z)) at z = 0 by tensor-product central
/// differences with step h, followed by `richardson` extrapolation steps
/// (each halves h and removes the next even power).
double fd_lambda(const PerturbationPath& path, std::size_t i, MultiIndex alpha, double h,
                 int richardson = 1);
/// d/d(Re z) of P_i(A(z)) at z = 0 by a central difference with one
/// Richardson step.
HermitianMatrix fd_projector(const PerturbationPath& path, std::size_t i, double h);

struct IdentityResidual {
    double residual = 0.0;
    /// Sum of magnitudes of the terms entering the identity.
    double scale = 0.0;
    bool skipped = false;
    std::string reason;
};

/// sum_j |u_j(A_{n-1})^* X|^2 / (lambda_j(A_{n-1}) - lambda_i(A_n)) - (a_nn - lambda_i(A_n)),
/// with A_{n-1} the top-left minor and X the last column above the corner.
IdentityResidual interlacing_identity_residual(const HermitianMatrix& a, std::size_t i);

/// |x|^2 - 1 / (1 + sum_j |u_j^* X|^2 / (lambda_j(B) - lambda_i(A))^2), where x is the first
/// coordinate of u_i(A), B the bottom-right minor and X the first column below the corner.
IdentityResidual eigenvector_coordinate_residual(const HermitianMatrix& a, std::size_t i);

/// s_n(z) - (1/n) sum_k 1 / (w_kk - z - a_k^* (W_k - z)^{-1} a_k).
IdentityResidual schur_stieltjes_residual(const HermitianMatrix& w, std::complex<double> z);

}  // namespace rmtlab

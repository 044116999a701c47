#include "rmtlab/perturbation.hpp"

#include "rmtlab/errors.hpp"

#include <algorithm>
#include <cmath>

namespace rmtlab {

namespace {

using cd = std::complex<double>;

double binom(int n, int k) {
    double r = 1.0;
    for (int j = 1; j <= k; ++j) r = r * (n - k + j) / j;
    return r;
}

double binom(MultiIndex a, MultiIndex b) { return binom(a.first, b.first) * binom(a.second, b.second); }

double real_trace(const HermitianMatrix& m) { return m.trace().real(); }

}  // namespace

EigenState EigenState::compute(const HermitianMatrix& a, std::size_t i) {
    EigenState s;
    s.a = a;
    s.index = i;
    s.decomposition = eigendecompose(a);
    const auto n = static_cast<Eigen::Index>(s.decomposition.size());
    if (static_cast<Eigen::Index>(i) >= n) throw DomainError("EigenState: index out of range");
    const auto& lam = s.decomposition.eigenvalues;
    const auto& u = s.decomposition.eigenvectors;
    s.lambda = lam(static_cast<Eigen::Index>(i));
    s.u = u.col(static_cast<Eigen::Index>(i));
    s.simple_gap = std::numeric_limits<double>::infinity();
    Eigen::VectorXcd inv = Eigen::VectorXcd::Zero(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        if (j == static_cast<Eigen::Index>(i)) continue;
        const double d = lam(j) - s.lambda;
        s.simple_gap = std::min(s.simple_gap, std::abs(d));
        inv(j) = 1.0 / d;
    }
    if (n > 1 && s.simple_gap <= 1e-10 * (1.0 + s.decomposition.spectral_radius()))
        throw SingularityError("EigenState: eigenvalue " + std::to_string(i) +
                               " is not simple (gap " + std::to_string(s.simple_gap) + ")");
    s.p = s.u * s.u.adjoint();
    s.r = u * inv.asDiagonal() * u.adjoint();
    return s;
}

PerturbationPath PerturbationPath::entry(const HermitianMatrix& base, std::size_t p, std::size_t q) {
    const auto n = base.rows();
    const auto ip = static_cast<Eigen::Index>(p), iq = static_cast<Eigen::Index>(q);
    if (ip >= n || iq >= n) throw DomainError("PerturbationPath::entry: index out of range");
    PerturbationPath path{base, HermitianMatrix::Zero(n, n), HermitianMatrix::Zero(n, n)};
    if (p == q) {
        path.b1(ip, ip) = 2.0;
    } else {
        path.b1(ip, iq) = 1.0;
        path.b1(iq, ip) = 1.0;
        path.b2(ip, iq) = cd(0.0, 1.0);
        path.b2(iq, ip) = cd(0.0, -1.0);
    }
    return path;
}

PerturbationPath PerturbationPath::linear(const HermitianMatrix& base, const HermitianMatrix& b1) {
    return {base, b1, HermitianMatrix::Zero(base.rows(), base.cols())};
}

PerturbationPath PerturbationPath::linear(const HermitianMatrix& base, const HermitianMatrix& b1,
                                          const HermitianMatrix& b2) {
    return {base, b1, b2};
}

HermitianMatrix PerturbationPath::at(double re, double im) const { return base + re * b1 + im * b2; }

double first_variation(const EigenState& s, const HermitianMatrix& direction) {
    return (s.u.adjoint() * direction * s.u)(0, 0).real();
}

HermitianMatrix first_variation_projector(const EigenState& s, const HermitianMatrix& direction) {
    return -s.r * direction * s.p - s.p * direction * s.r;
}

SecondVariation second_variation(const EigenState& s, const HermitianMatrix& direction) {
    const auto& u = s.decomposition.eigenvectors;
    const auto& lam = s.decomposition.eigenvalues;
    const Eigen::VectorXcd coupling = u.adjoint() * (direction * s.u);
    SecondVariation out;
    for (Eigen::Index j = 0; j < lam.size(); ++j) {
        if (j == static_cast<Eigen::Index>(s.index)) continue;
        out.eigenvector_sum -= 2.0 * std::norm(coupling(j)) / (lam(j) - s.lambda);
    }
    out.resolvent_form = -2.0 * (s.u.adjoint() * direction * s.r * direction * s.u)(0, 0).real();
    return out;
}

HigherVariation higher_variation(const EigenState& s, const PerturbationPath& path, int k) {
    if (k < 1 || k > 5) throw DomainError("higher_variation: order must lie in 1..5");
    const auto n = s.a.rows();
    const HermitianMatrix id = HermitianMatrix::Identity(n, n);
    HigherVariation hv;
    hv.order = k;
    hv.lambda[{0, 0}] = s.lambda;
    hv.p[{0, 0}] = s.p;
    hv.r[{0, 0}] = s.r;

    // The path is linear, so only first-order derivatives of A survive.
    auto dA = [&path](MultiIndex b) -> const HermitianMatrix* {
        if (b == MultiIndex{1, 0}) return &path.b1;
        if (b == MultiIndex{0, 1}) return &path.b2;
        return nullptr;
    };
    // (A - lambda)^beta for beta != 0.
    auto shifted = [&](MultiIndex b) -> HermitianMatrix {
        HermitianMatrix m = -hv.lambda.at(b) * id;
        if (const auto* d = dA(b)) m += *d;
        return m;
    };

    for (int m = 1; m <= k; ++m) {
        for (int a1 = m; a1 >= 0; --a1) {
            const MultiIndex alpha{a1, m - a1};
            const auto& P = s.p;
            const auto& R = s.r;

            double lam = 0.0;
            for (int b1 = 0; b1 <= alpha.first; ++b1) {
                for (int b2 = 0; b2 <= alpha.second; ++b2) {
                    const MultiIndex beta{b1, b2};
                    if (beta == MultiIndex{0, 0}) continue;
                    const MultiIndex rest{alpha.first - b1, alpha.second - b2};
                    const double c = binom(alpha, beta);
                    if (const auto* d = dA(beta)) lam += c * real_trace(*d * hv.p.at(rest) * P);
                    if (beta != alpha) lam -= c * hv.lambda.at(beta) * real_trace(hv.p.at(rest) * P);
                }
            }
            hv.lambda[alpha] = lam;

            HermitianMatrix x = HermitianMatrix::Zero(n, n);
            HermitianMatrix sigma = HermitianMatrix::Zero(n, n);
            if (const auto* d = dA(alpha)) x -= R * *d * P;
            for (int b1 = 0; b1 <= alpha.first; ++b1) {
                for (int b2 = 0; b2 <= alpha.second; ++b2) {
                    const MultiIndex beta{b1, b2};
                    if (beta == MultiIndex{0, 0} || beta == alpha) continue;
                    const MultiIndex rest{alpha.first - b1, alpha.second - b2};
                    const double c = binom(alpha, beta);
                    x -= c * R * shifted(beta) * hv.p.at(rest) * P;
                    sigma += c * hv.p.at(beta) * hv.p.at(rest);
                }
            }
            // Off-diagonal blocks x + x^*, diagonal blocks from P^2 = P.
            hv.p[alpha] = x + x.adjoint() + sigma - P * sigma - sigma * P;

            HermitianMatrix rd = -hv.p.at(alpha) * R;
            for (int b1 = 0; b1 <= alpha.first; ++b1) {
                for (int b2 = 0; b2 <= alpha.second; ++b2) {
                    const MultiIndex beta{b1, b2};
                    if (beta == alpha) continue;
                    const MultiIndex rest{alpha.first - b1, alpha.second - b2};
                    const double c = binom(alpha, beta);
                    rd -= c * hv.r.at(beta) * shifted(rest) * R;
                    rd -= c * hv.r.at(beta) * hv.p.at(rest);
                }
            }
            hv.r[alpha] = rd;
        }
    }
    return hv;
}

BoundDiagnostics bound_diagnostics(const EigenState& s, const PerturbationPath& path) {
    BoundDiagnostics d;
    d.V = std::max(operator_norm(path.b1), operator_norm(path.b2));
    d.r = s.simple_gap;
    const auto& u = s.decomposition.eigenvectors;
    const auto& lam = s.decomposition.eigenvalues;
    const Eigen::MatrixXcd c1 = u.adjoint() * path.b1 * u;
    const Eigen::MatrixXcd c2 = u.adjoint() * path.b2 * u;
    d.v = std::max(c1.cwiseAbs().maxCoeff(), c2.cwiseAbs().maxCoeff());
    for (Eigen::Index j = 0; j < lam.size(); ++j) {
        if (j == static_cast<Eigen::Index>(s.index)) continue;
        const double rj = std::abs(lam(j) - s.lambda);
        d.r_alpha.push_back(rj);
        d.c_alpha.push_back(1.0);
        d.L += 1.0 / rj;
    }
    return d;
}

IdentityResidual interlacing_identity_residual(const HermitianMatrix& a, std::size_t i) {
    const auto n = a.rows();
    if (static_cast<Eigen::Index>(i) >= n) throw DomainError("interlacing_identity_residual: index out of range");
    IdentityResidual out;
    const double lambda = eigendecompose(a, false).eigenvalues(static_cast<Eigen::Index>(i));
    const cd corner = a(n - 1, n - 1);
    double sum = 0.0;
    out.scale = std::abs(corner.real() - lambda);
    if (n > 1) {
        const auto minor = eigendecompose(a.topLeftCorner(n - 1, n - 1));
        const Eigen::VectorXcd proj = minor.eigenvectors.adjoint() * a.col(n - 1).head(n - 1);
        for (Eigen::Index j = 0; j < n - 1; ++j) {
            const double denom = minor.eigenvalues(j) - lambda;
            if (std::abs(proj(j)) <= 1e-12) {
                out.skipped = true;
                out.reason = "last column is orthogonal to a minor eigenvector";
                return out;
            }
            if (std::abs(denom) <= 1e-12) {
                out.skipped = true;
                out.reason = "eigenvalue coincides with a minor eigenvalue";
                return out;
            }
            const double term = std::norm(proj(j)) / denom;
            sum += term;
            out.scale += std::abs(term);
        }
    }
    out.residual = std::abs(sum - (corner.real() - lambda));
    return out;
}

IdentityResidual eigenvector_coordinate_residual(const HermitianMatrix& a, std::size_t i) {
    const auto n = a.rows();
    if (static_cast<Eigen::Index>(i) >= n) throw DomainError("eigenvector_coordinate_residual: index out of range");
    IdentityResidual out;
    const auto full = eigendecompose(a);
    const double lambda = full.eigenvalues(static_cast<Eigen::Index>(i));
    const double x2 = std::norm(full.eigenvectors(0, static_cast<Eigen::Index>(i)));
    double sum = 0.0;
    if (n > 1) {
        const auto minor = eigendecompose(a.bottomRightCorner(n - 1, n - 1));
        const Eigen::VectorXcd proj = minor.eigenvectors.adjoint() * a.col(0).tail(n - 1);
        for (Eigen::Index j = 0; j < n - 1; ++j) {
            const double denom = minor.eigenvalues(j) - lambda;
            if (std::abs(denom) <= 1e-12) {
                out.skipped = true;
                out.reason = "eigenvalue coincides with a minor eigenvalue";
                return out;
            }
            sum += std::norm(proj(j)) / (denom * denom);
        }
    }
    const double predicted = 1.0 / (1.0 + sum);
    out.scale = x2 + predicted;
    out.residual = std::abs(x2 - predicted);
    return out;
}

IdentityResidual schur_stieltjes_residual(const HermitianMatrix& w, std::complex<double> z) {
    const auto n = w.rows();
    if (n < 1) throw DomainError("schur_stieltjes_residual: empty matrix");
    IdentityResidual out;
    const auto eig = eigendecompose(w, false).values();
    for (double l : eig) {
        if (std::abs(l - z) <= 1e-10) {
            out.skipped = true;
            out.reason = "z is within 1e-10 of the spectrum";
            return out;
        }
    }
    const cd lhs = stieltjes_empirical(eig, z);
    cd rhs = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) {
        cd denom = w(k, k) - z;
        if (n > 1) {
            HermitianMatrix minor(n - 1, n - 1);
            Eigen::VectorXcd col(n - 1);
            for (Eigen::Index r = 0, rr = 0; r < n; ++r) {
                if (r == k) continue;
                col(rr) = w(r, k);
                for (Eigen::Index c = 0, cc = 0; c < n; ++c) {
                    if (c == k) continue;
                    minor(rr, cc++) = w(r, c);
                }
                ++rr;
            }
            for (double l : eigendecompose(minor, false).values()) {
                if (std::abs(l - z) <= 1e-10) {
                    out.skipped = true;
                    out.reason = "z is within 1e-10 of a minor spectrum";
                    return out;
                }
            }
            minor.diagonal().array() -= z;
            const Eigen::VectorXcd y = minor.partialPivLu().solve(col);
            denom -= (col.adjoint() * y)(0, 0);
        }
        rhs += 1.0 / denom;
    }
    rhs /= static_cast<double>(n);
    out.scale = std::abs(lhs) + std::abs(rhs);
    out.residual = std::abs(lhs - rhs);
    return out;
}

}  // namespace rmtlab

namespace rmtlab {

namespace {

using LMatrix = Eigen::Matrix<std::complex<long double>, Eigen::Dynamic, Eigen::Dynamic>;

LMatrix to_long(const HermitianMatrix& m) { return m.cast<std::complex<long double>>(); }

long double lambda_long(const LMatrix& base, const LMatrix& b1, const LMatrix& b2, long double x,
                        long double y, std::size_t i) {
    const LMatrix a = base + b1 * x + b2 * y;
    Eigen::SelfAdjointEigenSolver<LMatrix> solver(a, Eigen::EigenvaluesOnly);
    return solver.eigenvalues()(static_cast<Eigen::Index>(i));
}

long double central_stencil(const LMatrix& base, const LMatrix& b1, const LMatrix& b2,
                            std::size_t i, MultiIndex alpha, long double h) {
    long double sum = 0.0L;
    for (int j = 0; j <= alpha.first; ++j) {
        for (int l = 0; l <= alpha.second; ++l) {
            const long double x = (0.5L * alpha.first - j) * h;
            const long double y = (0.5L * alpha.second - l) * h;
            const long double c = static_cast<long double>(binom(alpha.first, j) * binom(alpha.second, l));
            const long double sign = ((j + l) % 2 == 0) ? 1.0L : -1.0L;
            sum += sign * c * lambda_long(base, b1, b2, x, y, i);
        }
    }
    return sum / std::pow(h, static_cast<long double>(alpha.first + alpha.second));
}

}  // namespace

double fd_lambda(const PerturbationPath& path, std::size_t i, MultiIndex alpha, double h,
                 int richardson) {
    if (alpha.first < 0 || alpha.second < 0) throw DomainError("fd_lambda: negative order");
    const LMatrix base = to_long(path.base), b1 = to_long(path.b1), b2 = to_long(path.b2);
    std::vector<long double> table;
    for (int level = 0; level <= richardson; ++level)
        table.push_back(central_stencil(base, b1, b2, i, alpha, static_cast<long double>(h) / std::pow(2.0L, level)));
    // Central stencils have even-power error expansions.
    for (int level = 1; level <= richardson; ++level) {
        const long double f = std::pow(4.0L, level);
        for (std::size_t k = table.size() - 1; k >= static_cast<std::size_t>(level); --k)
            table[k] = (f * table[k] - table[k - 1]) / (f - 1.0L);
    }
    return static_cast<double>(table.back());
}

HermitianMatrix fd_projector(const PerturbationPath& path, std::size_t i, double h) {
    const LMatrix base = to_long(path.base), b1 = to_long(path.b1);
    auto projector = [&](long double x) {
        const LMatrix a = base + b1 * x;
        Eigen::SelfAdjointEigenSolver<LMatrix> solver(a);
        const auto u = solver.eigenvectors().col(static_cast<Eigen::Index>(i));
        return LMatrix(u * u.adjoint());
    };
    auto diff = [&](long double step) {
        return LMatrix((projector(step) - projector(-step)) / (2.0L * step));
    };
    const long double hl = h;
    const LMatrix d = (4.0L * diff(0.5L * hl) - diff(hl)) / 3.0L;
    return d.cast<std::complex<double>>();
}

}  // namespace rmtlab

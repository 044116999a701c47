#pragma once

// Atom distributions, the truncated moment matching problem, and samplers for
// Wigner Hermitian / real symmetric ensembles (including gauss-divisible
// "Johansson" matrices).

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace rmtlab {

using HermitianMatrix = Eigen::MatrixXcd;

enum class AtomKind { gaussian, two_point, discrete, mixture };

struct AtomPoint {
    double value = 0.0;
    double probability = 0.0;
    bool operator==(const AtomPoint&) const = default;
};

/// Raw moments E X^k for k = 0..8.
using MomentVector = std::array<double, 9>;

/// A real scalar law with mean zero, or a complex law whose real and
/// imaginary parts are iid copies of such a real law.
///
/// Every law is `scale * S` for a shape S (standard gaussian, a finite point
/// set, or a convex mixture of other atoms). A truncated law conditions
/// `scale * S` on `|scale * S| <= cap` and then restores the original mean
/// and variance by an affine map.
class AtomDistribution {
public:
    AtomDistribution() = default;

    static AtomDistribution gaussian(double variance = 1.0);
    /// Unit-variance law on {tan(theta), -cot(theta)} with probabilities
    /// {cos^2(theta), sin^2(theta)}. Requires 0 < |theta| < pi/2.
    static AtomDistribution two_point(double theta);
    /// Finite law. Probabilities must be nonnegative, sum to 1 and give mean 0.
    static AtomDistribution discrete(std::vector<AtomPoint> points);
    /// Convex combination of laws; weights must sum to 1.
    static AtomDistribution mixture(std::vector<double> weights,
                                    std::vector<AtomDistribution> components);

    /// Law of factor * X (factor > 0).
    AtomDistribution scaled(double factor) const;
    /// Complex law with Re and Im iid copies of this law.
    AtomDistribution complexified() const;
    /// Real-part law of a complex atom (identity for real atoms).
    AtomDistribution real_part() const;
    /// Conditions on |X| <= cap, then recenters and rescales so the mean is
    /// zero and the variance equals that of the untruncated law.
    AtomDistribution truncated(double cap) const;

    AtomKind kind() const noexcept { return kind_; }
    bool is_complex() const noexcept { return complex_; }
    double scale() const noexcept { return scale_; }
    std::optional<double> theta() const noexcept { return theta_; }
    std::optional<double> cap() const noexcept { return cap_; }
    const std::vector<AtomPoint>& points() const noexcept { return points_; }
    const std::vector<double>& weights() const noexcept { return weights_; }
    const std::vector<AtomDistribution>& components() const noexcept { return components_; }

    /// E X^k of the real-part law, 0 <= k <= 8.
    double raw_moment(int k) const;
    MomentVector moments() const;
    double variance() const { return raw_moment(2); }
    /// Standardized third and fourth moments of the real-part law.
    double alpha3() const;
    double alpha4() const;
    /// E Re(X)^m Im(X)^l (Im is identically zero for a real law).
    double mixed_moment(int m, int l) const;
    /// Number of support points of the real-part law (0 for continuous laws).
    std::size_t support_size() const;
    /// Largest |x| in the support of the real-part law (infinity if unbounded).
    double support_bound() const;

    /// Quantile of the real-part law at u in (0, 1).
    double quantile(double u) const;

    bool operator==(const AtomDistribution&) const = default;

private:
    double partial_moment(int k, double cap) const;
    double conditioned_quantile(double u, double cap) const;
    bool collect_support(std::vector<double>& out, double factor) const;

    AtomKind kind_ = AtomKind::gaussian;
    bool complex_ = false;
    double scale_ = 1.0;
    std::optional<double> theta_;
    std::vector<AtomPoint> points_;  // sorted by value, unscaled
    std::vector<double> weights_;
    std::vector<AtomDistribution> components_;
    std::optional<double> cap_;
    double shift_ = 0.0;
    double rescale_ = 1.0;
};

/// Moments of a*X + b*Y for independent real X, Y.
MomentVector combine_moments(const MomentVector& x, double a, const MomentVector& y, double b);

/// Largest k <= max_order such that E Re^m Im^l agree for all m + l <= k
/// (Definition of matching to order k).
int match_order(const AtomDistribution& a, const AtomDistribution& b, double tol = 1e-8,
                int max_order = 4);

/// alpha4 - alpha3^2 - 1 for the given moment pair.
inline double moment_gap(double alpha3, double alpha4) { return alpha4 - alpha3 * alpha3 - 1.0; }

AtomDistribution two_point_atom(double theta);

/// Mean 0, variance 1 law with E X^3 = alpha3 and E X^4 = alpha4. The
/// boundary case alpha4 - alpha3^2 - 1 = 0 is a single two-point law; the
/// interior is a scaled two-point law mixed with an atom at 0.
AtomDistribution solve_truncated_moment(double alpha3, double alpha4);

struct MatchingSolution {
    double t = 0.0;
    double alpha3_prime = 0.0;
    double alpha4_prime = 0.0;
    AtomDistribution xi_prime;

    /// Moments of (1-t)^{1/2} xi' + t^{1/2} N(0,1).
    MomentVector combined_moments() const;
};

/// Finds t in (0,1) and xi' such that (1-t)^{1/2} xi' + t^{1/2} xi_G matches
/// xi to order 4. With `t` unset, uses half of the largest admissible t.
MatchingSolution solve_matching(const AtomDistribution& xi, std::optional<double> t = std::nullopt);

enum class Symmetry { hermitian, real_symmetric };
enum class Normalization { raw, coarse, fine };

struct EnsembleSpec {
    Symmetry symmetry = Symmetry::hermitian;
    std::size_t n = 1;
    AtomDistribution off_diag;
    AtomDistribution diag;
    std::optional<double> johansson_t;
    Normalization normalization = Normalization::raw;
    std::optional<double> truncation;

    /// Throws DomainError when the spec violates the ensemble definition.
    void validate() const;

    /// Atom laws after applying `truncation`, as used by the sampler.
    AtomDistribution effective_off_diag() const;
    AtomDistribution effective_diag() const;

    bool operator==(const EnsembleSpec&) const = default;

    static EnsembleSpec gue(std::size_t n, Normalization norm = Normalization::raw);
    static EnsembleSpec goe(std::size_t n, Normalization norm = Normalization::raw);
    /// Hermitian ensemble whose off-diagonal real/imaginary parts are iid
    /// copies of `unit_atom` / sqrt(2) and whose diagonal is `diag`.
    static EnsembleSpec wigner_hermitian(std::size_t n, const AtomDistribution& unit_atom,
                                         const AtomDistribution& diag,
                                         Normalization norm = Normalization::raw);
    static EnsembleSpec wigner_symmetric(std::size_t n, const AtomDistribution& unit_atom,
                                         const AtomDistribution& diag,
                                         Normalization norm = Normalization::raw);
};

/// Uniform stream id for the entry (i, j), i <= j. Shared by every ensemble
/// so that two specs sampled with the same seed are quantile-coupled.
double entry_uniform(std::uint64_t seed, std::size_t i, std::size_t j, int component);

/// Entry (i, j), i <= j, of the unnormalized matrix M for the given seed.
std::complex<double> sample_entry(const EnsembleSpec& spec, const AtomDistribution& off_diag,
                                  const AtomDistribution& diag, std::uint64_t seed,
                                  std::size_t i, std::size_t j);

/// Samples the matrix; pure function of (spec, seed), exactly Hermitian.
HermitianMatrix sample_matrix(const EnsembleSpec& spec, std::uint64_t seed);

/// Factor applied to M for the spec's normalization.
double normalization_factor(const EnsembleSpec& spec);

/// Returns a copy of `spec` whose entries are capped at |zeta| <= threshold.
/// Complex entries cap each of Re and Im at threshold / sqrt(2).
EnsembleSpec truncate_atoms(const EnsembleSpec& spec, double threshold);

}  // namespace rmtlab

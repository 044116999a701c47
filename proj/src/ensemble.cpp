#include "rmtlab/ensemble.hpp"

#include "rmtlab/errors.hpp"
#include "rmtlab/rng.hpp"

#include <algorithm>
#include <boost/math/special_functions/erf.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

namespace rmtlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kProbTol = 1e-12;

double binomial(int n, int k) {
    double r = 1.0;
    for (int j = 1; j <= k; ++j) r = r * (n - k + j) / j;
    return r;
}

/// Integral of z^k phi(z) over [-a, a] for the standard normal density.
double gaussian_partial(int k, double a) {
    if (k % 2 == 1) return 0.0;
    if (std::isinf(a)) {
        double r = 1.0;
        for (int j = k - 1; j > 0; j -= 2) r *= j;
        return r;
    }
    const double phi = std::exp(-0.5 * a * a) / std::sqrt(2.0 * std::numbers::pi);
    double value = std::erf(a / std::numbers::sqrt2);
    for (int j = 2; j <= k; j += 2) value = (j - 1) * value - 2.0 * std::pow(a, j - 1) * phi;
    return value;
}

/// P(Z <= x) without cancellation in the lower tail.
double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double clamp_open(double u) {
    return std::clamp(u, std::numeric_limits<double>::min(), 1.0 - 0x1.0p-53);
}

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

}  // namespace

AtomDistribution AtomDistribution::gaussian(double variance) {
    if (!(variance > 0.0) || !std::isfinite(variance))
        throw DomainError("gaussian atom: variance must be positive, got " + fmt(variance));
    AtomDistribution a;
    a.kind_ = AtomKind::gaussian;
    a.scale_ = std::sqrt(variance);
    return a;
}

AtomDistribution AtomDistribution::two_point(double theta) {
    if (!(std::abs(theta) > 0.0) || !(std::abs(theta) < std::numbers::pi / 2))
        throw DomainError("two_point atom: need 0 < |theta| < pi/2, got " + fmt(theta));
    AtomDistribution a;
    a.kind_ = AtomKind::two_point;
    a.theta_ = theta;
    const double c = std::cos(theta), s = std::sin(theta);
    a.points_ = {{std::tan(theta), c * c}, {-1.0 / std::tan(theta), s * s}};
    std::sort(a.points_.begin(), a.points_.end(),
              [](const AtomPoint& x, const AtomPoint& y) { return x.value < y.value; });
    return a;
}

AtomDistribution AtomDistribution::discrete(std::vector<AtomPoint> points) {
    if (points.empty()) throw DomainError("discrete atom: no support points");
    double total = 0.0, mean = 0.0, spread = 0.0;
    for (const auto& p : points) {
        if (!(p.probability >= 0.0) || !std::isfinite(p.value))
            throw DomainError("discrete atom: probabilities must be >= 0 and values finite");
        total += p.probability;
        mean += p.probability * p.value;
        spread = std::max(spread, std::abs(p.value));
    }
    if (std::abs(total - 1.0) > kProbTol)
        throw DomainError("discrete atom: probabilities sum to " + fmt(total) + ", expected 1");
    if (std::abs(mean) > kProbTol * std::max(1.0, spread))
        throw DomainError("discrete atom: mean is " + fmt(mean) + ", expected 0");
    std::sort(points.begin(), points.end(),
              [](const AtomPoint& x, const AtomPoint& y) { return x.value < y.value; });
    AtomDistribution a;
    a.kind_ = AtomKind::discrete;
    a.points_ = std::move(points);
    return a;
}

AtomDistribution AtomDistribution::mixture(std::vector<double> weights,
                                           std::vector<AtomDistribution> components) {
    if (weights.empty() || weights.size() != components.size())
        throw DomainError("mixture atom: need one weight per component");
    double total = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0)) throw DomainError("mixture atom: negative weight");
        total += w;
    }
    if (std::abs(total - 1.0) > kProbTol)
        throw DomainError("mixture atom: weights sum to " + fmt(total) + ", expected 1");
    for (const auto& c : components)
        if (c.is_complex() || c.cap().has_value())
            throw DomainError("mixture atom: components must be real and untruncated");
    AtomDistribution a;
    a.kind_ = AtomKind::mixture;
    a.weights_ = std::move(weights);
    a.components_ = std::move(components);
    return a;
}

AtomDistribution AtomDistribution::scaled(double factor) const {
    if (!(factor > 0.0) || !std::isfinite(factor))
        throw DomainError("scaled: factor must be positive");
    AtomDistribution a = *this;
    if (a.cap_) {
        a.rescale_ *= factor;
    } else {
        a.scale_ *= factor;
    }
    return a;
}

AtomDistribution AtomDistribution::complexified() const {
    AtomDistribution a = *this;
    a.complex_ = true;
    return a;
}

AtomDistribution AtomDistribution::real_part() const {
    AtomDistribution a = *this;
    a.complex_ = false;
    return a;
}

AtomDistribution AtomDistribution::truncated(double cap) const {
    if (!(cap > 0.0)) throw DomainError("truncate: threshold must be positive");
    if (cap_) throw DomainError("truncate: atom is already truncated");
    const double mass = partial_moment(0, cap);
    if (!(mass > 1e-12))
        throw DomainError("truncate: threshold " + fmt(cap) + " leaves no probability mass");
    const double m1 = partial_moment(1, cap) / mass;
    const double m2 = partial_moment(2, cap) / mass;
    const double cond_var = m2 - m1 * m1;
    const double var = partial_moment(2, kInf);
    if (!(cond_var > 1e-12 * var))
        throw DomainError("truncate: threshold " + fmt(cap) + " leaves a degenerate law");
    AtomDistribution a = *this;
    a.cap_ = cap;
    a.shift_ = m1;
    a.rescale_ = std::sqrt(var / cond_var);
    return a;
}

double AtomDistribution::partial_moment(int k, double cap) const {
    // E[(scale S)^k ; |scale S| <= cap] of the untruncated law.
    const double c = cap / scale_;
    const double sk = std::pow(scale_, k);
    switch (kind_) {
        case AtomKind::gaussian:
            return sk * gaussian_partial(k, c);
        case AtomKind::two_point:
        case AtomKind::discrete: {
            double sum = 0.0;
            for (const auto& p : points_)
                if (std::abs(p.value) <= c) sum += p.probability * std::pow(p.value, k);
            return sk * sum;
        }
        case AtomKind::mixture: {
            double sum = 0.0;
            for (std::size_t i = 0; i < components_.size(); ++i)
                sum += weights_[i] * components_[i].partial_moment(k, c);
            return sk * sum;
        }
    }
    return 0.0;
}

double AtomDistribution::conditioned_quantile(double u, double cap) const {
    const double c = cap / scale_;
    switch (kind_) {
        case AtomKind::gaussian: {
            if (std::isinf(c)) return scale_ * normal_quantile(u);
            const double lo = normal_cdf(-c);
            return scale_ * normal_quantile(clamp_open(lo + u * (1.0 - 2.0 * lo)));
        }
        case AtomKind::two_point:
        case AtomKind::discrete: {
            double total = 0.0;
            for (const auto& p : points_)
                if (std::abs(p.value) <= c) total += p.probability;
            const double target = u * total;
            double cum = 0.0;
            const AtomPoint* last = nullptr;
            for (const auto& p : points_) {
                if (std::abs(p.value) > c || p.probability == 0.0) continue;
                cum += p.probability;
                last = &p;
                if (cum >= target) return scale_ * p.value;
            }
            return scale_ * last->value;
        }
        case AtomKind::mixture: {
            std::vector<double> mass(components_.size());
            double total = 0.0;
            for (std::size_t i = 0; i < components_.size(); ++i) {
                mass[i] = weights_[i] * components_[i].partial_moment(0, c);
                total += mass[i];
            }
            const double target = u * total;
            double cum = 0.0;
            std::size_t pick = components_.size() - 1;
            for (std::size_t i = 0; i < components_.size(); ++i) {
                if (mass[i] == 0.0) continue;
                if (cum + mass[i] >= target) {
                    pick = i;
                    break;
                }
                cum += mass[i];
            }
            while (mass[pick] == 0.0) --pick;
            const double inner = clamp_open((target - cum) / mass[pick]);
            return scale_ * components_[pick].conditioned_quantile(inner, c);
        }
    }
    return 0.0;
}

double AtomDistribution::quantile(double u) const {
    if (!(u > 0.0 && u < 1.0)) throw DomainError("quantile: u must lie in (0, 1)");
    if (!cap_) return conditioned_quantile(u, kInf);
    return rescale_ * (conditioned_quantile(u, *cap_) - shift_);
}

double AtomDistribution::raw_moment(int k) const {
    if (k < 0 || k > 8) throw DomainError("raw_moment: order must be in [0, 8]");
    if (!cap_) return partial_moment(k, kInf);
    const double mass = partial_moment(0, *cap_);
    double sum = 0.0;
    for (int j = 0; j <= k; ++j)
        sum += binomial(k, j) * (partial_moment(j, *cap_) / mass) * std::pow(-shift_, k - j);
    return std::pow(rescale_, k) * sum;
}

MomentVector AtomDistribution::moments() const {
    MomentVector m{};
    for (int k = 0; k <= 8; ++k) m[k] = raw_moment(k);
    return m;
}

double AtomDistribution::alpha3() const { return raw_moment(3) / std::pow(variance(), 1.5); }

double AtomDistribution::alpha4() const {
    const double v = variance();
    return raw_moment(4) / (v * v);
}

double AtomDistribution::mixed_moment(int m, int l) const {
    if (complex_) return raw_moment(m) * raw_moment(l);
    return l == 0 ? raw_moment(m) : 0.0;
}

bool AtomDistribution::collect_support(std::vector<double>& out, double factor) const {
    const double f = factor * scale_;
    switch (kind_) {
        case AtomKind::gaussian:
            return false;
        case AtomKind::two_point:
        case AtomKind::discrete:
            for (const auto& p : points_)
                if (p.probability > 0.0 && (!cap_ || std::abs(scale_ * p.value) <= *cap_))
                    out.push_back(f * p.value);
            return true;
        case AtomKind::mixture:
            for (std::size_t i = 0; i < components_.size(); ++i)
                if (weights_[i] > 0.0 && !components_[i].collect_support(out, f)) return false;
            return true;
    }
    return false;
}

std::size_t AtomDistribution::support_size() const {
    std::vector<double> values;
    if (!collect_support(values, 1.0)) return 0;
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    return values.size();
}

double AtomDistribution::support_bound() const {
    if (cap_) return rescale_ * (*cap_ + std::abs(shift_));
    switch (kind_) {
        case AtomKind::gaussian:
            return kInf;
        case AtomKind::two_point:
        case AtomKind::discrete: {
            double b = 0.0;
            for (const auto& p : points_)
                if (p.probability > 0.0) b = std::max(b, std::abs(p.value));
            return scale_ * b;
        }
        case AtomKind::mixture: {
            double b = 0.0;
            for (std::size_t i = 0; i < components_.size(); ++i)
                if (weights_[i] > 0.0) b = std::max(b, components_[i].support_bound());
            return scale_ * b;
        }
    }
    return kInf;
}

MomentVector combine_moments(const MomentVector& x, double a, const MomentVector& y, double b) {
    MomentVector out{};
    for (int k = 0; k <= 8; ++k) {
        double sum = 0.0;
        for (int j = 0; j <= k; ++j)
            sum += binomial(k, j) * std::pow(a, j) * x[j] * std::pow(b, k - j) * y[k - j];
        out[k] = sum;
    }
    return out;
}

int match_order(const AtomDistribution& a, const AtomDistribution& b, double tol, int max_order) {
    int order = 0;
    for (int k = 1; k <= max_order; ++k) {
        for (int m = 0; m <= k; ++m) {
            const int l = k - m;
            const double x = a.mixed_moment(m, l), y = b.mixed_moment(m, l);
            if (std::abs(x - y) > tol * std::max(1.0, std::max(std::abs(x), std::abs(y))))
                return order;
        }
        order = k;
    }
    return order;
}

AtomDistribution two_point_atom(double theta) { return AtomDistribution::two_point(theta); }

AtomDistribution solve_truncated_moment(double alpha3, double alpha4) {
    const double gap = moment_gap(alpha3, alpha4);
    if (gap < -kProbTol)
        throw FeasibilityError("infeasible moments: alpha4 - alpha3^2 - 1 = " + fmt(gap) +
                               " < 0 (alpha3 = " + fmt(alpha3) + ", alpha4 = " + fmt(alpha4) + ")");
    if (gap <= kProbTol) {
        // -2 cot(2 theta) = alpha3 on 0 < theta < pi/2.
        const double theta = std::numbers::pi / 4 + 0.5 * std::atan(0.5 * alpha3);
        return AtomDistribution::two_point(theta);
    }
    // With probability p the law is X / sqrt(p) for a boundary two-point X,
    // otherwise 0. Then E Y^3 = alpha3(X)/sqrt(p), E Y^4 = (alpha3(X)^2 + 1)/p.
    const double p = 1.0 / (alpha4 - alpha3 * alpha3);
    const double theta = std::numbers::pi / 4 + 0.5 * std::atan(0.5 * alpha3 * std::sqrt(p));
    return AtomDistribution::mixture(
        {p, 1.0 - p},
        {AtomDistribution::two_point(theta).scaled(1.0 / std::sqrt(p)),
         AtomDistribution::discrete({{0.0, 1.0}})});
}

MomentVector MatchingSolution::combined_moments() const {
    return combine_moments(xi_prime.moments(), std::sqrt(1.0 - t),
                           AtomDistribution::gaussian().moments(), std::sqrt(t));
}

namespace {

struct PrimeMoments {
    double a3, a4;
};

PrimeMoments prime_moments(double alpha3, double alpha4, double t) {
    const double s = 1.0 - t;
    return {alpha3 * std::pow(s, -1.5), (alpha4 - 6.0 * t * s - 3.0 * t * t) / (s * s)};
}

double prime_gap(double alpha3, double alpha4, double t) {
    const auto pm = prime_moments(alpha3, alpha4, t);
    return moment_gap(pm.a3, pm.a4);
}

}  // namespace

MatchingSolution solve_matching(const AtomDistribution& xi, std::optional<double> t) {
    const AtomDistribution real = xi.real_part();
    const double alpha3 = real.alpha3();
    const double alpha4 = real.alpha4();
    if (moment_gap(alpha3, alpha4) <= kProbTol || real.support_size() == 2)
        throw FeasibilityError(
            "matching requires an atom supported on at least three points "
            "(alpha4 - alpha3^2 - 1 = " + fmt(moment_gap(alpha3, alpha4)) + ")");

    double chosen = 0.0;
    if (t) {
        if (!(*t > 0.0 && *t < 1.0)) throw DomainError("solve_matching: t must lie in (0, 1)");
        if (!(prime_gap(alpha3, alpha4, *t) > 0.0))
            throw FeasibilityError("solve_matching: t = " + fmt(*t) +
                                   " makes alpha4' - alpha3'^2 - 1 nonpositive");
        chosen = *t;
    } else {
        // Largest t_max with the gap positive on (0, t_max), by scan + bisection.
        constexpr int kScan = 4096;
        double t_max = 1.0;
        double prev = 0.0;
        for (int k = 1; k < kScan; ++k) {
            const double tk = static_cast<double>(k) / kScan;
            if (!(prime_gap(alpha3, alpha4, tk) > 0.0)) {
                double lo = prev, hi = tk;
                for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    (prime_gap(alpha3, alpha4, mid) > 0.0 ? lo : hi) = mid;
                }
                t_max = lo;
                break;
            }
            prev = tk;
        }
        chosen = 0.5 * t_max;
    }

    MatchingSolution sol;
    sol.t = chosen;
    const auto pm = prime_moments(alpha3, alpha4, chosen);
    sol.alpha3_prime = pm.a3;
    sol.alpha4_prime = pm.a4;
    sol.xi_prime = solve_truncated_moment(pm.a3, pm.a4);
    return sol;
}

// ---------------------------------------------------------------------------

void EnsembleSpec::validate() const {
    if (n < 1) throw DomainError("ensemble: n must be at least 1");
    if (diag.is_complex()) throw DomainError("ensemble: diagonal atom must be real");
    if (!(diag.variance() > 0.0)) throw DomainError("ensemble: diagonal variance must be positive");
    if (std::abs(diag.raw_moment(1)) > 1e-10)
        throw DomainError("ensemble: diagonal atom must have mean zero");
    const double off_var = off_diag.variance();
    if (std::abs(off_diag.raw_moment(1)) > 1e-10)
        throw DomainError("ensemble: off-diagonal atom must have mean zero");
    if (symmetry == Symmetry::hermitian) {
        if (!off_diag.is_complex())
            throw DomainError("ensemble: hermitian off-diagonal atom must be complex");
        if (std::abs(off_var - 0.5) > 1e-10)
            throw DomainError("ensemble: hermitian off-diagonal real part must have variance 1/2, got " +
                              fmt(off_var));
    } else {
        if (off_diag.is_complex())
            throw DomainError("ensemble: real symmetric off-diagonal atom must be real");
        if (std::abs(off_var - 1.0) > 1e-10)
            throw DomainError("ensemble: real symmetric off-diagonal atom must have variance 1, got " +
                              fmt(off_var));
    }
    if (johansson_t && !(*johansson_t > 0.0 && *johansson_t <= 1.0))
        throw DomainError("ensemble: johansson_t must lie in (0, 1]");
    if (truncation) {
        if (!(*truncation > 0.0)) throw DomainError("ensemble: truncation must be positive");
        (void)effective_off_diag();
        (void)effective_diag();
    }
}

AtomDistribution EnsembleSpec::effective_off_diag() const {
    if (!truncation) return off_diag;
    const double cap = off_diag.is_complex() ? *truncation / std::numbers::sqrt2 : *truncation;
    return off_diag.truncated(cap);
}

AtomDistribution EnsembleSpec::effective_diag() const {
    if (!truncation) return diag;
    return diag.truncated(*truncation);
}

EnsembleSpec EnsembleSpec::gue(std::size_t n, Normalization norm) {
    return wigner_hermitian(n, AtomDistribution::gaussian(), AtomDistribution::gaussian(), norm);
}

EnsembleSpec EnsembleSpec::goe(std::size_t n, Normalization norm) {
    return wigner_symmetric(n, AtomDistribution::gaussian(), AtomDistribution::gaussian(2.0), norm);
}

EnsembleSpec EnsembleSpec::wigner_hermitian(std::size_t n, const AtomDistribution& unit_atom,
                                            const AtomDistribution& diag, Normalization norm) {
    EnsembleSpec s;
    s.symmetry = Symmetry::hermitian;
    s.n = n;
    s.off_diag = unit_atom.real_part().scaled(1.0 / std::sqrt(unit_atom.variance())).scaled(
                     std::sqrt(0.5)).complexified();
    s.diag = diag;
    s.normalization = norm;
    return s;
}

EnsembleSpec EnsembleSpec::wigner_symmetric(std::size_t n, const AtomDistribution& unit_atom,
                                            const AtomDistribution& diag, Normalization norm) {
    EnsembleSpec s;
    s.symmetry = Symmetry::real_symmetric;
    s.n = n;
    s.off_diag = unit_atom.real_part().scaled(1.0 / std::sqrt(unit_atom.variance()));
    s.diag = diag;
    s.normalization = norm;
    return s;
}

double entry_uniform(std::uint64_t seed, std::size_t i, std::size_t j, int component) {
    return uniform_at(seed, stream_id({0x656e747279ull, i}), 4 * static_cast<std::uint64_t>(j) + component);
}

std::complex<double> sample_entry(const EnsembleSpec& spec, const AtomDistribution& off,
                                  const AtomDistribution& dg, std::uint64_t seed, std::size_t i,
                                  std::size_t j) {
    const bool herm = spec.symmetry == Symmetry::hermitian;
    std::complex<double> z;
    if (i == j) {
        z = dg.quantile(entry_uniform(seed, i, j, 0));
    } else {
        const double re = off.quantile(entry_uniform(seed, i, j, 0));
        const double im = herm ? off.quantile(entry_uniform(seed, i, j, 1)) : 0.0;
        z = {re, im};
    }
    if (spec.johansson_t) {
        const double t = *spec.johansson_t;
        std::complex<double> g;
        if (i == j) {
            g = (herm ? 1.0 : std::numbers::sqrt2) * normal_quantile(entry_uniform(seed, i, j, 2));
        } else if (herm) {
            g = {std::sqrt(0.5) * normal_quantile(entry_uniform(seed, i, j, 2)),
                 std::sqrt(0.5) * normal_quantile(entry_uniform(seed, i, j, 3))};
        } else {
            g = normal_quantile(entry_uniform(seed, i, j, 2));
        }
        z = std::sqrt(1.0 - t) * z + std::sqrt(t) * g;
    }
    return z;
}

double normalization_factor(const EnsembleSpec& spec) {
    const double rn = std::sqrt(static_cast<double>(spec.n));
    switch (spec.normalization) {
        case Normalization::raw:
            return 1.0;
        case Normalization::coarse:
            return 1.0 / rn;
        case Normalization::fine:
            return rn;
    }
    return 1.0;
}

HermitianMatrix sample_matrix(const EnsembleSpec& spec, std::uint64_t seed) {
    spec.validate();
    const auto off = spec.effective_off_diag();
    const auto dg = spec.effective_diag();
    const double factor = normalization_factor(spec);
    const auto n = static_cast<Eigen::Index>(spec.n);
    HermitianMatrix m(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i; j < n; ++j) {
            const auto z = factor * sample_entry(spec, off, dg, seed, i, j);
            if (i == j) {
                m(i, i) = z.real();
            } else {
                m(i, j) = z;
                m(j, i) = std::conj(z);
            }
        }
    }
    return m;
}

EnsembleSpec truncate_atoms(const EnsembleSpec& spec, double threshold) {
    if (!(threshold > 0.0)) throw DomainError("truncate_atoms: threshold must be positive");
    EnsembleSpec out = spec;
    out.truncation = threshold;
    out.validate();
    return out;
}

}  // namespace rmtlab

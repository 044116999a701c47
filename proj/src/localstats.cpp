#include "rmtlab/localstats.hpp"

#include "rmtlab/errors.hpp"
#include "rmtlab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace rmtlab {

EmpiricalStatistic::EmpiricalStatistic(std::string name_, std::vector<double> edges,
                                       StatNormalization norm, int dim)
    : name(std::move(name_)), bin_edges(std::move(edges)), dimension(dim), normalization(norm) {
    if (bin_edges.empty()) throw DomainError("EmpiricalStatistic: no bin edges");
    if (dimension < 1) throw DomainError("EmpiricalStatistic: dimension must be positive");
    for (std::size_t k = 1; k < bin_edges.size(); ++k)
        if (!(bin_edges[k] > bin_edges[k - 1]))
            throw DomainError("EmpiricalStatistic: edges must be strictly increasing");
    std::size_t bins = 1;
    for (int d = 0; d < dimension; ++d) bins *= bin_edges.size() - 1;
    counts.assign(bin_edges.size() == 1 ? 0 : bins, 0);
}

namespace {

// Bin of x under right-closed bins; -1 underflow, -2 overflow.
long locate(const std::vector<double>& edges, double x) {
    if (!(x > edges.front())) return -1;
    if (x > edges.back()) return -2;
    const auto it = std::lower_bound(edges.begin(), edges.end(), x);
    return static_cast<long>(it - edges.begin()) - 1;
}

}  // namespace

void EmpiricalStatistic::add(double x) {
    if (dimension != 1) throw DomainError("EmpiricalStatistic::add: statistic is multivariate");
    ++n_samples;
    const long b = locate(bin_edges, x);
    if (b == -1) {
        ++underflow;
    } else if (b == -2) {
        ++overflow;
    } else {
        ++counts[static_cast<std::size_t>(b)];
    }
}

void EmpiricalStatistic::add_point(const std::vector<double>& x) {
    if (static_cast<int>(x.size()) != dimension)
        throw DomainError("EmpiricalStatistic::add_point: wrong dimension");
    ++n_samples;
    std::size_t flat = 0;
    const std::size_t per_axis = bin_edges.size() - 1;
    for (double v : x) {
        const long b = locate(bin_edges, v);
        if (b < 0) {
            ++overflow;
            return;
        }
        flat = flat * per_axis + static_cast<std::size_t>(b);
    }
    ++counts[flat];
}

void EmpiricalStatistic::merge(const EmpiricalStatistic& other) {
    if (other.bin_edges != bin_edges || other.dimension != dimension ||
        other.normalization != normalization)
        throw DomainError("EmpiricalStatistic::merge: incompatible statistics");
    for (std::size_t k = 0; k < counts.size(); ++k) counts[k] += other.counts[k];
    underflow += other.underflow;
    overflow += other.overflow;
    n_samples += other.n_samples;
    denominator += other.denominator;
    low_statistics = low_statistics && other.low_statistics;
}

std::vector<double> EmpiricalStatistic::cdf_values() const {
    if (dimension != 1) throw DomainError("cdf_values: statistic is multivariate");
    std::vector<double> out(bin_edges.size());
    const double denom = denominator > 0.0 ? denominator : 1.0;
    std::uint64_t running = underflow;
    out[0] = static_cast<double>(running) / denom;
    for (std::size_t k = 0; k < counts.size(); ++k) {
        running += counts[k];
        out[k + 1] = static_cast<double>(running) / denom;
    }
    return out;
}

std::vector<double> EmpiricalStatistic::density_values() const {
    std::vector<double> out(counts.size(), 0.0);
    if (denominator <= 0.0) return out;
    const std::size_t per_axis = bin_edges.size() - 1;
    for (std::size_t flat = 0; flat < counts.size(); ++flat) {
        double volume = 1.0;
        std::size_t rest = flat;
        for (int d = 0; d < dimension; ++d) {
            const std::size_t b = rest % per_axis;
            rest /= per_axis;
            volume *= bin_edges[b + 1] - bin_edges[b];
        }
        out[flat] = static_cast<double>(counts[flat]) / (denominator * volume);
    }
    return out;
}

bool EmpiricalStatistic::consistent() const {
    const std::uint64_t total =
        std::accumulate(counts.begin(), counts.end(), std::uint64_t{0}) + underflow + overflow;
    return total == n_samples;
}

std::vector<double> linear_edges(double a, double b, std::size_t bins) {
    if (bins == 0 || !(b > a)) throw DomainError("linear_edges: need bins > 0 and b > a");
    std::vector<double> e(bins + 1);
    for (std::size_t k = 0; k <= bins; ++k)
        e[k] = a + (b - a) * static_cast<double>(k) / static_cast<double>(bins);
    e.back() = b;
    return e;
}

EmpiricalStatistic gap_distribution(const std::vector<double>& eigs,
                                    const std::vector<double>& s_grid) {
    if (eigs.size() < 2) throw DomainError("gap_distribution: need at least two eigenvalues");
    EmpiricalStatistic stat("gap_distribution", s_grid, StatNormalization::cdf);
    for (std::size_t i = 0; i + 1 < eigs.size(); ++i) stat.add(eigs[i + 1] - eigs[i]);
    stat.denominator = static_cast<double>(eigs.size());
    return stat;
}

std::vector<GapRecord> bulk_gaps(const std::vector<double>& eigs_fine, double eps) {
    const std::size_t n = eigs_fine.size();
    if (n < 2) throw DomainError("bulk_gaps: need at least two eigenvalues");
    if (!(eps >= 0.0 && eps < 0.5)) throw DomainError("bulk_gaps: eps must lie in [0, 1/2)");
    const double nd = static_cast<double>(n);
    std::vector<GapRecord> out;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double lo = static_cast<double>(i), hi = static_cast<double>(i + 1);
        if (lo < eps * nd || hi > (1.0 - eps) * nd) continue;
        GapRecord r;
        r.index = i;
        r.gap = eigs_fine[i + 1] - eigs_fine[i];
        r.density = rho_sc(0.5 * (eigs_fine[i] + eigs_fine[i + 1]) / nd);
        r.normalized = r.gap * r.density;
        out.push_back(r);
    }
    return out;
}

std::vector<double> normalized_bulk_gaps(const std::vector<double>& eigs_fine, double eps) {
    std::vector<double> out;
    for (const auto& r : bulk_gaps(eigs_fine, eps)) out.push_back(r.normalized);
    return out;
}

EmpiricalStatistic localized_gap_distribution(const std::vector<double>& eigs_fine, double u,
                                              double l_n, const std::vector<double>& s_grid) {
    if (!(u > -2.0 && u < 2.0)) throw DomainError("localized_gap_distribution: u must lie in (-2, 2)");
    if (!(l_n >= 1.0)) throw DomainError("localized_gap_distribution: l_n must be at least 1");
    const double rho = rho_sc(u);
    const double center = static_cast<double>(eigs_fine.size()) * u;
    const double half = l_n / rho;
    EmpiricalStatistic stat("localized_gap_distribution", s_grid, StatNormalization::cdf);
    for (std::size_t i = 0; i + 1 < eigs_fine.size(); ++i) {
        const double x = eigs_fine[i];
        if (x < center - half || x >= center + half) continue;
        stat.add((eigs_fine[i + 1] - x) * rho);
    }
    stat.denominator = 2.0 * l_n;
    stat.low_statistics = stat.n_samples == 0;
    stat.metadata = {{"u", u}, {"l_n", l_n}, {"rho", rho}};
    return stat;
}

namespace {

void enumerate_tuples(const std::vector<double>& pts, int k, std::vector<std::size_t>& chosen,
                      std::vector<double>& coords, EmpiricalStatistic& stat) {
    if (static_cast<int>(chosen.size()) == k) {
        stat.add_point(coords);
        return;
    }
    for (std::size_t j = 0; j < pts.size(); ++j) {
        if (std::find(chosen.begin(), chosen.end(), j) != chosen.end()) continue;
        chosen.push_back(j);
        coords.push_back(pts[j]);
        enumerate_tuples(pts, k, chosen, coords, stat);
        coords.pop_back();
        chosen.pop_back();
    }
}

}  // namespace

EmpiricalStatistic correlation_estimate(const std::vector<std::vector<double>>& trials, double u,
                                        int k, double window, std::size_t bins) {
    if (k < 1 || k > 3) throw DomainError("correlation_estimate: k must be 1, 2 or 3");
    if (!(u > -2.0 && u < 2.0)) throw DomainError("correlation_estimate: u must lie in (-2, 2)");
    if (!(window > 0.0)) throw DomainError("correlation_estimate: window must be positive");
    const double rho = rho_sc(u);
    // Edges are offsets x - nu in fine-scale units.
    EmpiricalStatistic stat("correlation_k" + std::to_string(k),
                            linear_edges(-window / rho, window / rho, bins), StatNormalization::pdf, k);
    for (const auto& eigs : trials) {
        const double center = static_cast<double>(eigs.size()) * u;
        std::vector<double> pts;
        for (double x : eigs) {
            const double off = x - center;
            if (off > -window / rho && off <= window / rho) pts.push_back(off);
        }
        std::vector<std::size_t> chosen;
        std::vector<double> coords;
        enumerate_tuples(pts, k, chosen, coords, stat);
    }
    stat.denominator = static_cast<double>(trials.size());
    stat.low_statistics = stat.n_samples < 100;
    stat.metadata = {{"u", u}, {"rho", rho}, {"window", window}, {"k", k}};
    return stat;
}

double q_index(const std::vector<double>& eigs, std::size_t i) {
    if (i >= eigs.size()) throw DomainError("q_index: index out of range");
    double q = 0.0;
    for (std::size_t j = 0; j < eigs.size(); ++j) {
        if (j == i) continue;
        const double d = eigs[j] - eigs[i];
        if (std::abs(d) < 1e-14) throw SingularityError("q_index: repeated eigenvalue at index " + std::to_string(i));
        q += 1.0 / (d * d);
    }
    return q;
}

RegularizedGapQuery regularized_gap(const std::vector<double>& eigs, std::size_t i0, std::size_t l,
                                    std::size_t n, std::size_t n0, double c1) {
    if (l < 1 || i0 < l || i0 + 1 > n || n > n0 || n > eigs.size())
        throw DomainError("regularized_gap: need 0 <= i0 - l < i0 <= n - 1, n <= n0, n <= #eigs");
    const double logn0 = std::log(static_cast<double>(n0));
    const double cap = std::pow(logn0, c1);
    const double exponent = std::pow(logn0, 0.9);
    RegularizedGapQuery q{i0, l, n, n0, c1, std::numeric_limits<double>::infinity(), 0, 0};
    for (std::size_t lo = 0; lo <= i0 - l; ++lo) {
        for (std::size_t hi = i0; hi < n; ++hi) {
            const double spread = static_cast<double>(hi - lo);
            const double denom = std::pow(std::min(spread, cap), exponent);
            const double v = (eigs[hi] - eigs[lo]) / denom;
            if (v < q.value) {
                q.value = v;
                q.best_lower = lo;
                q.best_upper = hi;
            }
        }
    }
    return q;
}

double least_singular_value(const std::vector<double>& eigs) {
    if (eigs.empty()) throw DomainError("least_singular_value: empty spectrum");
    double m = std::numeric_limits<double>::infinity();
    for (double v : eigs) m = std::min(m, std::abs(v));
    return m;
}

GustavssonValue gustavsson_statistic(const std::vector<double>& eigs_fine, std::size_t i,
                                     std::size_t n) {
    if (n < 2 || i >= n || i >= eigs_fine.size())
        throw DomainError("gustavsson_statistic: index out of range");
    const double nd = static_cast<double>(n);
    const double a = static_cast<double>(i + 1) / nd;
    const double t = classical_location(a);
    GustavssonValue g;
    g.value = std::sqrt((4.0 - t * t) / 2.0) * (eigs_fine[i] - t * nd) / std::sqrt(std::log(nd));
    g.edge_regime = a <= 0.05 || a >= 0.95;
    return g;
}

LogDeterminant log_abs_determinant(const std::vector<double>& eigs) {
    LogDeterminant d;
    for (double v : eigs) {
        if (std::abs(v) <= 1e-300) {
            d.singular = true;
            d.value = -std::numeric_limits<double>::infinity();
            return d;
        }
        d.value += std::log(std::abs(v));
    }
    return d;
}

double ks_distance(std::vector<double> samples, const std::function<double(double)>& cdf) {
    if (samples.empty()) throw DomainError("ks_distance: no samples");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t k = 0; k < samples.size(); ++k) {
        const double f = cdf(samples[k]);
        d = std::max({d, static_cast<double>(k + 1) / n - f, f - static_cast<double>(k) / n});
    }
    return d;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw DomainError("ks_two_sample: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

double ks_two_sample_pvalue(double d, std::size_t n_a, std::size_t n_b) {
    const double ne = static_cast<double>(n_a) * static_cast<double>(n_b) /
                      static_cast<double>(n_a + n_b);
    const double s = std::sqrt(ne);
    const double lambda = (s + 0.12 + 0.11 / s) * d;
    if (lambda < 1e-3) return 1.0;
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += (k % 2 == 1 ? 1.0 : -1.0) * term;
        if (term < 1e-16) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

}  // namespace rmtlab

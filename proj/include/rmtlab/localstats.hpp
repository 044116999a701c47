#pragma once

// Local eigenvalue statistics of a sampled spectrum. Eigenvalue arrays are
// ascending; indices are 0-based throughout.

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace rmtlab {

enum class StatNormalization { pdf, cdf, raw };

/// Histogram over right-closed bins (e_k, e_{k+1}] with underflow (x <= e_0)
/// and overflow (x > e_last) tallies. A statistic of dimension d has
/// (edges - 1)^d bins flattened in row-major order, with the same edges on
/// every axis. `denominator` is what counts are divided by when the
/// statistic is read as a probability or density.
struct EmpiricalStatistic {
    std::string name;
    std::vector<double> bin_edges;
    std::vector<std::uint64_t> counts;
    std::uint64_t underflow = 0;
    std::uint64_t overflow = 0;
    std::uint64_t n_samples = 0;
    double denominator = 0.0;
    int dimension = 1;
    StatNormalization normalization = StatNormalization::raw;
    /// Set when too few samples were seen for the estimate to mean much.
    bool low_statistics = false;
    std::map<std::string, double> metadata;

    EmpiricalStatistic() = default;
    EmpiricalStatistic(std::string name, std::vector<double> edges, StatNormalization norm,
                       int dimension = 1);

    std::size_t bin_count() const { return counts.size(); }
    /// Records one scalar sample (dimension 1 only).
    void add(double x);
    /// Records a point; ignored in the counts (but tallied as overflow) when
    /// any coordinate falls outside the edges.
    void add_point(const std::vector<double>& x);

    /// Adds counts from a statistic over identical edges. Throws DomainError
    /// when the edges, dimension or normalization differ.
    void merge(const EmpiricalStatistic& other);

    /// (underflow + counts up to edge k) / denominator, for k = 0..edges-1.
    std::vector<double> cdf_values() const;
    /// count / (denominator * bin volume), per bin.
    std::vector<double> density_values() const;
    /// True when sum(counts) + underflow + overflow == n_samples.
    bool consistent() const;

    bool operator==(const EmpiricalStatistic&) const = default;
};

/// Equal-width edges a, ..., b with `bins` bins.
std::vector<double> linear_edges(double a, double b, std::size_t bins);

/// S_n(s) = (1/n) #{i < n-1 : x_{i+1} - x_i <= s} on the grid s_grid.
/// The statistic histograms the n-1 raw gaps; cdf_values() gives S_n.
EmpiricalStatistic gap_distribution(const std::vector<double>& eigs,
                                    const std::vector<double>& s_grid);

struct GapRecord {
    std::size_t index = 0;
    double gap = 0.0;
    double density = 0.0;
    double normalized = 0.0;
};

/// Gaps of fine-scale eigenvalues with eps*n <= i and i+1 <= (1-eps)*n,
/// normalized by the semicircle density at the gap midpoint.
std::vector<GapRecord> bulk_gaps(const std::vector<double>& eigs_fine, double eps = 0.1);
std::vector<double> normalized_bulk_gaps(const std::vector<double>& eigs_fine, double eps = 0.1);

/// Localized gap statistic around energy u in (-2, 2). The window is
/// x_i in [nu - l_n/rho, nu + l_n/rho) and the count is divided by 2 l_n, so
/// the statistic tends to the integral of the Gaudin density.
EmpiricalStatistic localized_gap_distribution(const std::vector<double>& eigs_fine, double u,
                                              double l_n, const std::vector<double>& s_grid);

/// Histogram estimate of the k-point correlation function of fine-scale
/// eigenvalues near nu. Coordinates are t = rho_sc(u) (x - nu); cells are
/// `bins` equal widths per axis on [-window, window). Densities are per unit
/// of fine-scale volume (so k = 1 in the bulk tends to rho_sc(u)); divide by
/// rho_sc(u)^k to compare with the sine-kernel determinant.
EmpiricalStatistic correlation_estimate(const std::vector<std::vector<double>>& trials, double u,
                                        int k, double window, std::size_t bins);

/// Q_i = sum_{j != i} (lambda_j - lambda_i)^{-2}.
double q_index(const std::vector<double>& eigs, std::size_t i);

struct RegularizedGapQuery {
    std::size_t i0 = 0;
    std::size_t l = 0;
    std::size_t n = 0;
    std::size_t n0 = 0;
    double c1 = 1.0;
    double value = 0.0;
    std::size_t best_lower = 0;
    std::size_t best_upper = 0;
};

/// g = inf (lambda_{i+} - lambda_{i-}) / min(i+ - i-, log^{C1} n0)^{log^{0.9} n0}
/// over 0 <= i- <= i0 - l and i0 <= i+ <= n - 1 (natural logarithms).
RegularizedGapQuery regularized_gap(const std::vector<double>& eigs, std::size_t i0, std::size_t l,
                                    std::size_t n, std::size_t n0, double c1);

/// min_i |lambda_i|.
double least_singular_value(const std::vector<double>& eigs);

struct GustavssonValue {
    double value = 0.0;
    /// i/n outside (0.05, 0.95).
    bool edge_regime = false;
};

/// sqrt((4 - t^2)/2) (lambda_i - t n) / sqrt(log n) with t = t(r/n) for the
/// 1-based rank r = i + 1.
GustavssonValue gustavsson_statistic(const std::vector<double>& eigs_fine, std::size_t i,
                                     std::size_t n);

struct LogDeterminant {
    double value = 0.0;
    bool singular = false;
};

/// sum_i log|lambda_i|; a zero eigenvalue gives -infinity with `singular` set.
LogDeterminant log_abs_determinant(const std::vector<double>& eigs);

/// sup_x |F_empirical(x) - cdf(x)|.
double ks_distance(std::vector<double> samples, const std::function<double(double)>& cdf);
/// Two-sample KS statistic.
double ks_two_sample(std::vector<double> a, std::vector<double> b);
/// Asymptotic p-value of the two-sample KS statistic.
double ks_two_sample_pvalue(double d, std::size_t n_a, std::size_t n_b);

}  // namespace rmtlab

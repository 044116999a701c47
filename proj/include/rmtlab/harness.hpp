#pragma once

// Seeded Monte Carlo drivers: four moment comparisons, Lindeberg swapping and
// concentration checks. Every trial draws from its own substream keyed by
// (seed, trial), so results do not depend on the number of workers.

#include "rmtlab/ensemble.hpp"
#include "rmtlab/localstats.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace rmtlab {

/// Runs fn(0..count-1) on `jobs` threads. fn must only write to slots it owns.
void parallel_for(std::size_t count, std::size_t jobs, const std::function<void(std::size_t)>& fn);

/// Seed for trial t of an experiment with master seed `seed`.
std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t trial);

enum class TestFunctionKind { bump, gaussian, smooth_step };

/// g((x - center) / width) for one of:
///   bump        e * exp(-1 / (1 - y^2)) on |y| < 1 (peak 1, C-infinity, compact support)
///   gaussian    exp(-y^2 / 2)
///   smooth_step 1 for y <= -1, 0 for y >= 1, C-infinity in between
struct TestFunction {
    TestFunctionKind kind = TestFunctionKind::bump;
    double center = 0.0;
    double width = 1.0;

    double operator()(double x) const;
    /// Numerical sup |d^j g / dx^j| for j = 0..max_order.
    std::vector<double> derivative_bounds(int max_order = 3) const;
};

std::string test_function_name(TestFunctionKind k);
TestFunctionKind parse_test_function(const std::string& name);

/// G(lambda_{i_1}, ..., lambda_{i_k}) = prod_j g_j(lambda_{i_j}) on fine-scale
/// eigenvalues.
struct StatisticSpec {
    std::vector<std::size_t> indices;
    std::vector<TestFunction> functions;
    double eps = 0.1;
    bool bulk = true;

    double evaluate(const std::vector<double>& eigs_fine) const;
    /// Throws DomainError if a bulk-flagged index lies outside [eps n, (1-eps) n].
    void validate(std::size_t n) const;

    /// One function per index, centered at the classical location
    /// n t((i + 1/2) / n).
    static StatisticSpec classical(std::size_t n, std::vector<std::size_t> indices,
                                   TestFunctionKind kind, double width, double eps = 0.1);
};

struct ExperimentConfig {
    EnsembleSpec ensemble_a;
    EnsembleSpec ensemble_b;
    StatisticSpec statistic;
    std::size_t trials = 1;
    std::uint64_t seed = 0;
    std::size_t jobs = 1;
};

struct MeanEstimate {
    double mean = 0.0;
    double stderr_ = 0.0;
};

MeanEstimate estimate_mean(const std::vector<double>& values);

struct CompareReport {
    MeanEstimate a;
    MeanEstimate b;
    double delta = 0.0;
    /// Standard error of the paired difference.
    double delta_stderr = 0.0;
    int match_order_off_diag = 0;
    int match_order_diag = 0;
    std::vector<double> values_a;
    std::vector<double> values_b;
};

/// Samples both ensembles with the same trial seeds (quantile coupling), so
/// identical specs give delta = 0 exactly. Both ensembles must be fine-scale
/// (A_n) specs.
CompareReport four_moment_compare(const ExperimentConfig& config);

struct ScalingPoint {
    std::size_t n = 0;
    double delta = 0.0;
    double delta_stderr = 0.0;
};

struct ScalingReport {
    std::vector<ScalingPoint> points;
    /// Least-squares fit of log|delta| = intercept + slope log n over the
    /// points with delta != 0. Descriptive only; `fitted` is false when fewer
    /// than two such points exist.
    bool fitted = false;
    double slope = 0.0;
    double intercept = 0.0;
};

/// four_moment_compare at each size. The statistic's indices are moved to
/// the same fraction of the spectrum and its functions re-centred at the
/// classical locations; kinds and widths are kept.
ScalingReport four_moment_scaling(const ExperimentConfig& base, const std::vector<std::size_t>& sizes);

/// Fine-scale spectra of `trials` samples from trial seeds trial_seed(seed, offset + t).
std::vector<std::vector<double>> sample_spectra(const EnsembleSpec& spec, std::size_t trials,
                                                std::uint64_t seed, std::size_t jobs,
                                                std::uint64_t offset = 0);

struct SwapStep {
    std::size_t p = 0;
    std::size_t q = 0;
    int match_order = 0;
    MeanEstimate delta;
};

struct SwapReport {
    std::vector<SwapStep> steps;
    /// Mean statistic before any swap and after all swaps.
    MeanEstimate start;
    MeanEstimate end;
    double cumulative_drift = 0.0;
    /// Statistic values per trial at the start and end of the path.
    std::vector<double> start_values;
    std::vector<double> end_values;
};

/// Upper-triangle coordinates in swap order: row-major off-diagonal entries,
/// then the diagonal.
std::vector<std::pair<std::size_t, std::size_t>> default_swap_order(std::size_t n);

/// Walks the swap order replacing entries of the ensemble-A matrix by the
/// coupled ensemble-B entries, evaluating the statistic after every swap.
/// Refuses n > max_n unless max_n is raised.
SwapReport lindeberg_swap_path(const ExperimentConfig& config,
                               const std::vector<std::pair<std::size_t, std::size_t>>& order,
                               std::size_t max_n = 200);

struct ProjectionReport {
    std::size_t n = 0;
    std::size_t d = 0;
    double atom_bound = 0.0;
    MeanEstimate squared_norm;
    std::vector<double> t_grid;
    /// Fraction of trials with | |pi_H X| - sqrt(d) | >= t.
    std::vector<double> exceedance;
    /// 10 exp(-t^2 / (10 K^2)).
    std::vector<double> envelope;
};

/// X has iid real atom entries; H is a fixed d-dimensional subspace drawn
/// from the seed.
ProjectionReport projection_concentration_test(std::size_t n, std::size_t d,
                                               const AtomDistribution& atom, std::size_t trials,
                                               const std::vector<double>& t_grid, std::uint64_t seed,
                                               std::size_t jobs = 1);

struct RandomWalkReport {
    double sigma = 0.0;
    MeanEstimate second_moment;  // E |S_i|^2, averaged over rows
    std::vector<double> t_grid;
    std::vector<double> upper_tail;  // P(|S_i| >= t), pooled over rows
    std::vector<double> gaussian_tail;  // erfc(t / sqrt 2)
    std::vector<double> small_ball;  // P(|S| <= t sqrt(N))
};

/// Rows of `rows` must be orthonormal within 1e-10. S = rows * zeta.
RandomWalkReport random_walk_tail_test(const Eigen::MatrixXd& rows, const AtomDistribution& atom,
                                       std::size_t trials, const std::vector<double>& t_grid,
                                       std::uint64_t seed, std::size_t jobs = 1);

/// N x n matrix with orthonormal rows drawn from the seed.
Eigen::MatrixXd random_orthonormal_rows(std::size_t rows, std::size_t n, std::uint64_t seed);

struct EsdInterval {
    double a = 0.0;
    double b = 0.0;
    double expected_fraction = 0.0;
    /// |N_I / n - int_I rho_sc| per trial.
    std::vector<double> deviation;
    /// deviation / |I| per trial.
    std::vector<double> ratio;
};

/// Uses coarse-scale eigenvalues regardless of the spec's normalization.
std::vector<EsdInterval> esd_concentration_test(const EnsembleSpec& spec,
                                                const std::vector<std::pair<double, double>>& intervals,
                                                std::size_t trials, std::uint64_t seed,
                                                std::size_t jobs = 1);

struct LowerTailReport {
    std::size_t index = 0;
    std::vector<double> c0_grid;
    std::vector<double> probability;
    std::size_t trials = 0;
};

/// Empirical P(lambda_{i+1} - lambda_i <= n^{-c0}) for fine-scale eigenvalues.
LowerTailReport lower_tail_gap_test(const EnsembleSpec& spec, std::size_t i,
                                    const std::vector<double>& c0_grid, std::size_t trials,
                                    std::uint64_t seed, std::size_t jobs = 1);

}  // namespace rmtlab

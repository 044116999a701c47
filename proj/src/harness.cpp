#include "rmtlab/harness.hpp"

#include "rmtlab/errors.hpp"
#include "rmtlab/rng.hpp"
#include "rmtlab/spectral.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

namespace rmtlab {

void parallel_for(std::size_t count, std::size_t jobs, const std::function<void(std::size_t)>& fn) {
    jobs = std::max<std::size_t>(1, std::min(jobs, count));
    if (jobs == 1) {
        for (std::size_t k = 0; k < count; ++k) fn(k);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> workers;
    for (std::size_t w = 0; w < jobs; ++w) {
        workers.emplace_back([&] {
            for (;;) {
                const std::size_t k = next.fetch_add(1);
                if (k >= count) return;
                try {
                    fn(k);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                    next = count;
                    return;
                }
            }
        });
    }
    for (auto& t : workers) t.join();
    if (error) std::rethrow_exception(error);
}

std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t trial) {
    return stream_id({0x747269616cull, seed, trial});
}

namespace {

double transition(double x) { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; }

EnsembleSpec with_normalization(EnsembleSpec spec, Normalization norm) {
    spec.normalization = norm;
    return spec;
}

std::vector<double> fine_spectrum(const EnsembleSpec& fine_spec, std::uint64_t seed) {
    return eigenvalues(sample_matrix(fine_spec, seed));
}

}  // namespace

double TestFunction::operator()(double x) const {
    const double y = (x - center) / width;
    switch (kind) {
        case TestFunctionKind::bump:
            return std::abs(y) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - y * y)) : 0.0;
        case TestFunctionKind::gaussian:
            return std::exp(-0.5 * y * y);
        case TestFunctionKind::smooth_step: {
            if (y <= -1.0) return 1.0;
            if (y >= 1.0) return 0.0;
            const double a = transition(1.0 - y), b = transition(1.0 + y);
            return a / (a + b);
        }
    }
    return 0.0;
}

std::vector<double> TestFunction::derivative_bounds(int max_order) const {
    // Finite differences of increasing order on a fine grid over the
    // support (or +-8 widths for the gaussian).
    const double h = 1e-3 * width;
    const double lo = center - (kind == TestFunctionKind::gaussian ? 8.0 : 1.0) * width;
    const double hi = center + (kind == TestFunctionKind::gaussian ? 8.0 : 1.0) * width;
    const auto count = static_cast<std::size_t>((hi - lo) / h) + 1;
    std::vector<double> values(count);
    for (std::size_t k = 0; k < count; ++k) values[k] = (*this)(lo + h * static_cast<double>(k));
    std::vector<double> bounds;
    for (int order = 0; order <= max_order; ++order) {
        double m = 0.0;
        for (double v : values) m = std::max(m, std::abs(v));
        bounds.push_back(m);
        for (std::size_t k = 0; k + 1 < values.size(); ++k) values[k] = (values[k + 1] - values[k]) / h;
        values.pop_back();
    }
    return bounds;
}

std::string test_function_name(TestFunctionKind k) {
    switch (k) {
        case TestFunctionKind::bump:
            return "bump";
        case TestFunctionKind::gaussian:
            return "gaussian";
        case TestFunctionKind::smooth_step:
            return "smooth_step";
    }
    return "bump";
}

TestFunctionKind parse_test_function(const std::string& name) {
    if (name == "bump") return TestFunctionKind::bump;
    if (name == "gaussian") return TestFunctionKind::gaussian;
    if (name == "smooth_step") return TestFunctionKind::smooth_step;
    throw DomainError("unknown test function '" + name + "'");
}

double StatisticSpec::evaluate(const std::vector<double>& eigs_fine) const {
    double g = 1.0;
    for (std::size_t j = 0; j < indices.size(); ++j) g *= functions[j](eigs_fine.at(indices[j]));
    return g;
}

void StatisticSpec::validate(std::size_t n) const {
    if (indices.empty()) throw DomainError("statistic: no indices");
    if (functions.size() != indices.size())
        throw DomainError("statistic: need one test function per index");
    const double nd = static_cast<double>(n);
    for (std::size_t i : indices) {
        if (i >= n) throw DomainError("statistic: index " + std::to_string(i) + " out of range");
        const double x = static_cast<double>(i);
        if (bulk && (x < eps * nd || x > (1.0 - eps) * nd))
            throw DomainError("statistic: index " + std::to_string(i) + " lies outside the bulk [" +
                              std::to_string(eps * nd) + ", " + std::to_string((1.0 - eps) * nd) + "]");
    }
}

StatisticSpec StatisticSpec::classical(std::size_t n, std::vector<std::size_t> indices,
                                       TestFunctionKind kind, double width, double eps) {
    StatisticSpec s;
    s.eps = eps;
    for (std::size_t i : indices) {
        const double a = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
        s.functions.push_back({kind, static_cast<double>(n) * classical_location(a), width});
    }
    s.indices = std::move(indices);
    return s;
}

MeanEstimate estimate_mean(const std::vector<double>& values) {
    MeanEstimate m;
    if (values.empty()) return m;
    const double n = static_cast<double>(values.size());
    m.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - m.mean) * (v - m.mean);
        m.stderr_ = std::sqrt(ss / (n - 1.0) / n);
    }
    return m;
}

std::vector<std::vector<double>> sample_spectra(const EnsembleSpec& spec, std::size_t trials,
                                                std::uint64_t seed, std::size_t jobs,
                                                std::uint64_t offset) {
    const auto fine = with_normalization(spec, Normalization::fine);
    std::vector<std::vector<double>> out(trials);
    parallel_for(trials, jobs, [&](std::size_t t) {
        out[t] = fine_spectrum(fine, trial_seed(seed, offset + t));
    });
    return out;
}

CompareReport four_moment_compare(const ExperimentConfig& config) {
    if (config.trials < 1) throw DomainError("four_moment_compare: trials must be positive");
    if (config.ensemble_a.n != config.ensemble_b.n)
        throw DomainError("four_moment_compare: ensembles differ in size");
    config.statistic.validate(config.ensemble_a.n);
    const auto fa = with_normalization(config.ensemble_a, Normalization::fine);
    const auto fb = with_normalization(config.ensemble_b, Normalization::fine);
    CompareReport r;
    r.values_a.resize(config.trials);
    r.values_b.resize(config.trials);
    const bool same = fa == fb;
    parallel_for(config.trials, config.jobs, [&](std::size_t t) {
        const auto s = trial_seed(config.seed, t);
        r.values_a[t] = config.statistic.evaluate(fine_spectrum(fa, s));
        r.values_b[t] = same ? r.values_a[t] : config.statistic.evaluate(fine_spectrum(fb, s));
    });
    r.a = estimate_mean(r.values_a);
    r.b = estimate_mean(r.values_b);
    std::vector<double> diff(config.trials);
    for (std::size_t t = 0; t < config.trials; ++t) diff[t] = r.values_a[t] - r.values_b[t];
    const auto d = estimate_mean(diff);
    r.delta = d.mean;
    r.delta_stderr = d.stderr_;
    r.match_order_off_diag = match_order(fa.effective_off_diag(), fb.effective_off_diag());
    r.match_order_diag = match_order(fa.effective_diag(), fb.effective_diag());
    return r;
}

ScalingReport four_moment_scaling(const ExperimentConfig& base, const std::vector<std::size_t>& sizes) {
    if (sizes.empty()) throw DomainError("four_moment_scaling: no sizes");
    const double n0 = static_cast<double>(base.ensemble_a.n);
    ScalingReport rep;
    for (std::size_t m : sizes) {
        ExperimentConfig c = base;
        c.ensemble_a.n = m;
        c.ensemble_b.n = m;
        std::vector<std::size_t> idx;
        for (std::size_t i : base.statistic.indices)
            idx.push_back(static_cast<std::size_t>(std::lround(static_cast<double>(i) * static_cast<double>(m) / n0)));
        const auto& f = base.statistic.functions.front();
        c.statistic = StatisticSpec::classical(m, idx, f.kind, f.width, base.statistic.eps);
        for (std::size_t k = 0; k < idx.size(); ++k) {
            c.statistic.functions[k].kind = base.statistic.functions[k].kind;
            c.statistic.functions[k].width = base.statistic.functions[k].width;
        }
        c.statistic.bulk = base.statistic.bulk;
        const auto r = four_moment_compare(c);
        rep.points.push_back({m, r.delta, r.delta_stderr});
    }
    std::vector<double> x, y;
    for (const auto& p : rep.points) {
        if (p.delta == 0.0) continue;
        x.push_back(std::log(static_cast<double>(p.n)));
        y.push_back(std::log(std::abs(p.delta)));
    }
    if (x.size() >= 2) {
        const double k = static_cast<double>(x.size());
        const double mx = std::accumulate(x.begin(), x.end(), 0.0) / k;
        const double my = std::accumulate(y.begin(), y.end(), 0.0) / k;
        double sxx = 0.0, sxy = 0.0;
        for (std::size_t j = 0; j < x.size(); ++j) {
            sxx += (x[j] - mx) * (x[j] - mx);
            sxy += (x[j] - mx) * (y[j] - my);
        }
        if (sxx > 0.0) {
            rep.fitted = true;
            rep.slope = sxy / sxx;
            rep.intercept = my - rep.slope * mx;
        }
    }
    return rep;
}

std::vector<std::pair<std::size_t, std::size_t>> default_swap_order(std::size_t n) {
    std::vector<std::pair<std::size_t, std::size_t>> order;
    for (std::size_t p = 0; p < n; ++p)
        for (std::size_t q = p + 1; q < n; ++q) order.emplace_back(p, q);
    for (std::size_t p = 0; p < n; ++p) order.emplace_back(p, p);
    return order;
}

SwapReport lindeberg_swap_path(const ExperimentConfig& config,
                               const std::vector<std::pair<std::size_t, std::size_t>>& order,
                               std::size_t max_n) {
    const std::size_t n = config.ensemble_a.n;
    if (config.ensemble_b.n != n) throw DomainError("lindeberg_swap_path: ensembles differ in size");
    if (n > max_n)
        throw DomainError("lindeberg_swap_path: n = " + std::to_string(n) + " exceeds the budget guard " +
                          std::to_string(max_n) + "; raise max_n to override");
    config.statistic.validate(n);
    for (const auto& [p, q] : order)
        if (p > q || q >= n) throw DomainError("lindeberg_swap_path: swap order must list upper-triangle entries");
    const auto fa = with_normalization(config.ensemble_a, Normalization::fine);
    const auto fb = with_normalization(config.ensemble_b, Normalization::fine);
    fa.validate();
    fb.validate();
    const double factor = normalization_factor(fa);
    const auto off_a = fa.effective_off_diag(), dg_a = fa.effective_diag();
    const auto off_b = fb.effective_off_diag(), dg_b = fb.effective_diag();

    std::vector<std::vector<double>> path(config.trials);
    parallel_for(config.trials, config.jobs, [&](std::size_t t) {
        const auto s = trial_seed(config.seed, t);
        HermitianMatrix m = sample_matrix(fa, s);
        auto& values = path[t];
        values.reserve(order.size() + 1);
        values.push_back(config.statistic.evaluate(eigenvalues(m)));
        for (const auto& [p, q] : order) {
            const auto ip = static_cast<Eigen::Index>(p), iq = static_cast<Eigen::Index>(q);
            const auto z = factor * sample_entry(fb, off_b, dg_b, s, p, q);
            if (p == q) {
                m(ip, ip) = z.real();
            } else {
                m(ip, iq) = z;
                m(iq, ip) = std::conj(z);
            }
            values.push_back(config.statistic.evaluate(eigenvalues(m)));
        }
    });

    SwapReport report;
    const int off_order = match_order(off_a, off_b);
    const int diag_order = match_order(dg_a, dg_b);
    std::vector<double> column(config.trials);
    for (std::size_t k = 0; k < order.size(); ++k) {
        for (std::size_t t = 0; t < config.trials; ++t) column[t] = path[t][k + 1] - path[t][k];
        SwapStep step{order[k].first, order[k].second,
                      order[k].first == order[k].second ? diag_order : off_order, estimate_mean(column)};
        report.cumulative_drift += step.delta.mean;
        report.steps.push_back(step);
    }
    for (const auto& v : path) {
        report.start_values.push_back(v.front());
        report.end_values.push_back(v.back());
    }
    report.start = estimate_mean(report.start_values);
    report.end = estimate_mean(report.end_values);
    return report;
}

namespace {

Eigen::MatrixXd gaussian_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed,
                                std::uint64_t tag) {
    CounterStream stream(seed, stream_id({tag}));
    Eigen::MatrixXd g(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index j = 0; j < g.cols(); ++j)
        for (Eigen::Index i = 0; i < g.rows(); ++i) g(i, j) = stream.normal();
    return g;
}

Eigen::MatrixXd orthonormal_columns(const Eigen::MatrixXd& g) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    return qr.householderQ() * Eigen::MatrixXd::Identity(g.rows(), g.cols());
}

Eigen::VectorXd atom_vector(const AtomDistribution& atom, std::size_t n, std::uint64_t seed,
                            std::uint64_t tag) {
    CounterStream stream(seed, stream_id({tag}));
    Eigen::VectorXd x(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = atom.quantile(stream.uniform());
    return x;
}

}  // namespace

Eigen::MatrixXd random_orthonormal_rows(std::size_t rows, std::size_t n, std::uint64_t seed) {
    if (rows > n) throw DomainError("random_orthonormal_rows: need rows <= n");
    return orthonormal_columns(gaussian_matrix(n, rows, seed, 0x726f7773ull)).transpose();
}

ProjectionReport projection_concentration_test(std::size_t n, std::size_t d,
                                               const AtomDistribution& atom, std::size_t trials,
                                               const std::vector<double>& t_grid, std::uint64_t seed,
                                               std::size_t jobs) {
    if (d < 1 || d > n) throw DomainError("projection_concentration_test: need 1 <= d <= n");
    const auto real = atom.real_part();
    ProjectionReport r;
    r.n = n;
    r.d = d;
    r.atom_bound = real.support_bound();
    r.t_grid = t_grid;
    const Eigen::MatrixXd basis = orthonormal_columns(gaussian_matrix(n, d, seed, 0x7375627370ull));
    std::vector<double> sq(trials);
    parallel_for(trials, jobs, [&](std::size_t t) {
        const auto x = atom_vector(real, n, trial_seed(seed, t), 0x70726f6aull);
        sq[t] = (basis.transpose() * x).squaredNorm();
    });
    r.squared_norm = estimate_mean(sq);
    const double root_d = std::sqrt(static_cast<double>(d));
    for (double t : t_grid) {
        std::size_t hits = 0;
        for (double v : sq) hits += std::abs(std::sqrt(v) - root_d) >= t ? 1 : 0;
        r.exceedance.push_back(static_cast<double>(hits) / static_cast<double>(trials));
        const double k = r.atom_bound;
        r.envelope.push_back(std::isfinite(k) ? 10.0 * std::exp(-t * t / (10.0 * k * k)) : 10.0);
    }
    return r;
}

RandomWalkReport random_walk_tail_test(const Eigen::MatrixXd& rows, const AtomDistribution& atom,
                                       std::size_t trials, const std::vector<double>& t_grid,
                                       std::uint64_t seed, std::size_t jobs) {
    const Eigen::MatrixXd gram = rows * rows.transpose();
    if ((gram - Eigen::MatrixXd::Identity(rows.rows(), rows.rows())).cwiseAbs().maxCoeff() > 1e-10)
        throw DomainError("random_walk_tail_test: rows are not orthonormal");
    const auto real = atom.real_part();
    const auto big_n = static_cast<std::size_t>(rows.rows());
    const auto n = static_cast<std::size_t>(rows.cols());
    RandomWalkReport r;
    r.sigma = rows.cwiseAbs().maxCoeff();
    r.t_grid = t_grid;
    std::vector<Eigen::VectorXd> sums(trials);
    parallel_for(trials, jobs, [&](std::size_t t) {
        sums[t] = rows * atom_vector(real, n, trial_seed(seed, t), 0x77616c6bull);
    });
    std::vector<double> second(trials);
    for (std::size_t t = 0; t < trials; ++t) second[t] = sums[t].squaredNorm() / static_cast<double>(big_n);
    r.second_moment = estimate_mean(second);
    const double pooled = static_cast<double>(trials * big_n);
    for (double t : t_grid) {
        std::size_t tail = 0, ball = 0;
        for (const auto& s : sums) {
            for (Eigen::Index i = 0; i < s.size(); ++i) tail += std::abs(s(i)) >= t ? 1 : 0;
            ball += s.norm() <= t * std::sqrt(static_cast<double>(big_n)) ? 1 : 0;
        }
        r.upper_tail.push_back(static_cast<double>(tail) / pooled);
        r.gaussian_tail.push_back(std::erfc(t / std::sqrt(2.0)));
        r.small_ball.push_back(static_cast<double>(ball) / static_cast<double>(trials));
    }
    return r;
}

std::vector<EsdInterval> esd_concentration_test(const EnsembleSpec& spec,
                                                const std::vector<std::pair<double, double>>& intervals,
                                                std::size_t trials, std::uint64_t seed,
                                                std::size_t jobs) {
    const auto coarse = with_normalization(spec, Normalization::coarse);
    std::vector<std::vector<double>> spectra(trials);
    parallel_for(trials, jobs, [&](std::size_t t) {
        spectra[t] = eigenvalues(sample_matrix(coarse, trial_seed(seed, t)));
    });
    const double n = static_cast<double>(spec.n);
    std::vector<EsdInterval> out;
    for (const auto& [a, b] : intervals) {
        EsdInterval e{a, b, semicircle_mass(a, b), {}, {}};
        for (const auto& eigs : spectra) {
            const double dev = std::abs(static_cast<double>(count_interval(eigs, a, b)) / n - e.expected_fraction);
            e.deviation.push_back(dev);
            e.ratio.push_back(dev / (b - a));
        }
        out.push_back(std::move(e));
    }
    return out;
}

LowerTailReport lower_tail_gap_test(const EnsembleSpec& spec, std::size_t i,
                                    const std::vector<double>& c0_grid, std::size_t trials,
                                    std::uint64_t seed, std::size_t jobs) {
    if (i + 1 >= spec.n) throw DomainError("lower_tail_gap_test: index out of range");
    const auto spectra = sample_spectra(spec, trials, seed, jobs);
    LowerTailReport r{i, c0_grid, {}, trials};
    const double n = static_cast<double>(spec.n);
    for (double c0 : c0_grid) {
        const double threshold = std::pow(n, -c0);
        std::size_t hits = 0;
        for (const auto& eigs : spectra) hits += eigs[i + 1] - eigs[i] <= threshold ? 1 : 0;
        r.probability.push_back(static_cast<double>(hits) / static_cast<double>(trials));
    }
    return r;
}

}  // namespace rmtlab

#include "rmtlab/verify.hpp"

#include "rmtlab/config.hpp"
#include "rmtlab/errors.hpp"
#include "rmtlab/harness.hpp"
#include "rmtlab/io.hpp"
#include "rmtlab/localstats.hpp"
#include "rmtlab/perturbation.hpp"
#include "rmtlab/reference.hpp"
#include "rmtlab/rng.hpp"
#include "rmtlab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

namespace rmtlab {

namespace {

std::string num(double x) {
    std::ostringstream s;
    s.precision(6);
    s << x;
    return s.str();
}

CheckResult check(const std::string& name, const std::function<std::string()>& body) {
    // body returns "" on success or a description of the failure.
    try {
        const auto failure = body();
        return {name, failure.empty(), failure.empty() ? "ok" : failure};
    } catch (const std::exception& e) {
        return {name, false, std::string("exception: ") + e.what()};
    }
}

// Seeded generators for the property suite.
struct Gen {
    CounterStream stream;
    explicit Gen(std::uint64_t tag) : stream(20240601, stream_id({0x766572696679ull, tag})) {}

    double uniform(double a, double b) { return a + (b - a) * stream.uniform(); }
    std::size_t size(std::size_t lo, std::size_t hi) {
        return lo + static_cast<std::size_t>(stream.uniform() * static_cast<double>(hi - lo + 1));
    }
    HermitianMatrix hermitian(std::size_t n) {
        HermitianMatrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            m(i, i) = stream.normal();
            for (Eigen::Index j = i + 1; j < m.cols(); ++j) {
                m(i, j) = {stream.normal(), stream.normal()};
                m(j, i) = std::conj(m(i, j));
            }
        }
        return m;
    }
    // Mean-zero, unit-variance discrete law on 3..5 points.
    AtomDistribution discrete_atom() {
        const std::size_t k = size(3, 5);
        std::vector<double> x(k), p(k);
        double total = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            x[j] = uniform(-2.0, 2.0);
            p[j] = uniform(0.1, 1.0);
            total += p[j];
        }
        double mean = 0.0;
        for (std::size_t j = 0; j < k; ++j) mean += x[j] * (p[j] /= total);
        double var = 0.0;
        for (std::size_t j = 0; j < k; ++j) var += p[j] * (x[j] - mean) * (x[j] - mean);
        std::vector<AtomPoint> pts;
        for (std::size_t j = 0; j < k; ++j) pts.push_back({(x[j] - mean) / std::sqrt(var), p[j]});
        return AtomDistribution::discrete(pts);
    }
};

std::vector<CheckResult> trivial_suite() {
    std::vector<CheckResult> out;
    out.push_back(check("sample_gue4_ascending", [] {
        const auto e = eigenvalues(sample_matrix(EnsembleSpec::gue(4), 1));
        if (e.size() != 4) return std::string("expected 4 eigenvalues");
        if (!std::is_sorted(e.begin(), e.end())) return std::string("not ascending");
        return std::string();
    }));
    out.push_back(check("sample_deterministic", [] {
        const auto spec = EnsembleSpec::goe(7);
        return sample_matrix(spec, 5) == sample_matrix(spec, 5) ? "" : std::string("samples differ");
    }));
    out.push_back(check("semicircle_total_mass", [] {
        const double m = semicircle_mass(-2.0, 2.0);
        return std::abs(m - 1.0) <= 1e-14 ? "" : "mass " + num(m);
    }));
    out.push_back(check("fredholm_at_zero", [] {
        const double d = fredholm_det(0.0).value;
        return std::abs(d - 1.0) <= 1e-14 ? "" : "det " + num(d);
    }));
    out.push_back(check("gaussian_matching_identity", [] {
        const auto sol = solve_matching(AtomDistribution::gaussian(), 0.3);
        if (std::abs(sol.alpha3_prime) > 1e-12 || std::abs(sol.alpha4_prime - 3.0) > 1e-12)
            return "alpha' = (" + num(sol.alpha3_prime) + ", " + num(sol.alpha4_prime) + ")";
        return std::string();
    }));
    out.push_back(check("second_variation_two_by_two", [] {
        HermitianMatrix base = HermitianMatrix::Zero(2, 2);
        base(1, 1) = 1.0;
        const auto path = PerturbationPath::entry(base, 0, 1);
        const double lower = second_variation(EigenState::compute(base, 0), path.b1).eigenvector_sum;
        const double upper = second_variation(EigenState::compute(base, 1), path.b1).eigenvector_sum;
        if (std::abs(lower + 2.0) > 1e-12 || std::abs(upper - 2.0) > 1e-12)
            return "got " + num(lower) + ", " + num(upper);
        return std::string();
    }));
    out.push_back(check("interlacing_two_by_two", [] {
        HermitianMatrix a = HermitianMatrix::Zero(2, 2);
        a(0, 1) = a(1, 0) = 1.0;
        const double r = std::max(interlacing_identity_residual(a, 0).residual,
                                  interlacing_identity_residual(a, 1).residual);
        return r <= 1e-14 ? "" : "residual " + num(r);
    }));
    out.push_back(check("swap_identical_zero", [] {
        ExperimentConfig c;
        c.ensemble_a = c.ensemble_b = EnsembleSpec::gue(5, Normalization::fine);
        c.statistic = StatisticSpec::classical(5, {2}, TestFunctionKind::bump, 1.0, 0.2);
        c.trials = 4;
        c.seed = 3;
        const auto r = lindeberg_swap_path(c, default_swap_order(5));
        for (const auto& s : r.steps)
            if (s.delta.mean != 0.0) return std::string("nonzero swap delta");
        return std::string();
    }));
    out.push_back(check("csv_rejects_unknown_major", [] {
        try {
            parse_csv("# rmtlab-csv v2.0\nindex,eigenvalue\n0,1\n");
        } catch (const DomainError&) {
            return std::string();
        }
        return std::string("accepted version 2");
    }));
    out.push_back(check("config_round_trip", [] {
        const auto spec = EnsembleSpec::wigner_hermitian(6, AtomDistribution::two_point(0.7),
                                                         AtomDistribution::gaussian(2.0));
        return ensemble_from_json(ensemble_to_json(spec)) == spec ? "" : std::string("spec changed");
    }));
    return out;
}

std::vector<CheckResult> property_suite() {
    std::vector<CheckResult> out;
    out.push_back(check("ensemble_exactly_hermitian", [] {
        Gen g(1);
        for (int k = 0; k < 20; ++k) {
            const auto atom = g.discrete_atom();
            const std::size_t n = g.size(2, 12);
            const auto spec = k % 2 ? EnsembleSpec::wigner_hermitian(n, atom, atom)
                                    : EnsembleSpec::wigner_symmetric(n, atom, atom);
            const auto m = sample_matrix(spec, static_cast<std::uint64_t>(k));
            if (m != HermitianMatrix(m.adjoint())) return "trial " + std::to_string(k) + " not Hermitian";
        }
        return std::string();
    }));
    out.push_back(check("truncated_moment_solution", [] {
        Gen g(2);
        for (int k = 0; k < 40; ++k) {
            const double a3 = g.uniform(-2.0, 2.0);
            const double a4 = a3 * a3 + 1.0 + g.uniform(0.0, 3.0);
            const auto atom = solve_truncated_moment(a3, a4);
            const double err = std::max({std::abs(atom.raw_moment(1)), std::abs(atom.raw_moment(2) - 1.0),
                                         std::abs(atom.raw_moment(3) - a3), std::abs(atom.raw_moment(4) - a4)});
            if (err > 1e-9) return "moment error " + num(err) + " at (" + num(a3) + ", " + num(a4) + ")";
        }
        return std::string();
    }));
    out.push_back(check("matched_atoms_report_order_four", [] {
        Gen g(3);
        for (int k = 0; k < 10; ++k) {
            const auto atom = g.discrete_atom();
            const auto twin = solve_truncated_moment(atom.alpha3(), atom.alpha4());
            if (match_order(atom, twin) != 4) return std::string("matched pair not of order 4");
        }
        return std::string();
    }));
    out.push_back(check("eigendecomposition_residual", [] {
        Gen g(4);
        for (int k = 0; k < 20; ++k) {
            const auto a = g.hermitian(g.size(2, 15));
            const auto d = eigendecompose(a);
            if (d.residual > 1e-12 * (1.0 + operator_norm(a))) return "residual " + num(d.residual);
        }
        return std::string();
    }));
    out.push_back(check("interval_counts_partition", [] {
        Gen g(5);
        for (int k = 0; k < 20; ++k) {
            const std::size_t n = g.size(5, 40);
            const auto e = eigenvalues(g.hermitian(n));
            const double cut = g.uniform(-3.0, 3.0);
            const auto total = count_interval(e, -1e9, cut) + count_interval(e, cut, 1e9);
            if (total != n) return std::string("counts do not sum to n");
        }
        return std::string();
    }));
    out.push_back(check("stieltjes_matches_resolvent_trace", [] {
        Gen g(6);
        for (int k = 0; k < 10; ++k) {
            const auto a = g.hermitian(g.size(3, 10));
            const std::complex<double> z(g.uniform(-3, 3), g.uniform(0.1, 2));
            const auto id = HermitianMatrix::Identity(a.rows(), a.cols());
            const auto tr = (a - z * id).inverse().trace() / static_cast<double>(a.rows());
            const auto s = stieltjes_empirical(eigenvalues(a), z);
            if (std::abs(s - tr) > 1e-10) return "difference " + num(std::abs(s - tr));
        }
        return std::string();
    }));
    out.push_back(check("statistic_merge_additive", [] {
        Gen g(7);
        const auto edges = linear_edges(-1.0, 1.0, 8);
        EmpiricalStatistic a("x", edges, StatNormalization::pdf), b("x", edges, StatNormalization::pdf);
        for (int k = 0; k < 300; ++k) (k % 3 ? a : b).add(g.uniform(-1.5, 1.5));
        auto merged = a;
        merged.merge(b);
        if (!merged.consistent() || merged.n_samples != 300) return std::string("merge lost samples");
        const auto c = merged.cdf_values();
        if (!std::is_sorted(c.begin(), c.end())) return std::string("cdf not monotone");
        return std::string();
    }));
    out.push_back(check("projector_variation_trace_free", [] {
        Gen g(8);
        for (int k = 0; k < 10; ++k) {
            const auto a = g.hermitian(g.size(3, 8));
            const auto d = g.hermitian(static_cast<std::size_t>(a.rows()));
            const auto s = EigenState::compute(a, static_cast<std::size_t>(k) % static_cast<std::size_t>(a.rows()));
            const auto dp = first_variation_projector(s, d);
            if (std::abs(dp.trace()) > 1e-10) return "trace " + num(std::abs(dp.trace()));
            if ((s.r * s.p).norm() > 1e-10) return std::string("R P != 0");
        }
        return std::string();
    }));
    out.push_back(check("first_variation_matches_fd", [] {
        Gen g(9);
        for (int k = 0; k < 10; ++k) {
            const auto a = g.hermitian(6);
            const auto path = PerturbationPath::entry(a, g.size(0, 5), g.size(0, 5));
            const std::size_t i = g.size(0, 5);
            const double exact = first_variation(EigenState::compute(a, i), path.b1);
            const double fd = fd_lambda(path, i, {1, 0}, 1e-4);
            if (std::abs(exact - fd) > 1e-7 * (1.0 + std::abs(exact)))
                return "mismatch " + num(exact) + " vs " + num(fd);
        }
        return std::string();
    }));
    out.push_back(check("identity_residuals", [] {
        Gen g(10);
        for (int k = 0; k < 20; ++k) {
            const auto a = g.hermitian(g.size(5, 12));
            const std::size_t i = g.size(0, static_cast<std::size_t>(a.rows()) - 1);
            const auto r1 = interlacing_identity_residual(a, i);
            const auto r2 = eigenvector_coordinate_residual(a, i);
            const auto r3 = schur_stieltjes_residual(a, {g.uniform(-2, 2), g.uniform(0.1, 1)});
            for (const auto& r : {r1, r2, r3})
                if (!r.skipped && r.residual > 1e-8) return "residual " + num(r.residual);
        }
        return std::string();
    }));
    out.push_back(check("gaudin_cdf_monotone", [] {
        const auto c = gaudin_cdf(uniform_grid(0.0, 3.0, 0.1));
        if (!std::is_sorted(c.values.begin(), c.values.end())) return std::string("not monotone");
        if (std::abs(c.values.front()) > 1e-10) return std::string("cdf(0) != 0");
        return std::string();
    }));
    out.push_back(check("gue_kernel_n1_normal_density", [] {
        Gen g(11);
        for (int k = 0; k < 20; ++k) {
            const double x = g.uniform(-4.0, 4.0);
            const double expect = std::exp(-x * x / 2.0) / std::sqrt(2.0 * M_PI);
            if (std::abs(gue_kernel(1, x, x) - expect) > 1e-12) return "at x = " + num(x);
        }
        return std::string();
    }));
    out.push_back(check("results_independent_of_jobs", [] {
        ExperimentConfig c;
        c.ensemble_a = EnsembleSpec::gue(20, Normalization::fine);
        c.ensemble_b = EnsembleSpec::wigner_hermitian(20, AtomDistribution::two_point(0.6),
                                                      AtomDistribution::gaussian(), Normalization::fine);
        c.statistic = StatisticSpec::classical(20, {10}, TestFunctionKind::bump, 1.0);
        c.trials = 24;
        c.seed = 11;
        c.jobs = 1;
        const auto serial = four_moment_compare(c);
        c.jobs = 3;
        const auto threaded = four_moment_compare(c);
        return serial.values_a == threaded.values_a && serial.values_b == threaded.values_b
                   ? ""
                   : std::string("values differ between job counts");
    }));
    out.push_back(check("statistic_json_round_trip", [] {
        Gen g(12);
        EmpiricalStatistic s("gap", linear_edges(0.0, 3.0, 12), StatNormalization::cdf);
        for (int k = 0; k < 100; ++k) s.add(g.uniform(-0.5, 3.5));
        s.denominator = 100.0;
        s.metadata["eps"] = 0.25;
        const auto back = statistic_from_json(Json::parse(statistic_to_json(s).dump()));
        return back == s ? "" : std::string("statistic changed");
    }));
    out.push_back(check("csv_round_trip", [] {
        Gen g(13);
        std::vector<double> e;
        for (int k = 0; k < 30; ++k) e.push_back(g.uniform(-1e3, 1e3));
        const auto t = parse_csv(spectrum_to_csv(e));
        for (std::size_t k = 0; k < e.size(); ++k)
            if (t.rows[k][t.column("eigenvalue")] != e[k]) return std::string("value changed");
        return std::string();
    }));
    return out;
}

}  // namespace

std::vector<std::string> suite_names() { return {"trivial", "properties", "all"}; }

std::vector<CheckResult> run_suite(const std::string& suite) {
    if (suite == "trivial") return trivial_suite();
    if (suite == "properties") return property_suite();
    if (suite == "all") {
        auto out = trivial_suite();
        auto more = property_suite();
        out.insert(out.end(), more.begin(), more.end());
        return out;
    }
    throw DomainError("unknown suite '" + suite + "'");
}

}  // namespace rmtlab

#include "rmtlab/config.hpp"
#include "rmtlab/errors.hpp"
#include "rmtlab/harness.hpp"
#include "rmtlab/io.hpp"
#include "rmtlab/localstats.hpp"
#include "rmtlab/quadrature.hpp"
#include "rmtlab/reference.hpp"
#include "rmtlab/spectral.hpp"
#include "rmtlab/verify.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using namespace rmtlab;

namespace {

constexpr int kExitTolerance = 1;
constexpr int kExitUsage = 2;
constexpr int kExitInternal = 3;

struct CommonOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::size_t jobs = 1;
    std::string format = "csv";
};

void add_common(CLI::App* cmd, CommonOptions& o, bool needs_config) {
    auto* c = cmd->add_option("--config", o.config_path, "JSON experiment config");
    if (needs_config) c->required()->check(CLI::ExistingFile);
    cmd->add_option("--seed", o.seed, "master seed (overrides the config's seed)");
    cmd->add_option("--out", o.out, "output directory (default: $RMTLAB_OUT_DIR or .)");
    cmd->add_option("--jobs", o.jobs, "worker threads; never changes results")->check(CLI::PositiveNumber);
    cmd->add_option("--format", o.format, "artifact format")->check(CLI::IsMember({"csv", "json"}));
}

fs::path output_dir(const CommonOptions& o) {
    if (!o.out.empty()) return o.out;
    if (const char* env = std::getenv("RMTLAB_OUT_DIR"); env && *env) return env;
    return ".";
}

Json load_config(const CommonOptions& o) {
    try {
        return Json::parse(read_file(o.config_path));
    } catch (const Json::parse_error& e) {
        throw ConfigError("<config>", std::string("not valid JSON: ") + e.what());
    }
}

std::uint64_t resolve_seed(const CommonOptions& o, const Json& config) {
    if (o.seed) return *o.seed;
    if (config.is_object() && config.contains("seed")) return get_unsigned(config, "seed", "config");
    throw ConfigError("seed", "a seed is required (config key 'seed' or --seed)");
}

std::size_t get_size(const Json& j, const std::string& key, const std::string& path, std::size_t fallback) {
    return j.contains(key) ? static_cast<std::size_t>(get_unsigned(j, key, path)) : fallback;
}

double get_double(const Json& j, const std::string& key, const std::string& path, double fallback) {
    return j.contains(key) ? get_number(j, key, path) : fallback;
}

// Emits artifacts and keeps the manifest in the output directory current.
class Emitter {
public:
    Emitter(fs::path dir, std::string command, const Json& config, std::uint64_t seed)
        : dir_(std::move(dir)) {
        const auto path = dir_ / "manifest.json";
        if (fs::exists(path)) {
            try {
                manifest_ = RunManifest::from_json(Json::parse(read_file(path)));
            } catch (const std::exception&) {
                manifest_ = RunManifest{};
            }
        }
        manifest_.tool_version = kToolVersion;
        manifest_.command = std::move(command);
        manifest_.config_hash = config_hash(config);
        manifest_.seed = seed;
        manifest_.started = utc_timestamp();
    }

    void emit(const std::string& name, const std::string& bytes) {
        write_file(dir_ / name, bytes);
        manifest_.record(name, bytes);
        std::cout << "wrote " << (dir_ / name).string() << "\n";
    }

    ~Emitter() {
        try {
            manifest_.finished = utc_timestamp();
            write_file(dir_ / "manifest.json", manifest_.to_json().dump(2) + "\n");
        } catch (...) {
        }
    }

private:
    fs::path dir_;
    RunManifest manifest_;
};

Json report_envelope(const std::string& command, const Json& config, std::uint64_t seed) {
    return Json{{"tool_version", kToolVersion},
                {"command", command},
                {"config", config},
                {"config_hash", config_hash(config)},
                {"seed", seed}};
}

StatisticSpec parse_statistic(const Json& j, std::size_t n, const std::string& path) {
    reject_unknown_keys(j, {"indices", "function", "width", "eps", "centers", "bulk"}, path);
    const auto& idx = require_key(j, "indices", path);
    if (!idx.is_array() || idx.empty()) throw ConfigError(path + ".indices", "expected a nonempty array");
    std::vector<std::size_t> indices;
    for (const auto& v : idx) {
        if (!v.is_number_unsigned()) throw ConfigError(path + ".indices", "expected nonnegative integers");
        indices.push_back(v.get<std::size_t>());
    }
    TestFunctionKind kind = TestFunctionKind::bump;
    if (j.contains("function")) {
        try {
            kind = parse_test_function(get_string(j, "function", path));
        } catch (const DomainError& e) {
            throw ConfigError(path + ".function", e.what());
        }
    }
    auto spec = StatisticSpec::classical(n, indices, kind, get_double(j, "width", path, 1.0),
                                         get_double(j, "eps", path, 0.1));
    if (j.contains("centers")) {
        const auto c = j.at("centers").get<std::vector<double>>();
        if (c.size() != indices.size()) throw ConfigError(path + ".centers", "need one center per index");
        for (std::size_t k = 0; k < c.size(); ++k) spec.functions[k].center = c[k];
    }
    if (j.contains("bulk")) spec.bulk = j.at("bulk").get<bool>();
    try {
        spec.validate(n);
    } catch (const DomainError& e) {
        throw ConfigError(path + ".indices", e.what());
    }
    return spec;
}

int cmd_sample(const CommonOptions& o) {
    const Json config = load_config(o);
    reject_unknown_keys(config, {"ensemble", "seed", "output"}, "config");
    const auto spec = ensemble_from_json(require_key(config, "ensemble", "config"), "ensemble");
    const auto seed = resolve_seed(o, config);
    const std::string what = config.contains("output") ? get_string(config, "output", "config") : "spectrum";
    if (what != "spectrum" && what != "matrix") throw ConfigError("output", "expected 'spectrum' or 'matrix'");
    const auto m = sample_matrix(spec, seed);
    Emitter emitter(output_dir(o), "sample", config, seed);
    const std::map<std::string, std::string> attrs{{"seed", std::to_string(seed)},
                                                   {"config_hash", config_hash(config)}};
    if (o.format == "csv") {
        emitter.emit(what + ".csv", what == "matrix" ? matrix_to_csv(m, attrs) : spectrum_to_csv(eigenvalues(m), attrs));
    } else {
        auto j = report_envelope("sample", config, seed);
        if (what == "matrix") {
            Json re = Json::array(), im = Json::array();
            for (Eigen::Index r = 0; r < m.rows(); ++r) {
                std::vector<double> a, b;
                for (Eigen::Index c = 0; c < m.cols(); ++c) {
                    a.push_back(m(r, c).real());
                    b.push_back(m(r, c).imag());
                }
                re.push_back(a);
                im.push_back(b);
            }
            j["matrix"] = Json{{"re", re}, {"im", im}};
        } else {
            j["eigenvalues"] = eigenvalues(m);
        }
        emitter.emit(what + ".json", j.dump(2) + "\n");
    }
    return 0;
}

int cmd_stats(const CommonOptions& o) {
    const Json config = load_config(o);
    reject_unknown_keys(config, {"ensemble", "ensemble_b", "seed", "trials", "statistic"}, "config");
    const auto spec = ensemble_from_json(require_key(config, "ensemble", "config"), "ensemble");
    const auto seed = resolve_seed(o, config);
    const auto trials = get_size(config, "trials", "config", 1);
    const auto& st = require_key(config, "statistic", "config");
    const std::string kind = get_string(st, "kind", "statistic");
    Emitter emitter(output_dir(o), "stats", config, seed);
    auto envelope = report_envelope("stats", config, seed);
    envelope["trials"] = trials;

    if (kind == "four_moment_scaling") {
        Json rest = st;
        rest.erase("kind");
        rest.erase("sizes");
        const auto& sz = require_key(st, "sizes", "statistic");
        if (!sz.is_array() || sz.empty()) throw ConfigError("statistic.sizes", "expected a nonempty array");
        std::vector<std::size_t> sizes;
        for (const auto& v : sz) {
            if (!v.is_number_unsigned() || v.get<std::size_t>() < 2)
                throw ConfigError("statistic.sizes", "expected integers >= 2");
            sizes.push_back(v.get<std::size_t>());
        }
        ExperimentConfig ec;
        ec.ensemble_a = spec;
        ec.ensemble_b = ensemble_from_json(require_key(config, "ensemble_b", "config"), "ensemble_b");
        ec.statistic = parse_statistic(rest, spec.n, "statistic");
        ec.trials = trials;
        ec.seed = seed;
        ec.jobs = o.jobs;
        const auto r = four_moment_scaling(ec, sizes);
        if (o.format == "json") {
            envelope["report"] = scaling_report_to_json(r);
            emitter.emit("four_moment_scaling.json", envelope.dump(2) + "\n");
        } else {
            emitter.emit("four_moment_scaling.csv", scaling_report_to_csv(r));
        }
        return 0;
    }

    if (kind == "four_moment") {
        Json rest = st;
        rest.erase("kind");
        ExperimentConfig ec;
        ec.ensemble_a = spec;
        ec.ensemble_b = ensemble_from_json(require_key(config, "ensemble_b", "config"), "ensemble_b");
        ec.statistic = parse_statistic(rest, spec.n, "statistic");
        ec.trials = trials;
        ec.seed = seed;
        ec.jobs = o.jobs;
        const auto r = four_moment_compare(ec);
        envelope["report"] = compare_report_to_json(r);
        if (o.format == "json") {
            emitter.emit("four_moment.json", envelope.dump(2) + "\n");
        } else {
            std::ostringstream out;
            out << "# rmtlab-csv v" << kCsvMajorVersion << ".0\n# kind: four_moment\n"
                << "# delta: " << format_double(r.delta) << "\n# delta_stderr: " << format_double(r.delta_stderr)
                << "\ntrial,value_a,value_b\n";
            for (std::size_t t = 0; t < trials; ++t)
                out << t << "," << format_double(r.values_a[t]) << "," << format_double(r.values_b[t]) << "\n";
            emitter.emit("four_moment.csv", out.str());
        }
        return 0;
    }

    const auto spectra = sample_spectra(spec, trials, seed, o.jobs);
    EmpiricalStatistic stat;
    if (kind == "gap") {
        reject_unknown_keys(st, {"kind", "eps", "s_max", "bins"}, "statistic");
        const double eps = get_double(st, "eps", "statistic", 0.25);
        stat = EmpiricalStatistic("normalized_bulk_gaps",
                                  linear_edges(0.0, get_double(st, "s_max", "statistic", 4.0),
                                               get_size(st, "bins", "statistic", 40)),
                                  StatNormalization::pdf);
        std::vector<double> all;
        for (const auto& e : spectra) {
            for (double g : normalized_bulk_gaps(e, eps)) {
                stat.add(g);
                all.push_back(g);
            }
        }
        stat.denominator = static_cast<double>(stat.n_samples);
        stat.metadata = {{"eps", eps},
                         {"ks_gaudin", all.empty() ? 1.0 : ks_distance(all, [](double s) { return gaudin_cdf_at(s); })}};
    } else if (kind == "localized_gap") {
        reject_unknown_keys(st, {"kind", "u", "l_n", "s_max", "bins"}, "statistic");
        const auto grid = linear_edges(0.0, get_double(st, "s_max", "statistic", 4.0),
                                       get_size(st, "bins", "statistic", 40));
        const double u = get_double(st, "u", "statistic", 0.0);
        const double l = get_double(st, "l_n", "statistic", 10.0);
        for (std::size_t t = 0; t < spectra.size(); ++t) {
            auto s = localized_gap_distribution(spectra[t], u, l, grid);
            if (t == 0) stat = s;
            else stat.merge(s);
        }
    } else if (kind == "correlation") {
        reject_unknown_keys(st, {"kind", "u", "k", "window", "bins"}, "statistic");
        stat = correlation_estimate(spectra, get_double(st, "u", "statistic", 0.0),
                                    static_cast<int>(get_size(st, "k", "statistic", 2)),
                                    get_double(st, "window", "statistic", 2.0), get_size(st, "bins", "statistic", 20));
    } else {
        throw ConfigError("statistic.kind", "unknown statistic kind '" + kind + "'");
    }
    if (o.format == "csv") {
        emitter.emit(kind + ".csv", statistic_to_csv(stat));
    } else {
        envelope["statistic"] = statistic_to_json(stat);
        emitter.emit(kind + ".json", envelope.dump(2) + "\n");
    }
    return 0;
}

struct ReferenceOptions {
    std::string curve;
    double from = 0.0;
    double to = 4.0;
    double step = 0.01;
    int n = 5;
};

int cmd_reference(const CommonOptions& o, const ReferenceOptions& r) {
    if (!(r.step > 0.0) || !(r.to > r.from)) throw ConfigError("grid", "need from < to and step > 0");
    const auto grid = uniform_grid(r.from, r.to, r.step);
    ReferenceCurve curve;
    bool ok = true;
    std::string failure;
    if (r.curve == "gaudin") {
        curve = gaudin_density(grid);
        // Emitted tables covering [0, 4] must carry unit mass.
        if (r.from <= 0.0 && r.to >= 4.0) {
            const double mass = simpson(curve.values, r.step);
            curve.metadata["mass"] = mass;
            if (std::abs(mass - 1.0) > 1e-4) {
                ok = false;
                failure = "gaudin mass " + format_double(mass);
            }
        }
    } else if (r.curve == "gaudin_cdf") {
        curve = gaudin_cdf(grid);
    } else if (r.curve == "sine_det") {
        curve.name = "sine_det";
        curve.grid = grid;
        for (double s : grid) curve.values.push_back(gap_probability(s));
    } else if (r.curve == "lsv_cdf") {
        curve = lsv_cdf(grid);
    } else if (r.curve == "lsv_gap") {
        curve = lsv_gap_probability(grid);
    } else if (r.curve == "semicircle") {
        curve.name = "semicircle";
        curve.grid = grid;
        for (double x : grid) curve.values.push_back(rho_sc(x));
    } else if (r.curve == "gue_kernel") {
        curve.name = "gue_kernel_diagonal";
        curve.grid = grid;
        curve.metadata["n"] = r.n;
        for (double x : grid) curve.values.push_back(gue_kernel(r.n, x, x));
    } else {
        throw ConfigError("curve", "unknown reference curve '" + r.curve + "'");
    }
    const Json config{{"curve", r.curve}, {"from", r.from}, {"to", r.to}, {"step", r.step}, {"n", r.n}};
    Emitter emitter(output_dir(o), "reference", config, 0);
    if (o.format == "csv") {
        emitter.emit(r.curve + ".csv", curve_to_csv(curve));
    } else {
        auto j = report_envelope("reference", config, 0);
        j["curve"] = curve_to_json(curve);
        emitter.emit(r.curve + ".json", j.dump(2) + "\n");
    }
    if (!ok) {
        std::cout << Json{{"failures", {failure}}}.dump() << "\n";
        return kExitTolerance;
    }
    return 0;
}

int cmd_swap(const CommonOptions& o, std::size_t max_n) {
    const Json config = load_config(o);
    reject_unknown_keys(config, {"ensemble_a", "ensemble_b", "seed", "trials", "statistic"}, "config");
    ExperimentConfig ec;
    ec.ensemble_a = ensemble_from_json(require_key(config, "ensemble_a", "config"), "ensemble_a");
    ec.ensemble_b = ensemble_from_json(require_key(config, "ensemble_b", "config"), "ensemble_b");
    ec.statistic = parse_statistic(require_key(config, "statistic", "config"), ec.ensemble_a.n, "statistic");
    ec.trials = get_size(config, "trials", "config", 1);
    ec.seed = resolve_seed(o, config);
    ec.jobs = o.jobs;
    const auto report = lindeberg_swap_path(ec, default_swap_order(ec.ensemble_a.n), max_n);
    Emitter emitter(output_dir(o), "swap", config, ec.seed);
    if (o.format == "csv") {
        emitter.emit("swap.csv", swap_report_to_csv(report));
    } else {
        auto j = report_envelope("swap", config, ec.seed);
        j["trials"] = ec.trials;
        j["report"] = swap_report_to_json(report);
        emitter.emit("swap.json", j.dump(2) + "\n");
    }
    return 0;
}

int cmd_verify(const std::string& suite) {
    const auto results = run_suite(suite);
    Json failures = Json::array();
    for (const auto& r : results) {
        std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << "  " << r.detail << "\n";
        if (!r.passed) failures.push_back(Json{{"check", r.name}, {"detail", r.detail}});
    }
    std::cout << Json{{"suite", suite}, {"checks", results.size()}, {"failures", failures}}.dump() << "\n";
    return failures.empty() ? 0 : kExitTolerance;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Random matrix universality toolkit"};
    app.require_subcommand(1);
    CommonOptions common;

    auto* sample = app.add_subcommand("sample", "sample one matrix and write its spectrum or entries");
    add_common(sample, common, true);

    auto* stats = app.add_subcommand("stats", "Monte Carlo local statistics");
    add_common(stats, common, true);

    ReferenceOptions ref;
    auto* reference = app.add_subcommand("reference", "tabulate a reference curve");
    add_common(reference, common, false);
    reference->add_option("curve", ref.curve, "gaudin, gaudin_cdf, sine_det, lsv_cdf, lsv_gap, semicircle, gue_kernel")
        ->required();
    reference->add_option("--from", ref.from, "grid start");
    reference->add_option("--to", ref.to, "grid end");
    reference->add_option("--step", ref.step, "grid step");
    reference->add_option("--n", ref.n, "matrix size for gue_kernel");

    std::size_t max_n = 200;
    auto* swap = app.add_subcommand("swap", "Lindeberg swap path between two ensembles");
    add_common(swap, common, true);
    swap->add_option("--max-n", max_n, "raise the n <= 200 budget guard");

    std::string suite = "all";
    auto* verify = app.add_subcommand("verify", "run built-in invariant suites");
    verify->add_option("suite", suite, "trivial, properties or all")->check(CLI::IsMember(suite_names()));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (*sample) return cmd_sample(common);
        if (*stats) return cmd_stats(common);
        if (*reference) return cmd_reference(common, ref);
        if (*swap) return cmd_swap(common, max_n);
        if (*verify) return cmd_verify(suite);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const DomainError& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInternal;
    }
    return kExitUsage;
}

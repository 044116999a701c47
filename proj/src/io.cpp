#include "rmtlab/io.hpp"

#include "rmtlab/errors.hpp"

#include <openssl/evp.h>

#include <charconv>
#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>

namespace rmtlab {

std::string format_double(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

namespace {

std::string normalization_label(StatNormalization n) {
    switch (n) {
        case StatNormalization::pdf:
            return "pdf";
        case StatNormalization::cdf:
            return "cdf";
        case StatNormalization::raw:
            return "raw";
    }
    return "raw";
}

StatNormalization parse_normalization_label(const std::string& s) {
    if (s == "pdf") return StatNormalization::pdf;
    if (s == "cdf") return StatNormalization::cdf;
    if (s == "raw") return StatNormalization::raw;
    throw DomainError("unknown statistic normalization '" + s + "'");
}

void write_preamble(std::ostringstream& out, const std::map<std::string, std::string>& attributes) {
    out << "# rmtlab-csv v" << kCsvMajorVersion << ".0\n";
    for (const auto& [k, v] : attributes) out << "# " << k << ": " << v << "\n";
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_cell(const std::string& cell) {
    const std::string t = trim(cell);
    if (t == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (t == "inf") return std::numeric_limits<double>::infinity();
    if (t == "-inf") return -std::numeric_limits<double>::infinity();
    double v = 0.0;
    auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc() || res.ptr != t.data() + t.size())
        throw DomainError("csv: cannot parse number '" + t + "'");
    return v;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    std::istringstream in(line);
    while (std::getline(in, cur, sep)) parts.push_back(trim(cur));
    return parts;
}

}  // namespace

std::size_t CsvTable::column(const std::string& name) const {
    for (std::size_t k = 0; k < columns.size(); ++k)
        if (columns[k] == name) return k;
    throw DomainError("csv: no column '" + name + "'");
}

CsvTable parse_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    CsvTable table;
    if (!std::getline(in, line)) throw DomainError("csv: empty input");
    const std::string magic = "# rmtlab-csv v";
    if (line.rfind(magic, 0) != 0) throw DomainError("csv: missing version line");
    const std::string version = trim(line.substr(magic.size()));
    auto res = std::from_chars(version.data(), version.data() + version.size(), table.major_version);
    if (res.ec != std::errc()) throw DomainError("csv: bad version '" + version + "'");
    if (table.major_version != kCsvMajorVersion)
        throw DomainError("csv: unsupported major version " + std::to_string(table.major_version));
    bool header = false;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        if (line[0] == '#') {
            const auto colon = line.find(':');
            if (colon != std::string::npos)
                table.attributes[trim(line.substr(1, colon - 1))] = trim(line.substr(colon + 1));
            continue;
        }
        if (!header) {
            table.columns = split(line, ',');
            header = true;
            continue;
        }
        std::vector<double> row;
        for (const auto& cell : split(line, ',')) row.push_back(parse_cell(cell));
        if (row.size() != table.columns.size()) throw DomainError("csv: ragged row");
        table.rows.push_back(std::move(row));
    }
    if (!header) throw DomainError("csv: missing header row");
    return table;
}

std::string statistic_to_csv(const EmpiricalStatistic& stat) {
    std::map<std::string, std::string> attrs{
        {"kind", "statistic"},
        {"name", stat.name},
        {"dimension", std::to_string(stat.dimension)},
        {"normalization", normalization_label(stat.normalization)},
        {"n_samples", std::to_string(stat.n_samples)},
        {"denominator", format_double(stat.denominator)},
        {"underflow", std::to_string(stat.underflow)},
        {"overflow", std::to_string(stat.overflow)},
        {"low_statistics", stat.low_statistics ? "true" : "false"},
    };
    for (const auto& [k, v] : stat.metadata) attrs["meta." + k] = format_double(v);
    std::ostringstream out;
    write_preamble(out, attrs);
    if (stat.dimension == 1) {
        out << "bin_left,bin_right,count,density\n";
    } else {
        for (int a = 0; a < stat.dimension; ++a)
            out << "bin_left_" << a << ",bin_right_" << a << ",";
        out << "count,density\n";
    }
    const auto density = stat.density_values();
    const std::size_t per_axis = stat.bin_edges.size() > 0 ? stat.bin_edges.size() - 1 : 0;
    for (std::size_t b = 0; b < stat.counts.size(); ++b) {
        std::vector<std::size_t> idx(static_cast<std::size_t>(stat.dimension));
        std::size_t rest = b;
        for (int a = stat.dimension - 1; a >= 0; --a) {
            idx[static_cast<std::size_t>(a)] = rest % per_axis;
            rest /= per_axis;
        }
        for (std::size_t k : idx)
            out << format_double(stat.bin_edges[k]) << "," << format_double(stat.bin_edges[k + 1]) << ",";
        out << stat.counts[b] << "," << format_double(density[b]) << "\n";
    }
    return out.str();
}

std::string curve_to_csv(const ReferenceCurve& curve) {
    std::map<std::string, std::string> attrs{{"kind", "reference"}, {"name", curve.name}};
    for (const auto& [k, v] : curve.metadata) attrs["meta." + k] = format_double(v);
    std::ostringstream out;
    write_preamble(out, attrs);
    out << "bin_left,bin_right,count,density\n";
    for (std::size_t k = 0; k < curve.grid.size(); ++k) {
        const std::string x = format_double(curve.grid[k]);
        out << x << "," << x << ",0," << format_double(curve.values[k]) << "\n";
    }
    return out.str();
}

std::string spectrum_to_csv(const std::vector<double>& eigs,
                            const std::map<std::string, std::string>& attributes) {
    auto attrs = attributes;
    attrs["kind"] = "spectrum";
    std::ostringstream out;
    write_preamble(out, attrs);
    out << "index,eigenvalue\n";
    for (std::size_t k = 0; k < eigs.size(); ++k) out << k << "," << format_double(eigs[k]) << "\n";
    return out.str();
}

std::string matrix_to_csv(const HermitianMatrix& m, const std::map<std::string, std::string>& attributes) {
    auto attrs = attributes;
    attrs["kind"] = "matrix";
    std::ostringstream out;
    write_preamble(out, attrs);
    out << "row,col,re,im\n";
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            out << i << "," << j << "," << format_double(m(i, j).real()) << ","
                << format_double(m(i, j).imag()) << "\n";
    return out.str();
}

std::string swap_report_to_csv(const SwapReport& report) {
    std::ostringstream out;
    write_preamble(out, {{"kind", "swap"},
                         {"cumulative_drift", format_double(report.cumulative_drift)},
                         {"start_mean", format_double(report.start.mean)},
                         {"end_mean", format_double(report.end.mean)}});
    out << "step,p,q,match_order,delta_mean,delta_stderr\n";
    for (std::size_t k = 0; k < report.steps.size(); ++k) {
        const auto& s = report.steps[k];
        out << k << "," << s.p << "," << s.q << "," << s.match_order << ","
            << format_double(s.delta.mean) << "," << format_double(s.delta.stderr_) << "\n";
    }
    return out.str();
}

std::string scaling_report_to_csv(const ScalingReport& report) {
    std::ostringstream out;
    std::map<std::string, std::string> attrs{{"kind", "four_moment_scaling"},
                                             {"fitted", report.fitted ? "true" : "false"}};
    if (report.fitted) {
        attrs["slope"] = format_double(report.slope);
        attrs["intercept"] = format_double(report.intercept);
    }
    write_preamble(out, attrs);
    out << "n,delta,delta_stderr\n";
    for (const auto& p : report.points)
        out << p.n << "," << format_double(p.delta) << "," << format_double(p.delta_stderr) << "\n";
    return out.str();
}

Json statistic_to_json(const EmpiricalStatistic& stat) {
    Json j;
    j["name"] = stat.name;
    j["bin_edges"] = stat.bin_edges;
    j["counts"] = stat.counts;
    j["underflow"] = stat.underflow;
    j["overflow"] = stat.overflow;
    j["n_samples"] = stat.n_samples;
    j["denominator"] = stat.denominator;
    j["dimension"] = stat.dimension;
    j["normalization"] = normalization_label(stat.normalization);
    j["low_statistics"] = stat.low_statistics;
    j["metadata"] = stat.metadata;
    j["density"] = stat.density_values();
    return j;
}

EmpiricalStatistic statistic_from_json(const Json& j) {
    const std::string path = "statistic";
    EmpiricalStatistic s(get_string(j, "name", path),
                         require_key(j, "bin_edges", path).get<std::vector<double>>(),
                         parse_normalization_label(get_string(j, "normalization", path)),
                         static_cast<int>(get_unsigned(j, "dimension", path)));
    s.counts = require_key(j, "counts", path).get<std::vector<std::uint64_t>>();
    s.underflow = get_unsigned(j, "underflow", path);
    s.overflow = get_unsigned(j, "overflow", path);
    s.n_samples = get_unsigned(j, "n_samples", path);
    s.denominator = get_number(j, "denominator", path);
    s.low_statistics = require_key(j, "low_statistics", path).get<bool>();
    s.metadata = require_key(j, "metadata", path).get<std::map<std::string, double>>();
    return s;
}

Json curve_to_json(const ReferenceCurve& curve) {
    return Json{{"name", curve.name},
                {"grid", curve.grid},
                {"values", curve.values},
                {"metadata", curve.metadata}};
}

Json mean_to_json(const MeanEstimate& m) { return Json{{"mean", m.mean}, {"stderr", m.stderr_}}; }

Json compare_report_to_json(const CompareReport& r) {
    return Json{{"a", mean_to_json(r.a)},
                {"b", mean_to_json(r.b)},
                {"delta", r.delta},
                {"delta_stderr", r.delta_stderr},
                {"match_order_off_diag", r.match_order_off_diag},
                {"match_order_diag", r.match_order_diag},
                {"values_a", r.values_a},
                {"values_b", r.values_b}};
}

Json scaling_report_to_json(const ScalingReport& r) {
    Json points = Json::array();
    for (const auto& p : r.points)
        points.push_back(Json{{"n", p.n}, {"delta", p.delta}, {"delta_stderr", p.delta_stderr}});
    Json j{{"points", points}, {"fitted", r.fitted}};
    if (r.fitted) {
        j["slope"] = r.slope;
        j["intercept"] = r.intercept;
    }
    return j;
}

Json swap_report_to_json(const SwapReport& r) {
    Json steps = Json::array();
    for (const auto& s : r.steps)
        steps.push_back(Json{{"p", s.p}, {"q", s.q}, {"match_order", s.match_order},
                             {"delta", mean_to_json(s.delta)}});
    return Json{{"steps", steps},
                {"start", mean_to_json(r.start)},
                {"end", mean_to_json(r.end)},
                {"cumulative_drift", r.cumulative_drift},
                {"start_values", r.start_values},
                {"end_values", r.end_values}};
}

std::string sha256_hex(const std::string& bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw Error("sha256: digest failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int k = 0; k < len; ++k) {
        out += hex[digest[k] >> 4];
        out += hex[digest[k] & 15];
    }
    return out;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << bytes;
    if (!out) throw Error("write failed for '" + path.string() + "'");
}

void RunManifest::record(const std::string& path, const std::string& bytes) {
    const auto digest = sha256_hex(bytes);
    for (auto& a : artifacts) {
        if (a.path == path) {
            a.sha256 = digest;
            return;
        }
    }
    artifacts.push_back({path, digest});
}

Json RunManifest::to_json() const {
    Json list = Json::array();
    for (const auto& a : artifacts) list.push_back(Json{{"path", a.path}, {"sha256", a.sha256}});
    return Json{{"tool_version", tool_version}, {"command", command}, {"config_hash", config_hash},
                {"seed", seed}, {"started", started}, {"finished", finished}, {"artifacts", list}};
}

RunManifest RunManifest::from_json(const Json& j) {
    const std::string path = "manifest";
    RunManifest m;
    m.tool_version = get_string(j, "tool_version", path);
    m.command = get_string(j, "command", path);
    m.config_hash = get_string(j, "config_hash", path);
    m.seed = get_unsigned(j, "seed", path);
    m.started = get_string(j, "started", path);
    m.finished = get_string(j, "finished", path);
    for (const auto& a : require_key(j, "artifacts", path))
        m.artifacts.push_back({get_string(a, "path", path + ".artifacts"),
                               get_string(a, "sha256", path + ".artifacts")});
    return m;
}

std::string config_hash(const Json& config) { return sha256_hex(canonical_dump(config)); }

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace rmtlab

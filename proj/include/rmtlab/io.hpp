#pragma once

// Versioned CSV and JSON artifacts, SHA-256 checksums and the run manifest.
// Doubles are written in shortest round-trip form, so identical values give
// identical bytes.

#include "rmtlab/config.hpp"
#include "rmtlab/harness.hpp"
#include "rmtlab/localstats.hpp"
#include "rmtlab/reference.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace rmtlab {

inline constexpr int kCsvMajorVersion = 1;
inline constexpr const char* kToolVersion = "1.0.0";

std::string format_double(double x);

/// A parsed CSV artifact: `# key: value` comment lines, one header row and
/// numeric rows.
struct CsvTable {
    int major_version = 0;
    std::map<std::string, std::string> attributes;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    std::size_t column(const std::string& name) const;
};

/// Throws DomainError when the version line is missing or the major version
/// is not kCsvMajorVersion.
CsvTable parse_csv(const std::string& text);

/// Columns bin_left,bin_right,count,density (one left/right pair per axis for
/// multi-dimensional statistics, suffixed _0, _1, ...).
std::string statistic_to_csv(const EmpiricalStatistic& stat);
/// Same columns; each grid point is a zero-width bin carrying the curve value
/// in the density column.
std::string curve_to_csv(const ReferenceCurve& curve);
/// Columns index,eigenvalue.
std::string spectrum_to_csv(const std::vector<double>& eigs,
                            const std::map<std::string, std::string>& attributes = {});
/// Columns row,col,re,im over the full matrix in row-major order.
std::string matrix_to_csv(const HermitianMatrix& m,
                          const std::map<std::string, std::string>& attributes = {});
/// Columns step,p,q,match_order,delta_mean,delta_stderr.
std::string swap_report_to_csv(const SwapReport& report);
/// Columns n,delta,delta_stderr; the fit goes in the attributes.
std::string scaling_report_to_csv(const ScalingReport& report);

Json statistic_to_json(const EmpiricalStatistic& stat);
EmpiricalStatistic statistic_from_json(const Json& j);
Json curve_to_json(const ReferenceCurve& curve);
Json mean_to_json(const MeanEstimate& m);
Json compare_report_to_json(const CompareReport& r);
Json swap_report_to_json(const SwapReport& r);
Json scaling_report_to_json(const ScalingReport& r);

std::string sha256_hex(const std::string& bytes);
std::string read_file(const std::filesystem::path& path);
/// Writes the bytes, creating parent directories.
void write_file(const std::filesystem::path& path, const std::string& bytes);

struct ArtifactRecord {
    std::string path;
    std::string sha256;
};

struct RunManifest {
    std::string tool_version = kToolVersion;
    std::string command;
    std::string config_hash;
    std::uint64_t seed = 0;
    std::string started;
    std::string finished;
    std::vector<ArtifactRecord> artifacts;

    /// Adds or replaces the record for `path` (relative to the output dir).
    void record(const std::string& path, const std::string& bytes);
    Json to_json() const;
    static RunManifest from_json(const Json& j);
};

/// SHA-256 of the canonical dump of a config, so key order does not matter.
std::string config_hash(const Json& config);
/// Current UTC time as YYYY-MM-DDTHH:MM:SSZ.
std::string utc_timestamp();

}  // namespace rmtlab

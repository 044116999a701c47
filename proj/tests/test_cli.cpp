#include "rmtlab/io.hpp"

#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <string>
#include <sys/wait.h>

using namespace rmtlab;
namespace fs = std::filesystem;

namespace {

struct RunResult {
    int status = -1;
    std::string output;
};

RunResult run(const std::string& args) {
    const std::string cmd = std::string(RMTLAB_CLI_PATH) + " " + args + " 2>&1";
    RunResult r;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    char buf[4096];
    std::size_t got;
    while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) r.output.append(buf, got);
    const int raw = pclose(pipe);
    r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    return r;
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("rmtlab_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

fs::path write_config(const fs::path& dir, const std::string& json) {
    const auto p = dir / "config.json";
    write_file(p, json);
    return p;
}

}  // namespace

TEST_CASE("cli sample") {
    const auto dir = scratch("sample");
    const auto cfg = write_config(dir, R"({"ensemble": {"preset": "gue", "n": 4}, "seed": 1})");
    auto r = run("sample --config " + cfg.string() + " --out " + (dir / "a").string());
    REQUIRE(r.status == 0);
    const auto first = read_file(dir / "a" / "spectrum.csv");
    const auto t = parse_csv(first);
    REQUIRE(t.rows.size() == 4);
    for (std::size_t k = 1; k < 4; ++k) CHECK(t.rows[k - 1][1] <= t.rows[k][1]);

    r = run("sample --config " + cfg.string() + " --out " + (dir / "b").string() + " --jobs 4");
    REQUIRE(r.status == 0);
    CHECK(read_file(dir / "b" / "spectrum.csv") == first);

    const auto manifest = RunManifest::from_json(Json::parse(read_file(dir / "a" / "manifest.json")));
    CHECK(manifest.seed == 1);
    REQUIRE(manifest.artifacts.size() == 1);
    CHECK(manifest.artifacts[0].sha256 == sha256_hex(first));

    r = run("sample --config " + cfg.string() + " --seed 2 --out " + (dir / "c").string());
    CHECK(r.status == 0);
    CHECK(read_file(dir / "c" / "spectrum.csv") != first);
}

TEST_CASE("cli config errors name the key") {
    const auto dir = scratch("errors");
    auto cfg = write_config(dir, R"({"ensemble": {"n": 4, "symmetry": "hermitian", "off_diag": {"kind": "cauchy"}, "diag": {"kind": "gaussian"}}, "seed": 1})");
    auto r = run("sample --config " + cfg.string() + " --out " + dir.string());
    CHECK(r.status == 2);
    CHECK(r.output.find("ensemble.off_diag.kind") != std::string::npos);

    cfg = write_config(dir, R"({"ensemble": {"preset": "gue", "n": 4}})");
    r = run("sample --config " + cfg.string() + " --out " + dir.string());
    CHECK(r.status == 2);
    CHECK(r.output.find("seed") != std::string::npos);

    r = run("frobnicate");
    CHECK(r.status == 2);
}

TEST_CASE("cli reference checks the gaudin mass") {
    const auto dir = scratch("reference");
    auto r = run("reference gaudin --from 0 --to 4 --step 0.01 --out " + dir.string());
    REQUIRE(r.status == 0);
    const auto t = parse_csv(read_file(dir / "gaudin.csv"));
    CHECK(t.rows.size() == 401);
    r = run("reference gaudin --from 0 --to 4 --step 0.01 --format json --out " + dir.string());
    REQUIRE(r.status == 0);
    const auto j = Json::parse(read_file(dir / "gaudin.json"));
    CHECK(j.contains("tool_version"));
}

TEST_CASE("cli verify and swap") {
    auto r = run("verify trivial");
    CHECK(r.status == 0);
    CHECK(r.output.find("FAIL") == std::string::npos);

    const auto dir = scratch("swap");
    const auto cfg = write_config(dir, R"({"ensemble_a": {"preset": "gue", "n": 6, "normalization": "fine"},
        "ensemble_b": {"preset": "gue", "n": 6, "normalization": "fine"},
        "seed": 3, "trials": 5, "statistic": {"indices": [3], "function": "gaussian", "width": 2}})");
    r = run("swap --config " + cfg.string() + " --out " + dir.string());
    REQUIRE(r.status == 0);
    const auto t = parse_csv(read_file(dir / "swap.csv"));
    CHECK(t.rows.size() == 21);
    for (const auto& row : t.rows) CHECK(row[t.column("delta_mean")] == 0.0);
}

TEST_CASE("cli stats is independent of the worker count") {
    const auto dir = scratch("stats");
    const auto cfg = write_config(dir, R"({"ensemble": {"preset": "gue", "n": 60, "normalization": "fine"},
        "seed": 4, "trials": 12, "statistic": {"kind": "gap"}})");
    for (const char* fmt : {"csv", "json"}) {
        auto r1 = run(std::string("stats --format ") + fmt + " --config " + cfg.string() + " --jobs 1 --out " + (dir / "j1").string());
        auto r3 = run(std::string("stats --format ") + fmt + " --config " + cfg.string() + " --jobs 3 --out " + (dir / "j3").string());
        REQUIRE(r1.status == 0);
        REQUIRE(r3.status == 0);
        const std::string name = std::string("gap.") + fmt;
        CHECK(read_file(dir / "j1" / name) == read_file(dir / "j3" / name));
    }
}

TEST_CASE("cli four moment scaling") {
    const auto dir = scratch("scaling");
    const auto cfg = write_config(dir, R"({"ensemble": {"preset": "gue", "n": 40, "normalization": "fine"},
        "ensemble_b": {"preset": "gue", "n": 40, "normalization": "fine", "truncation": 1.5},
        "seed": 6, "trials": 10, "statistic": {"kind": "four_moment_scaling", "sizes": [20, 40], "indices": [20]}})");
    auto r = run("stats --config " + cfg.string() + " --out " + dir.string());
    REQUIRE(r.status == 0);
    const auto t = parse_csv(read_file(dir / "four_moment_scaling.csv"));
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[0][t.column("n")] == 20.0);
    CHECK(t.attributes.at("fitted") == "true");

    const auto bad = write_config(dir, R"({"ensemble": {"preset": "gue", "n": 40, "normalization": "fine"},
        "ensemble_b": {"preset": "gue", "n": 40, "normalization": "fine"},
        "seed": 6, "trials": 10, "statistic": {"kind": "four_moment_scaling", "sizes": [1], "indices": [20]}})");
    r = run("stats --config " + bad.string() + " --out " + dir.string());
    CHECK(r.status == 2);
    CHECK(r.output.find("statistic.sizes") != std::string::npos);
}

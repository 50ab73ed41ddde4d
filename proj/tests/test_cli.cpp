#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "blockdyn/cli.hpp"

using namespace blockdyn;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TempDir {
    fs::path path;

    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("blockdyn-test-" + tag);
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }

    std::string str() const { return path.string(); }
};

json read_json(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    json j;
    in >> j;
    return j;
}

std::string read_text(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("spectrum subcommand writes the certified report") {
    TempDir dir("spectrum");
    const int code = cli::dispatch({"blockdyn", "spectrum", "--benchmark", "quad-offdiag",
                                    "--method", "bcgd", "--alpha", "0.5", "--at", "0,0",
                                    "--out", dir.str()});
    CHECK(code == 0);

    const json report = read_json(dir.path / "spectral_report.json");
    CHECK(report["maxMagnitude"].get<double>() == doctest::Approx(1.640388).epsilon(1e-4));
    CHECK(report["verdicts"]["isStrictSaddle"].get<bool>());
    CHECK(report["verdicts"]["hasUnstableEigenvalue"].get<bool>());

    const json manifest = read_json(dir.path / "manifest.json");
    CHECK(manifest["command"] == "spectrum");
    CHECK(manifest.contains("version"));
    CHECK(manifest.contains("timestamp"));
    CHECK(manifest.contains("config"));
    CHECK(manifest.contains("argv"));
}

TEST_CASE("solve subcommand runs to tolerance and exports the trace") {
    TempDir dir("solve");
    const int code = cli::dispatch({"blockdyn", "solve", "--benchmark", "quartic-sep",
                                    "--method", "bmd", "--alpha", "0.05", "--x0", "1.5,0.5",
                                    "--out", dir.str(), "--inner-trace"});
    CHECK(code == 0);

    const std::string trace = read_text(dir.path / "trace.csv");
    CHECK(trace.rfind("iteration,f,grad_norm,x_0,x_1", 0) == 0);

    // The last line carries the terminal point near (1, 0).
    std::string last;
    std::stringstream ss(trace);
    for (std::string line; std::getline(ss, line);)
        if (!line.empty()) last = line;
    std::stringstream fields(last);
    std::string field;
    std::vector<double> values;
    while (std::getline(fields, field, ',')) values.push_back(std::stod(field));
    REQUIRE(values.size() == 5);
    CHECK(std::abs(values[3] - 1.0) < 1e-4);
    CHECK(std::abs(values[4]) < 1e-4);

    const std::string inner = read_text(dir.path / "inner_trace.csv");
    CHECK(inner.rfind("iteration,block,x_0,x_1", 0) == 0);
}

TEST_CASE("invalid alpha is a configuration error with the violated bound") {
    TempDir dir("badalpha");
    // 1/L for quartic-sep is about 0.0826.
    const int code = cli::dispatch({"blockdyn", "solve", "--benchmark", "quartic-sep",
                                    "--method", "bcgd", "--alpha", "0.5", "--x0", "1,1",
                                    "--out", dir.str()});
    CHECK(code == 2);
}

TEST_CASE("verify-lemmas rejects zero trials and runs a small suite") {
    CHECK(cli::dispatch({"blockdyn", "verify-lemmas", "--trials", "0"}) == 2);

    TempDir dir("lemmas");
    const int code = cli::dispatch(
        {"blockdyn", "verify-lemmas", "--trials", "15", "--seed", "3", "--out", dir.str()});
    CHECK(code == 0);
    const json doc = read_json(dir.path / "lemmas.json");
    CHECK(doc["allPassed"].get<bool>());
    CHECK(doc["lemmas"].size() == 6);
}

TEST_CASE("montecarlo exits cleanly when no trial hits the saddle") {
    TempDir dir("mc");
    const int code = cli::dispatch({"blockdyn", "montecarlo", "--benchmark", "quartic-sep",
                                    "--method", "bcgd", "--alpha", "0.05", "--trials", "25",
                                    "--seed", "42", "--out", dir.str()});
    CHECK(code == 0);
    const json summary = read_json(dir.path / "summary.json");
    CHECK(summary["counts"].value("strict-saddle", 0) == 0);
    CHECK(summary["counts"]["local-min"].get<int>() == 25);
    CHECK(read_text(dir.path / "trials.csv").find("local-min") != std::string::npos);
}

TEST_CASE("probe subcommand") {
    TempDir dir("probe");
    const int code = cli::dispatch({"blockdyn", "probe", "--benchmark", "quartic-sep",
                                    "--method", "pbcd", "--alpha", "0.05", "--out",
                                    dir.str()});
    CHECK(code == 0);
    CHECK(read_json(dir.path / "probe.json")["passed"].get<bool>());

    // Inadmissible step size is a configuration error, not a failed verdict.
    CHECK(cli::dispatch({"blockdyn", "probe", "--benchmark", "quartic-sep", "--method",
                         "bcgd", "--alpha", "0.5", "--out", dir.str()}) == 2);
    // A benchmark without a known invariant set cannot be probed.
    CHECK(cli::dispatch({"blockdyn", "probe", "--benchmark", "quad-offdiag", "--method",
                         "bcgd", "--alpha", "0.5", "--out", dir.str()}) == 2);
}

TEST_CASE("usage errors exit with code 2") {
    CHECK(cli::dispatch({"blockdyn", "--version"}) == 0);
    CHECK(cli::dispatch({"blockdyn"}) == 2);
    CHECK(cli::dispatch({"blockdyn", "not-a-command"}) == 2);
    CHECK(cli::dispatch({"blockdyn", "solve", "--method", "bcgd"}) == 2);  // missing args
    TempDir dir("unknown");
    CHECK(cli::dispatch({"blockdyn", "spectrum", "--benchmark", "nope", "--method", "bcgd",
                         "--alpha", "0.1", "--at", "0,0", "--out", dir.str()}) == 2);
}

TEST_CASE("external function specs reproduce built-in behavior") {
    const std::string spec_text = R"({
        "name": "offdiag-poly",
        "dimension": 2,
        "partition": [1, 1],
        "body": {"kind": "polynomial",
                 "terms": [{"coeff": 1.0, "exponents": [1, 1]}]},
        "lipschitz": 1.0
    })";
    const auto fn = cli::parse_function_spec(spec_text);
    CHECK(fn.id == "offdiag-poly");
    CHECK(fn.objective.quadratic);
    CHECK(fn.objective.value({2.0, 3.0}) == doctest::Approx(6.0));

    TempDir dir("fnspec");
    const fs::path spec_path = dir.path / "fn.json";
    std::ofstream(spec_path) << spec_text;

    const int code = cli::dispatch({"blockdyn", "spectrum", "--function-spec",
                                    spec_path.string(), "--method", "bcgd", "--alpha", "0.5",
                                    "--at", "0,0", "--out", (dir.path / "out").string()});
    CHECK(code == 0);
    const json report = read_json(dir.path / "out" / "spectral_report.json");
    CHECK(report["maxMagnitude"].get<double>() == doctest::Approx(1.640388).epsilon(1e-4));

    CHECK_THROWS(cli::parse_function_spec("{\"name\": \"broken\"}"));
    CHECK(cli::dispatch({"blockdyn", "spectrum", "--function-spec", "/no/such/file.json",
                         "--method", "bcgd", "--alpha", "0.5", "--at", "0,0", "--out",
                         (dir.path / "out2").string()}) == 2);

    // Builtin alias with a coarser partition.
    const auto alias = cli::parse_function_spec(R"({
        "name": "coarse", "body": {"kind": "builtin", "id": "quad-3block"},
        "partition": [3, 3]
    })");
    CHECK(alias.partition.block_count() == 2);
    CHECK(alias.objective.dimension == 6);
}

TEST_CASE("installed binary round trip") {
    TempDir dir("binary");
    std::ostringstream cmd;
    cmd << BLOCKDYN_CLI_PATH << " spectrum --benchmark quad-offdiag --method pbcd"
        << " --alpha 0.5 --at 0,0 --out " << dir.str() << " > " << (dir.path / "stdout.txt");
    const int status = std::system(cmd.str().c_str());
    CHECK(WIFEXITED(status));
    CHECK(WEXITSTATUS(status) == 0);
    const json report = read_json(dir.path / "spectral_report.json");
    CHECK(report["method"] == "pbcd");
    CHECK(report["auxiliary"]["xiCertificate"].get<bool>());
}

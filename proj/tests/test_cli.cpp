#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string out;
};

RunResult run_cli(const std::string& args) {
    const std::string cmd = std::string(DELAYSTAB_CLI_PATH) + " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    RunResult res;
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) res.out.append(buf, n);
    const int status = pclose(pipe);
    if (WIFEXITED(status)) res.exit_code = WEXITSTATUS(status);
    return res;
}

const fs::path& fixture_dir() {
    static const fs::path dir = [] {
        const fs::path d = fs::temp_directory_path() / "delaystab-cli-fixtures";
        fs::create_directories(d);
        auto put = [&](const char* name, const char* body) {
            std::ofstream(d / name) << body;
        };
        put("dirac1.json", R"({"kind":"dirac","delay":1.0})");
        put("two_delay.json",
            R"({"kind":"discrete","atoms":[{"delay":0.2,"weight":0.37},{"delay":2.0,"weight":0.63}]})");
        put("expo.json", R"({"kind":"exponential","mean":1.0})");
        put("gamma2.json", R"({"kind":"gamma","order":2,"mean":1.0})");
        put("bad.json", R"({"kind":"dirac","delay":1.0,"bogus":3})");
        put("history.csv", "t,x\n-1,1\n0,1\n");
        return d;
    }();
    return dir;
}

std::string fixture(const char* name) { return (fixture_dir() / name).string(); }

json last_json_line(const std::string& out) {
    // The payload is the last nonempty line (--emit-spec may prepend one).
    std::size_t end = out.find_last_not_of("\r\n");
    REQUIRE(end != std::string::npos);
    std::size_t start = out.find_last_of('\n', end);
    start = (start == std::string::npos) ? 0 : start + 1;
    return json::parse(out.substr(start, end - start + 1));
}

}  // namespace

TEST_CASE("check: delay-independent regions") {
    auto res = run_cli("check --a 2 --b 1");
    CHECK(res.exit_code == 0);
    auto j = last_json_line(res.out);
    CHECK(j["region"] == "Stable");
    CHECK(j["status"] == "Stable");

    res = run_cli("check --a -2 --b 1");
    CHECK(res.exit_code == 1);
    CHECK(last_json_line(res.out)["status"] == "Unstable");
}

TEST_CASE("check: mean-only queries use the universal bound") {
    auto res = run_cli("check --a 0 --b 1 --E 1.2");
    CHECK(res.exit_code == 0);
    CHECK(last_json_line(res.out)["status"] == "Stable");

    res = run_cli("check --a 0 --b 1 --E 2.0");
    CHECK(res.exit_code == 2);
    auto j = last_json_line(res.out);
    CHECK(j["status"] == "DistributionDependent");
    CHECK(j["bound_used"].get<double>() == doctest::Approx(M_PI_2));
}

TEST_CASE("check: distribution queries run the census") {
    auto res = run_cli("check --a 0 --b 1 --dist " + fixture("dirac1.json") + " --E 3.2");
    CHECK(res.exit_code == 1);
    auto j = last_json_line(res.out);
    CHECK(j["status"] == "Unstable");
    CHECK(j["unstable_count"] == 2);
    CHECK(j["witness"]["leading_root"][0].get<double>() > 0.0);

    res = run_cli("check --a 0 --b 1 --dist " + fixture("dirac1.json"));
    CHECK(res.exit_code == 0);
    CHECK(last_json_line(res.out)["status"] == "Stable");

    // Exactly on the single-delay boundary.
    res = run_cli("check --a 0 --b 1 --dist " + fixture("dirac1.json") +
                  " --E 1.5707963267948966");
    CHECK(res.exit_code == 2);
    j = last_json_line(res.out);
    CHECK(j["status"] == "Marginal");
    CHECK(j["witness"]["omega_s"].get<double>() == doctest::Approx(1.0));
}

TEST_CASE("check: guidance when neither --E nor --dist is given") {
    const auto res = run_cli("check --a 0.5 --b 1");
    CHECK(res.exit_code == 2);
    const auto j = last_json_line(res.out);
    CHECK(j["status"] == "DistributionDependent");
    const std::string note = j["note"];
    CHECK(note.find("--dist") != std::string::npos);
}

TEST_CASE("malformed inputs map to the documented exit codes") {
    auto res = run_cli("check --a 0 --b 1 --dist " + fixture("bad.json"));
    CHECK(res.exit_code == 64);

    res = run_cli("check --a 0.5");  // missing required --b
    CHECK(res.exit_code >= 100);

    res = run_cli("frobnicate");
    CHECK(res.exit_code >= 100);
}

TEST_CASE("emit-spec prepends the canonical distribution") {
    const auto res = run_cli("check --a 0 --b 1 --dist " + fixture("two_delay.json") +
                             " --emit-spec");
    CHECK(res.exit_code == 0);
    const auto first = json::parse(res.out.substr(0, res.out.find('\n')));
    CHECK(first["kind"] == "discrete");
    REQUIRE(first["atoms"].size() == 2);
    CHECK(first["atoms"][1]["weight"].get<double>() == doctest::Approx(0.63));
}

TEST_CASE("extremal: worked two-delay example") {
    const auto res = run_cli("extremal --a -0.1 --dist " + fixture("two_delay.json"));
    CHECK(res.exit_code == 0);
    const auto j = last_json_line(res.out);
    CHECK(j["mean"].get<double>() == doctest::Approx(1.334).epsilon(1e-12));
    CHECK(j["p1_star"].get<double>() + j["p2_star"].get<double>() ==
          doctest::Approx(1.0).epsilon(1e-12));
    CHECK(j["tau2_star"].get<double>() == doctest::Approx(1.7556).epsilon(1e-3));
    CHECK(j["p2_star"].get<double>() * j["tau2_star"].get<double>() ==
          doctest::Approx(1.334).epsilon(1e-10));
    REQUIRE(!j["steps"].empty());
    for (const auto& step : j["steps"])
        CHECK(step["mean"].get<double>() == doctest::Approx(1.334).epsilon(1e-10));
}

TEST_CASE("extremal: single dirac is already extremal") {
    const auto res = run_cli("extremal --a 0 --dist " + fixture("dirac1.json"));
    CHECK(res.exit_code == 0);
    const auto j = last_json_line(res.out);
    CHECK(j["p2_star"].get<double>() == doctest::Approx(1.0));
    CHECK(j["tau2_star"].get<double>() == doctest::Approx(1.0));
}

TEST_CASE("extremal: no crossing reports stability and exits cleanly") {
    const auto res = run_cli("extremal --a 0.5 --dist " + fixture("two_delay.json"));
    CHECK(res.exit_code == 0);
    const auto j = last_json_line(res.out);
    CHECK(j["no_crossing"] == true);
}

TEST_CASE("boundary: csv and dat outputs") {
    const auto csv = (fixture_dir() / "boundary_out.csv").string();
    auto res = run_cli("boundary --dist " + fixture("expo.json") +
                       " --u-max 20 --points 100 --out " + csv);
    CHECK(res.exit_code == 0);
    std::ifstream in(csv);
    REQUIRE(in.good());
    std::string header;
    std::getline(in, header);
    CHECK(header == "u,a,E,branch_id,kind");
    std::size_t rows = 0;
    double u, a, E;
    char c1, c2, c3;
    int id;
    std::string rest;
    for (std::string line; std::getline(in, line);) {
        if (line.empty()) continue;
        std::istringstream row(line);
        REQUIRE((row >> u >> c1 >> a >> c2 >> E >> c3 >> id));
        if (line.find("HopfCurve") != std::string::npos && a < -1e-6)
            CHECK(E == doctest::Approx(-1.0 / a).epsilon(1e-9));
        ++rows;
    }
    CHECK(rows >= 100);

    const auto dat = (fixture_dir() / "boundary_out.dat").string();
    res = run_cli("boundary --dist " + fixture("expo.json") +
                  " --u-max 20 --points 50 --out " + dat);
    CHECK(res.exit_code == 0);
    std::ifstream din(dat);
    std::getline(din, header);
    CHECK(header == "u a E branch_id kind");
}

TEST_CASE("chart: raster over a tiny grid") {
    const auto res = run_cli("chart --dist " + fixture("gamma2.json") +
                             " --a-range 0:0:1 --E-range 3.9:4.1:2");
    CHECK(res.exit_code == 0);
    std::istringstream is(res.out);
    std::string line;
    std::getline(is, line);
    CHECK(line == "a,E,status,unstable_count");
    std::getline(is, line);
    CHECK(line.find("Stable") != std::string::npos);
    std::getline(is, line);
    CHECK(line.find("Unstable") != std::string::npos);
}

TEST_CASE("simulate: decay rate of the unit delay") {
    const auto trace_file = (fixture_dir() / "trace_out.csv").string();
    const auto res = run_cli("simulate --a 0 --b 1 --dist " + fixture("dirac1.json") +
                             " --T 60 --out " + trace_file);
    CHECK(res.exit_code == 0);
    const auto j = last_json_line(res.out);
    CHECK(j["decay_rate"].get<double>() == doctest::Approx(-0.31813).epsilon(2e-3));
    CHECK(j["oscillation_frequency"].get<double>() == doctest::Approx(1.33724).epsilon(2e-3));
    CHECK(j["samples"].get<int>() == 12001);

    std::ifstream in(trace_file);
    REQUIRE(in.good());
    std::string header;
    std::getline(in, header);
    CHECK(header == "t,x");
}

TEST_CASE("simulate: explicit history file") {
    const auto res = run_cli("simulate --a 0 --b 1 --dist " + fixture("dirac1.json") +
                             " --T 60 --history " + fixture("history.csv"));
    CHECK(res.exit_code == 0);
    const auto j = last_json_line(res.out);
    CHECK(j["decay_rate"].get<double>() == doctest::Approx(-0.31813).epsilon(5e-3));
}

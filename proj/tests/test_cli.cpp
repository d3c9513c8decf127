// SPDX-License-Identifier: MIT
//
// Drives the installed command line binary as a subprocess. The path comes
// from QDD_CLI_PATH (set by the test harness), so the suite exercises the
// exact artifact a user would run: flag handling, exit codes, JSON and CSV
// shapes, and byte-for-byte reproducibility.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

using json = nlohmann::json;

namespace {

struct RunResult {
    int code = -1;
    std::string out;
};

RunResult run_cli(const std::string& args, bool merge_stderr = true) {
    const char* exe = std::getenv("QDD_CLI_PATH");
    REQUIRE(exe != nullptr);
    const std::string cmd = std::string(exe) + " " + args +
                            (merge_stderr ? " 2>&1" : " 2>/dev/null");
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    RunResult r;
    char buf[4096];
    size_t got;
    while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0)
        r.out.append(buf, got);
    const int rc = pclose(pipe);
    r.code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    return r;
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) out.push_back(line);
    return out;
}

}  // namespace

TEST_CASE("solve-bayes emits the documented JSON document") {
    const RunResult r = run_cli("solve-bayes --preset case1", false);
    REQUIRE(r.code == 0);
    const json doc = json::parse(r.out);

    CHECK(doc["command"] == "solve-bayes");
    const json& model = doc["inputs"]["model"];
    CHECK(model["lambda0"] == 2.0);
    CHECK(model["lambda1"] == 1.0);
    CHECK(model["lambda"] == 0.1);
    CHECK(model["c"] == 1.0);
    CHECK(model["pi0"] == 0.1);

    const json& outs = doc["outputs"];
    CHECK(outs["case"] == "I");
    CHECK(double(outs["B_bar"]) == doctest::Approx(1.0 / 11.0).epsilon(1e-14));
    CHECK(double(outs["B_hat"]) == doctest::Approx(0.2).epsilon(1e-14));
    CHECK(double(outs["B_star"]) ==
          doctest::Approx(1.0 / 11.0).epsilon(1e-12));
    CHECK(outs["smooth_fit"] == true);
    CHECK(double(outs["left_derivative"]) ==
          doctest::Approx(-1.0).epsilon(1e-8));
    // pi0 = 0.1 already lies in the stop region, so V(pi0) = 1 - pi0
    CHECK(double(outs["V_at_pi0"]) == doctest::Approx(0.9).epsilon(1e-12));
    CHECK(std::abs(double(doc["diagnostics"]["boundary_fit_residual"])) <
          1e-10);
}

TEST_CASE("solve-bayes reports the broken-fit and downward-jump regimes") {
    const RunResult r3 = run_cli("solve-bayes --preset case3", false);
    REQUIRE(r3.code == 0);
    const json d3 = json::parse(r3.out);
    CHECK(d3["outputs"]["case"] == "III");
    CHECK(d3["outputs"]["smooth_fit"] == false);
    CHECK(double(d3["outputs"]["B_star"]) ==
          doctest::Approx(0.67356163425393711).epsilon(1e-10));
    CHECK(double(d3["outputs"]["left_derivative"]) ==
          doctest::Approx(-0.55090727844796220).epsilon(1e-6));

    const RunResult r4 = run_cli("solve-bayes --preset case4", false);
    REQUIRE(r4.code == 0);
    const json d4 = json::parse(r4.out);
    CHECK(d4["outputs"]["case"] == "IV");
    CHECK(d4["outputs"]["B_hat"].is_null());
    CHECK(d4["outputs"]["smooth_fit"] == true);
    CHECK(double(d4["outputs"]["B_star"]) ==
          doctest::Approx(0.10447915016026775).epsilon(1e-10));
}

TEST_CASE("model flags are validated with denominated errors") {
    const RunResult missing =
        run_cli("solve-bayes --lambda0 2 --lambda1 1 --lambda 0.1");
    CHECK(missing.code == 1);
    CHECK(missing.out.find("missing required flag --c") != std::string::npos);

    const RunResult both =
        run_cli("solve-bayes --preset case1 --config nowhere.json");
    CHECK(both.code == 1);
    CHECK(both.out.find("not both") != std::string::npos);

    const RunResult unknown = run_cli("solve-bayes --preset case9");
    CHECK(unknown.code == 1);
    CHECK(unknown.out.find("case9") != std::string::npos);

    const RunResult invalid =
        run_cli("solve-bayes --lambda0 2 --lambda1 2 --lambda 0.1 --c 1");
    CHECK(invalid.code == 1);  // lambda0 == lambda1 is rejected by the model

    const RunResult help = run_cli("--help");
    CHECK(help.code == 0);
}

TEST_CASE("value-function writes the pi,value grid") {
    const RunResult r = run_cli("value-function --preset case1 --grid 5",
                                false);
    REQUIRE(r.code == 0);
    const auto ls = lines(r.out);
    REQUIRE(ls.size() == 6);
    CHECK(ls[0] == "pi,value");
    double pi = -1, v = -1;
    REQUIRE(std::sscanf(ls[1].c_str(), "%lf,%lf", &pi, &v) == 2);
    CHECK(pi == 0.0);
    CHECK(v == doctest::Approx(0.94747772731436904).epsilon(1e-11));
    REQUIRE(std::sscanf(ls[5].c_str(), "%lf,%lf", &pi, &v) == 2);
    CHECK(pi == 1.0);
    CHECK(v == 0.0);

    CHECK(run_cli("value-function --preset case1 --grid 1").code == 1);
}

TEST_CASE("--out redirects the grid to a file") {
    const std::string path = "cli_grid_out.csv";
    std::remove(path.c_str());
    const RunResult r = run_cli(
        "value-function --preset case2 --grid 3 --out " + path, false);
    REQUIRE(r.code == 0);
    CHECK(r.out.empty());
    std::ifstream in(path);
    REQUIRE(in.good());
    std::string header;
    std::getline(in, header);
    CHECK(header == "pi,value");
    std::remove(path.c_str());
}

TEST_CASE("solve-variational reports directive and threshold") {
    const RunResult r = run_cli("solve-variational --preset case1 --alpha 0.2",
                                false);
    REQUIRE(r.code == 0);
    const json doc = json::parse(r.out);
    CHECK(doc["command"] == "solve-variational");
    CHECK(double(doc["inputs"]["alpha"]) == 0.2);
    CHECK(doc["outputs"]["directive"] == "threshold");
    CHECK(double(doc["outputs"]["B_alpha"]) ==
          doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(double(doc["outputs"]["achieved_u"]) ==
          doctest::Approx(0.2).epsilon(1e-9));
    CHECK(std::abs(double(doc["diagnostics"]["alpha_residual"])) < 1e-8);

    const RunResult slack =
        run_cli("solve-variational --preset case1 --alpha 0.95", false);
    REQUIRE(slack.code == 0);
    const json sdoc = json::parse(slack.out);
    CHECK(sdoc["outputs"]["directive"] == "stop_immediately");
    CHECK(sdoc["outputs"]["B_alpha"].is_null());
    CHECK(double(sdoc["outputs"]["achieved_u"]) ==
          doctest::Approx(0.9).epsilon(1e-14));

    const RunResult missing = run_cli("solve-variational --preset case1");
    CHECK(missing.code == 1);
    CHECK(missing.out.find("missing required flag --alpha") !=
          std::string::npos);

    CHECK(run_cli("solve-variational --preset case1 --alpha 0").code == 1);
}

TEST_CASE("simulate emits both risk estimates and both false-alarm rates") {
    const RunResult r = run_cli(
        "simulate --preset case1 --B 0.5 --n-paths 2000 --seed 3 --threads 2",
        false);
    REQUIRE(r.code == 0);
    const json doc = json::parse(r.out);
    CHECK(doc["command"] == "simulate");
    CHECK(double(doc["inputs"]["B"]) == 0.5);
    CHECK(std::int64_t(doc["outputs"]["n"]) == 2000);

    const double dm = doc["outputs"]["risk_direct"]["mean"];
    const double ds = doc["outputs"]["risk_direct"]["std_err"];
    const double im = doc["outputs"]["risk_identity"]["mean"];
    const double is = doc["outputs"]["risk_identity"]["std_err"];
    CHECK(ds > 0.0);
    CHECK(is > 0.0);
    CHECK(std::abs(dm - im) < 3.0 * std::sqrt(ds * ds + is * is));
    CHECK(double(doc["outputs"]["false_alarm"]["rao_blackwell"]["mean"]) >
          0.0);
    CHECK(double(doc["outputs"]["false_alarm"]["indicator"]["mean"]) >= 0.0);

    const RunResult missing = run_cli("simulate --preset case1");
    CHECK(missing.code == 1);
    CHECK(missing.out.find("--B") != std::string::npos);

    const RunResult conflict =
        run_cli("simulate --preset case1 --B 0.5 --use-bstar");
    CHECK(conflict.code == 1);
    CHECK(conflict.out.find("not both") != std::string::npos);
}

TEST_CASE("simulate --use-bstar runs at the solved threshold") {
    const RunResult r = run_cli(
        "simulate --preset case4 --use-bstar --n-paths 500 --seed 2", false);
    REQUIRE(r.code == 0);
    const json doc = json::parse(r.out);
    CHECK(double(doc["outputs"]["B"]) ==
          doctest::Approx(0.10447915016026775).epsilon(1e-10));
}

TEST_CASE("simulate --sweep writes the documented CSV") {
    const RunResult r = run_cli(
        "simulate --preset case1 --sweep 0.3:0.7:3 --n-paths 1000 --seed 5",
        false);
    REQUIRE(r.code == 0);
    const auto ls = lines(r.out);
    REQUIRE(ls.size() == 4);
    CHECK(ls[0] == "B,risk_mean,risk_stderr,fa_mean,fa_stderr,n,capped_fraction");
    const double want_b[3] = {0.3, 0.5, 0.7};
    double prev_fa = 1.0;
    for (int i = 0; i < 3; ++i) {
        double b = 0, rm = 0, rs = 0, fm = 0, fs = 0, cf = 0;
        long long n = 0;
        REQUIRE(std::sscanf(ls[size_t(i) + 1].c_str(),
                            "%lf,%lf,%lf,%lf,%lf,%lld,%lf", &b, &rm, &rs, &fm,
                            &fs, &n, &cf) == 7);
        CHECK(b == doctest::Approx(want_b[i]).epsilon(1e-15));
        CHECK(n == 1000);
        CHECK(rs > 0.0);
        CHECK(fm < prev_fa);  // common random numbers order the sweeps
        prev_fa = fm;
    }

    CHECK(run_cli("simulate --preset case1 --sweep nonsense").code == 1);
}

TEST_CASE("verify passes on presets and fails loudly on bad names") {
    const RunResult r = run_cli(
        "verify --preset case1 --seed 3 --n-paths 2000 --threads 1", false);
    CHECK(r.code == 0);
    CHECK(r.out.find("== case1 ==") != std::string::npos);
    CHECK(r.out.find("all checks passed") != std::string::npos);
    CHECK(r.out.find("FAIL") == std::string::npos);

    const RunResult bad = run_cli("verify --preset nope");
    CHECK(bad.code == 1);
    CHECK(bad.out.find("nope") != std::string::npos);
}

TEST_CASE("repeated runs are byte-identical, independent of threads") {
    const std::string sim =
        "simulate --preset case1 --B 0.4 --n-paths 3000 --seed 11 --threads ";
    const RunResult a = run_cli(sim + "1", false);
    const RunResult b = run_cli(sim + "1", false);
    const RunResult c = run_cli(sim + "3", false);
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(a.out == c.out);

    const std::string ver =
        "verify --preset case2 --seed 3 --n-paths 2000 --threads ";
    const RunResult va = run_cli(ver + "1", false);
    const RunResult vb = run_cli(ver + "4", false);
    REQUIRE(va.code == 0);
    CHECK(va.out == vb.out);
}

TEST_CASE("inputs.model round-trips through --config") {
    const RunResult first = run_cli("solve-bayes --preset case2", false);
    REQUIRE(first.code == 0);
    const json doc = json::parse(first.out);

    const std::string path = "cli_roundtrip.json";
    {
        std::ofstream out(path);
        REQUIRE(out.good());
        out << doc["inputs"]["model"].dump(2) << "\n";
    }
    const RunResult second = run_cli("solve-bayes --config " + path, false);
    std::remove(path.c_str());
    REQUIRE(second.code == 0);
    const json redo = json::parse(second.out);
    CHECK(double(redo["outputs"]["B_star"]) ==
          double(doc["outputs"]["B_star"]));
    CHECK(redo["outputs"]["case"] == doc["outputs"]["case"]);

    const RunResult absent = run_cli("solve-bayes --config does_not_exist.json");
    CHECK(absent.code == 1);
    CHECK(absent.out.find("cannot open") != std::string::npos);
}

// SPDX-License-Identifier: MIT

// Command line front end.  Talks to the library exclusively through the C
// interface in qdd.h; single solves print JSON on stdout, grids and sweeps
// print CSV (or write it to --out).

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "qdd.h"

using ordered_json = nlohmann::ordered_json;

namespace {

[[noreturn]] void die(int code, const std::string& msg) {
    std::cerr << "error: " << msg << "\n";
    std::exit(code);
}

// Validation problems exit with 1, numeric failures with 2.
void check_status(qdd_status st) {
    if (st == QDD_OK) return;
    die(st == QDD_INVALID_ARGUMENT ? 1 : 2, qdd_last_error());
}

std::string fmt17(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

struct Preset {
    const char* name;
    double lambda0, lambda1, lambda, c, pi0;
};

constexpr Preset kPresets[] = {
    {"case1", 2.0, 1.0, 0.1, 1.0, 0.1},
    {"case2", 2.0, 1.0, 0.1, 0.4, 0.1},
    {"case3", 2.0, 1.0, 0.1, 0.1, 0.1},
    {"case4", 1.0, 2.0, 0.1, 1.0, 0.1},
};

const Preset* find_preset(const std::string& name) {
    for (const auto& p : kPresets)
        if (name == p.name) return &p;
    return nullptr;
}

// Model flags shared by every command.  Values from --config or --preset can
// be overridden by the individual flags.
struct ModelCli {
    CLI::App* cmd = nullptr;
    std::string preset;
    std::string config;
    double lambda0 = 0, lambda1 = 0, lambda = 0, cost = 0, pi0 = 0;

    void attach(CLI::App* c) {
        cmd = c;
        c->add_option("--preset", preset, "named parameter set case1..case4");
        c->add_option("--config", config, "JSON file with model parameters");
        c->add_option("--lambda0", lambda0, "arrival scale before the change");
        c->add_option("--lambda1", lambda1, "arrival scale after the change");
        c->add_option("--lambda", lambda, "rate of the change time");
        c->add_option("--c", cost, "delay cost per unit time");
        c->add_option("--pi0", pi0, "prior probability that the change already happened");
    }

    qdd_model* resolve() const {
        double v[5] = {0, 0, 0, 0, 0};
        bool set[5] = {false, false, false, false, false};
        if (!config.empty() && !preset.empty())
            die(1, "use either --preset or --config, not both");
        if (!config.empty()) {
            std::ifstream in(config);
            if (!in) die(1, "cannot open config file " + config);
            std::stringstream ss;
            ss << in.rdbuf();
            qdd_model* m = nullptr;
            check_status(qdd_model_from_json(ss.str().c_str(), &m));
            qdd_model_get(m, &v[0], &v[1], &v[2], &v[3], &v[4]);
            qdd_model_free(m);
            for (bool& b : set) b = true;
        } else if (!preset.empty()) {
            const Preset* p = find_preset(preset);
            if (!p) die(1, "unknown preset " + preset + " (expected case1..case4)");
            v[0] = p->lambda0;
            v[1] = p->lambda1;
            v[2] = p->lambda;
            v[3] = p->c;
            v[4] = p->pi0;
            for (bool& b : set) b = true;
        }
        const struct {
            const char* flag;
            double value;
            int slot;
        } overrides[] = {
            {"--lambda0", lambda0, 0}, {"--lambda1", lambda1, 1},
            {"--lambda", lambda, 2},   {"--c", cost, 3},
            {"--pi0", pi0, 4},
        };
        for (const auto& o : overrides)
            if (cmd->count(o.flag)) {
                v[o.slot] = o.value;
                set[o.slot] = true;
            }
        if (!set[4]) v[4] = 0.0;  // prior defaults to zero mass at time 0
        const char* names[4] = {"--lambda0", "--lambda1", "--lambda", "--c"};
        for (int i = 0; i < 4; ++i)
            if (!set[i])
                die(1, std::string("missing required flag ") + names[i]);
        qdd_model* m = nullptr;
        check_status(qdd_model_create(v[0], v[1], v[2], v[3], v[4], &m));
        return m;
    }
};

ordered_json model_json(const qdd_model* m) {
    double l0, l1, lam, c, p0;
    qdd_model_get(m, &l0, &l1, &lam, &c, &p0);
    return ordered_json{{"lambda0", l0},
                        {"lambda1", l1},
                        {"lambda", lam},
                        {"c", c},
                        {"pi0", p0}};
}

const char* label_name(int label) {
    switch (label) {
        case 1: return "I";
        case 2: return "II";
        case 3: return "III";
        case 4: return "IV";
    }
    return "?";
}

// Opens --out when given, otherwise hands back stdout.
std::ostream& open_sink(const std::string& out, std::ofstream& file) {
    if (out.empty()) return std::cout;
    file.open(out);
    if (!file) die(1, "cannot open output file " + out);
    return file;
}

void write_value_grid(const qdd_bayes* sol, int n, std::ostream& os) {
    if (n < 2) die(1, "--grid must be at least 2");
    os << "pi,value\n";
    for (int i = 0; i < n; ++i) {
        const double pi = double(i) / double(n - 1);
        double v = 0;
        check_status(qdd_bayes_value(sol, pi, &v));
        os << fmt17(pi) << "," << fmt17(v) << "\n";
    }
}

std::vector<double> parse_sweep(const std::string& text) {
    double a = 0, b = 0;
    long long k = 0;
    char tail = 0;
    if (std::sscanf(text.c_str(), "%lf:%lf:%lld%c", &a, &b, &k, &tail) != 3)
        die(1, "--sweep expects start:stop:count, got " + text);
    if (k < 1) die(1, "--sweep count must be positive");
    std::vector<double> out;
    out.reserve(size_t(k));
    if (k == 1) {
        out.push_back(a);
    } else {
        for (long long i = 0; i < k; ++i)
            out.push_back(a + (b - a) * double(i) / double(k - 1));
    }
    return out;
}

void emit(const ordered_json& doc) { std::cout << doc.dump(2) << "\n"; }

int run_solve_bayes(const ModelCli& mf, double tol, int grid,
                    const std::string& out, bool has_grid) {
    qdd_model* m = mf.resolve();
    qdd_bayes* sol = nullptr;
    check_status(qdd_solve_bayes(m, &sol));
    int label = 0, has_bhat = 0, smooth = 0;
    double b_bar = 0, b_hat = 0, b_star = 0, left = 0;
    qdd_bayes_summary(sol, &label, &b_bar, &b_hat, &has_bhat, &b_star, &smooth,
                      &left);
    double p0 = 0;
    qdd_model_get(m, nullptr, nullptr, nullptr, nullptr, &p0);
    double v_p0 = 0;
    check_status(qdd_bayes_value(sol, p0, &v_p0));

    ordered_json doc;
    doc["command"] = "solve-bayes";
    doc["inputs"] = {{"model", model_json(m)}, {"tol", tol}};
    ordered_json outs;
    outs["case"] = label_name(label);
    outs["B_bar"] = b_bar;
    if (has_bhat)
        outs["B_hat"] = b_hat;
    else
        outs["B_hat"] = nullptr;
    outs["B_star"] = b_star;
    outs["smooth_fit"] = smooth != 0;
    outs["left_derivative"] = left;
    outs["V_at_pi0"] = v_p0;
    doc["outputs"] = outs;
    double fit = 0;
    check_status(qdd_bayes_value(sol, b_star, &fit));
    doc["diagnostics"] = {{"requested_tol", tol},
                          {"boundary_fit_residual", fit - (1.0 - b_star)}};
    emit(doc);

    if (has_grid) {
        std::ofstream file;
        write_value_grid(sol, grid, open_sink(out, file));
    }
    qdd_bayes_free(sol);
    qdd_model_free(m);
    return 0;
}

int run_value_function(const ModelCli& mf, int grid, const std::string& out) {
    qdd_model* m = mf.resolve();
    qdd_bayes* sol = nullptr;
    check_status(qdd_solve_bayes(m, &sol));
    std::ofstream file;
    write_value_grid(sol, grid, open_sink(out, file));
    qdd_bayes_free(sol);
    qdd_model_free(m);
    return 0;
}

int run_solve_variational(const ModelCli& mf, double alpha, double tol) {
    qdd_model* m = mf.resolve();
    qdd_variational* sol = nullptr;
    check_status(qdd_solve_variational(m, alpha, &sol));
    int directive = 0, has_b = 0;
    double b_alpha = 0, achieved = 0;
    qdd_variational_summary(sol, &directive, &b_alpha, &has_b, &achieved);

    ordered_json doc;
    doc["command"] = "solve-variational";
    doc["inputs"] = {{"model", model_json(m)}, {"alpha", alpha}, {"tol", tol}};
    ordered_json outs;
    outs["directive"] = directive ? "threshold" : "stop_immediately";
    if (has_b)
        outs["B_alpha"] = b_alpha;
    else
        outs["B_alpha"] = nullptr;
    outs["achieved_u"] = achieved;
    doc["outputs"] = outs;
    doc["diagnostics"] = {{"requested_tol", tol},
                          {"alpha_residual", achieved - alpha}};
    emit(doc);
    qdd_variational_free(sol);
    qdd_model_free(m);
    return 0;
}

int run_simulate(const ModelCli& mf, bool use_bstar, bool has_b, double b,
                 std::int64_t n_paths, std::uint64_t seed, int threads,
                 double horizon, const std::string& sweep,
                 const std::string& out) {
    qdd_model* m = mf.resolve();
    qdd_sim_config cfg{n_paths, seed, horizon, threads};

    if (!sweep.empty()) {
        const std::vector<double> bs = parse_sweep(sweep);
        std::vector<qdd_risk> risks(bs.size());
        std::vector<qdd_false_alarm> fas(bs.size());
        check_status(
            qdd_sweep(m, bs.data(), bs.size(), &cfg, risks.data(), fas.data()));
        std::ofstream file;
        std::ostream& os = open_sink(out, file);
        os << "B,risk_mean,risk_stderr,fa_mean,fa_stderr,n,capped_fraction\n";
        for (size_t i = 0; i < bs.size(); ++i) {
            os << fmt17(bs[i]) << "," << fmt17(risks[i].mean) << ","
               << fmt17(risks[i].std_err) << "," << fmt17(fas[i].rb_mean)
               << "," << fmt17(fas[i].rb_std_err) << "," << risks[i].n << ","
               << fmt17(risks[i].capped_fraction) << "\n";
        }
        qdd_model_free(m);
        return 0;
    }

    if (use_bstar == has_b)
        die(1, use_bstar ? "use either --B or --use-bstar, not both"
                         : "missing required flag --B (or pass --use-bstar)");
    if (use_bstar) {
        qdd_bayes* sol = nullptr;
        check_status(qdd_solve_bayes(m, &sol));
        qdd_bayes_summary(sol, nullptr, nullptr, nullptr, nullptr, &b, nullptr,
                          nullptr);
        qdd_bayes_free(sol);
    }

    qdd_risk direct{}, identity{};
    qdd_false_alarm fa{};
    check_status(qdd_simulate_risk(m, b, 1, &cfg, &direct));
    check_status(qdd_simulate_risk(m, b, 0, &cfg, &identity));
    check_status(qdd_simulate_false_alarm(m, b, &cfg, &fa));

    ordered_json doc;
    doc["command"] = "simulate";
    doc["inputs"] = {{"model", model_json(m)},
                     {"B", b},
                     {"n_paths", n_paths},
                     {"seed", seed}};
    doc["outputs"] = {
        {"B", b},
        {"risk_direct", {{"mean", direct.mean}, {"std_err", direct.std_err}}},
        {"risk_identity",
         {{"mean", identity.mean}, {"std_err", identity.std_err}}},
        {"false_alarm",
         {{"rao_blackwell", {{"mean", fa.rb_mean}, {"std_err", fa.rb_std_err}}},
          {"indicator", {{"mean", fa.ind_mean}, {"std_err", fa.ind_std_err}}}}},
        {"n", direct.n},
        {"capped_fraction", direct.capped_fraction}};
    doc["diagnostics"] = {{"estimator_gap", direct.mean - identity.mean}};
    emit(doc);
    qdd_model_free(m);
    return 0;
}

int run_verify(const std::string& preset, const ModelCli& mf,
               std::uint64_t seed, int threads, std::int64_t n_paths) {
    struct Job {
        std::string name;
        qdd_model* model;
    };
    std::vector<Job> jobs;
    const bool custom = !mf.config.empty() || mf.cmd->count("--lambda0") ||
                        mf.cmd->count("--lambda1") || mf.cmd->count("--lambda") ||
                        mf.cmd->count("--c") || mf.cmd->count("--pi0");
    if (custom) {
        jobs.push_back({"custom", mf.resolve()});
    } else if (preset == "all") {
        for (const auto& p : kPresets) {
            qdd_model* m = nullptr;
            check_status(
                qdd_model_create(p.lambda0, p.lambda1, p.lambda, p.c, p.pi0, &m));
            jobs.push_back({p.name, m});
        }
    } else {
        const Preset* p = find_preset(preset);
        if (!p) die(1, "unknown preset " + preset + " (expected case1..case4 or all)");
        qdd_model* m = nullptr;
        check_status(
            qdd_model_create(p->lambda0, p->lambda1, p->lambda, p->c, p->pi0, &m));
        jobs.push_back({p->name, m});
    }

    bool all_pass = true;
    for (const auto& job : jobs) {
        char* report = nullptr;
        int pass = 0;
        check_status(qdd_verify(job.model, job.name.c_str(), seed, threads,
                                n_paths, &report, &pass));
        std::cout << report;
        qdd_string_free(report);
        all_pass = all_pass && pass != 0;
        qdd_model_free(job.model);
    }
    return all_pass ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"quickest detection of a rate change in a compound Poisson stream"};
    app.require_subcommand(1);

    // solve-bayes
    auto* sb = app.add_subcommand("solve-bayes",
                                  "solve the expected-cost problem");
    ModelCli sb_model;
    sb_model.attach(sb);
    double sb_tol = 1e-8;
    int sb_grid = 0;
    std::string sb_out;
    sb->add_option("--tol", sb_tol, "reporting tolerance echoed in diagnostics");
    auto* sb_grid_opt =
        sb->add_option("--grid", sb_grid, "also write an N-point value CSV");
    sb->add_option("--out", sb_out, "CSV destination (default stdout)");

    // value-function
    auto* vf = app.add_subcommand("value-function",
                                  "tabulate the value function as CSV");
    ModelCli vf_model;
    vf_model.attach(vf);
    int vf_grid = 201;
    std::string vf_out;
    vf->add_option("--grid", vf_grid, "number of grid points");
    vf->add_option("--out", vf_out, "CSV destination (default stdout)");

    // solve-variational
    auto* sv = app.add_subcommand("solve-variational",
                                  "solve the false-alarm-budget problem");
    ModelCli sv_model;
    sv_model.attach(sv);
    double sv_alpha = 0, sv_tol = 1e-8;
    auto* sv_alpha_opt =
        sv->add_option("--alpha", sv_alpha, "false alarm budget in (0,1]");
    sv->add_option("--tol", sv_tol, "reporting tolerance echoed in diagnostics");

    // simulate
    auto* sim = app.add_subcommand("simulate",
                                   "Monte Carlo risk and false-alarm estimates");
    ModelCli sim_model;
    sim_model.attach(sim);
    double sim_b = 0, sim_horizon = 0;
    bool sim_use_bstar = false;
    std::int64_t sim_paths = 200000;
    std::uint64_t sim_seed = 0;
    int sim_threads = 0;
    std::string sim_sweep, sim_out;
    auto* sim_b_opt = sim->add_option("--B", sim_b, "stopping threshold");
    sim->add_flag("--use-bstar", sim_use_bstar,
                  "use the solved optimal threshold");
    sim->add_option("--n-paths", sim_paths, "number of simulated paths");
    sim->add_option("--seed", sim_seed, "random seed");
    sim->add_option("--threads", sim_threads, "worker threads (0 = auto)");
    sim->add_option("--horizon", sim_horizon, "time cap per path (0 = auto)");
    sim->add_option("--sweep", sim_sweep,
                    "threshold sweep start:stop:count, CSV output");
    sim->add_option("--out", sim_out, "CSV destination (default stdout)");

    // verify
    auto* ver = app.add_subcommand("verify", "run the self-check battery");
    ModelCli ver_model;
    ver_model.attach(ver);
    std::string ver_preset = "all";
    std::uint64_t ver_seed = 7;
    int ver_threads = 0;
    std::int64_t ver_paths = 200000;
    // verify reuses --preset from the shared model flags but allows "all"
    ver->get_option("--preset")->default_str("all");
    ver->add_option("--seed", ver_seed, "random seed");
    ver->add_option("--threads", ver_threads, "worker threads (0 = auto)");
    ver->add_option("--n-paths", ver_paths, "paths per Monte Carlo check");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    if (sb->parsed())
        return run_solve_bayes(sb_model, sb_tol, sb_grid, sb_out,
                               sb_grid_opt->count() > 0);
    if (vf->parsed()) return run_value_function(vf_model, vf_grid, vf_out);
    if (sv->parsed()) {
        if (sv_alpha_opt->count() == 0)
            die(1, "missing required flag --alpha");
        return run_solve_variational(sv_model, sv_alpha, sv_tol);
    }
    if (sim->parsed())
        return run_simulate(sim_model, sim_use_bstar, sim_b_opt->count() > 0,
                            sim_b, sim_paths, sim_seed, sim_threads,
                            sim_horizon, sim_sweep, sim_out);
    if (ver->parsed()) {
        const std::string name =
            ver->count("--preset") ? ver_model.preset : std::string("all");
        return run_verify(name, ver_model, ver_seed, ver_threads, ver_paths);
    }
    return 1;
}

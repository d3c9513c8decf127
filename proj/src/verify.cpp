// SPDX-License-Identifier: MIT

#include "qdd/verify.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <utility>
#include <vector>

#include "qdd/bayes.hpp"
#include "qdd/numerics.hpp"
#include "qdd/posterior.hpp"
#include "qdd/simulate.hpp"
#include "qdd/variational.hpp"

namespace qdd {

namespace {

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}

void add(VerifyReport& rep, const std::string& name, bool pass,
         std::string detail) {
    rep.checks.push_back({name, pass, std::move(detail)});
    rep.all_pass = rep.all_pass && pass;
}

// Observation record (disorder time and jumps) up to t_end, independent
// of any stopping rule.
struct ObsPath {
    double theta = 0.0;
    std::vector<std::pair<double, double>> jumps;
};

ObsPath observe_path(const ModelParams& p, std::uint64_t seed,
                     std::uint64_t idx, double t_end, int max_jumps) {
    PathRng rng(seed, idx);
    ObsPath out;
    const double u = rng.uniform();
    out.theta = (u < p.pi0) ? 0.0 : rng.exponential(1.0 / p.lambda);
    double t = 0.0;
    while (static_cast<int>(out.jumps.size()) < max_jumps) {
        double s;
        double mark_mean;
        if (t < out.theta) {
            s = t + rng.exponential(p.lambda0);
            if (s > out.theta) {
                s = out.theta + rng.exponential(p.lambda1);
                mark_mean = 1.0 / p.lambda1;
            } else {
                mark_mean = 1.0 / p.lambda0;
            }
        } else {
            s = t + rng.exponential(p.lambda1);
            mark_mean = 1.0 / p.lambda1;
        }
        if (s > t_end) break;
        out.jumps.emplace_back(s, rng.exponential(mark_mean));
        t = s;
    }
    return out;
}

}  // namespace

VerifyReport verify_preset(const std::string& preset_name,
                           const ModelParams& p, std::uint64_t seed,
                           int threads, std::int64_t n_paths) {
    VerifyReport rep;
    rep.preset = preset_name;
    const bool high = p.lambda0 > p.lambda1;
    const BayesSolution sol = solve_bayes(p);
    const double bs = sol.b_star;

    {  // threshold identities and case labelling
        const double id_err = std::fabs(sol.b_bar * (p.lambda + p.c) - p.lambda);
        bool ok = id_err <= 1e-12 && sol.b_star >= sol.b_bar - 1e-12 &&
                  sol.b_star < 1.0;
        ok = ok && (sol.b_hat.has_value() == high);
        if (sol.label == CaseLabel::II)
            ok = ok && std::fabs(sol.b_bar - *sol.b_hat) <= 1e-12;
        add(rep, "thresholds", ok,
            "case=" + std::string(to_string(sol.label)) +
                " b_bar=" + fmt(sol.b_bar) + " b_star=" + fmt(bs));
    }

    {  // value meets 1 - pi at the boundary; slope matches the closed form
        const double vjoin = sol.value(bs - 1e-12) - (1.0 - bs + 1e-12);
        const double h = 1e-6;
        const double fd = (sol.value(bs) - sol.value(bs - h)) / h;
        bool ok = std::fabs(vjoin) <= 1e-10 &&
                  std::fabs(fd - sol.left_derivative) <= 1e-4;
        if (sol.smooth_fit)
            ok = ok && std::fabs(sol.left_derivative + 1.0) <= 1e-4;
        else
            ok = ok && sol.left_derivative > -1.0;
        add(rep, "boundary fit", ok,
            "V'(b_star-)=" + fmt(sol.left_derivative) +
                (sol.smooth_fit ? " (smooth)" : " (broken)"));
    }

    if (high && sol.label != CaseLabel::I) {
        // slope limit at the flow fixed point
        const double lim = detail::broken_slope(p);
        const double got = fprime(p, *sol.b_hat, bs);
        add(rep, "slope at b_hat", std::fabs(got - lim) <= 1e-6,
            "limit=" + fmt(lim) + " got=" + fmt(got));
    }

    if (sol.label == CaseLabel::III) {
        const double h_near = big_H(p, *sol.b_hat + 1e-4);
        const double h_bar = big_H(p, sol.b_bar);
        const double h_root = big_H(p, bs);
        const bool ok = h_near > 0.0 && h_bar > 0.0 &&
                        std::fabs(h_root) <= 1e-8 && bs > sol.b_bar &&
                        bs < 1.0;
        add(rep, "H root", ok,
            "H(b_bar)=" + fmt(h_bar) + " H(b_star)=" + fmt(h_root));
    }

    {  // generator calibration on affine functions
        double worst = 0.0;
        for (int i = 1; i <= 19; ++i) {
            const double pi = 0.05 * i;
            const double g_id = apply_generator(
                p, [](double x) { return x; }, pi, 1e-8);
            const double g_co = apply_generator(
                p, [](double x) { return 1.0 - x; }, pi, 1e-8);
            worst = std::max(worst,
                             std::fabs(g_id - p.lambda * (1.0 - pi)));
            worst = std::max(worst,
                             std::fabs(g_co + p.lambda * (1.0 - pi)));
        }
        add(rep, "generator", worst <= 1e-6, "max dev=" + fmt(worst));
    }

    std::function<double(double)> value_fn = [&](double x) {
        return sol.value(x);
    };
    std::function<double(double)> slope_fn = [&](double x) {
        return sol.slope(x);
    };

    {  // dynamic-programming residual below the boundary
        double worst = 0.0;
        for (int i = 1; i <= 50; ++i) {
            const double pi =
                0.01 + (bs - 0.02) * double(i) / 51.0;
            const double r =
                apply_generator(p, value_fn, pi, 1e-8, &slope_fn) + p.c * pi;
            worst = std::max(worst, std::fabs(r));
        }
        add(rep, "residual (continue)", worst <= 1e-4,
            "max |LV + c pi|=" + fmt(worst));
    }

    {  // stopping region: LV + c pi must be nonnegative
        double low = 0.0;
        double worst_id = 0.0;
        for (int i = 0; i <= 24; ++i) {
            const double pi = bs + 0.01 + (0.99 - bs - 0.01) * i / 24.0;
            if (!(pi < 0.99 + 1e-9)) break;
            const double r =
                apply_generator(p, value_fn, pi, 1e-8, &slope_fn) + p.c * pi;
            low = std::min(low, r);
            if (high)
                worst_id = std::max(
                    worst_id,
                    std::fabs(r - (p.lambda + p.c) * (pi - sol.b_bar)));
        }
        bool ok = low >= -1e-6 && (!high || worst_id <= 1e-6);
        add(rep, "residual (stop)", ok, "min=" + fmt(low));
    }

    {  // majorant, monotone, midpoint concave
        bool ok = true;
        double worst_maj = 0.0;
        double prev = sol.value(0.0);
        for (int i = 1; i <= 100; ++i) {
            const double pi = 0.01 * i;
            const double v = sol.value(pi);
            worst_maj = std::max(worst_maj, v - (1.0 - pi));
            ok = ok && v <= prev + 1e-12;
            prev = v;
        }
        PathRng rng(seed, 777);
        for (int k = 0; k < 1000 && ok; ++k) {
            const double a = rng.uniform();
            const double b = rng.uniform();
            const double mid = 0.5 * (a + b);
            ok = ok && sol.value(mid) >=
                           0.5 * (sol.value(a) + sol.value(b)) - 1e-8;
        }
        ok = ok && worst_maj <= 1e-10;
        add(rep, "value shape", ok, "max (V-(1-pi))=" + fmt(worst_maj));
    }

    SimConfig cfg;
    cfg.n_paths = n_paths;
    cfg.seed = seed;
    cfg.threads = threads;

    {  // Monte Carlo risk against the curve, both estimators
        const double pi_check = std::min(0.5 * bs, 0.05);
        ModelParams p2 = p;
        p2.pi0 = pi_check;
        const double v_ref = sol.value(pi_check);
        const RiskEstimate ri = estimate_risk_identity(p2, bs, cfg);
        const RiskEstimate rd = estimate_risk_direct(p2, bs, cfg);
        const double comb =
            std::sqrt(ri.std_err * ri.std_err + rd.std_err * rd.std_err);
        const bool ok =
            std::fabs(ri.mean - v_ref) <= 3.0 * ri.std_err + 1e-9 &&
            std::fabs(rd.mean - v_ref) <= 3.0 * rd.std_err + 1e-9 &&
            std::fabs(ri.mean - rd.mean) <= 3.0 * comb + 1e-9 &&
            ri.capped_fraction <= 1e-3;
        add(rep, "mc risk", ok,
            "V=" + fmt(v_ref) + " identity=" + fmt(ri.mean) + "+-" +
                fmt(ri.std_err) + " direct=" + fmt(rd.mean) + "+-" +
                fmt(rd.std_err));
    }

    {  // Monte Carlo false alarm of the budget solution
        const double alpha = 0.2;
        const VariationalSolution vs = solve_variational(p, alpha);
        bool ok = vs.directive == Directive::Threshold && vs.b_alpha;
        std::string detail = "(stop immediately)";
        if (ok) {
            const double b = *vs.b_alpha;
            const double u0 = false_alarm_u(p, p.pi0, b);
            const FalseAlarmEstimate fa = estimate_false_alarm(p, b, cfg);
            ok = std::fabs(u0 - alpha) <= 1e-8 && b <= 1.0 - alpha + 1e-12;
            ok = ok && std::fabs(fa.rao_blackwell.mean - alpha) <=
                           3.0 * fa.rao_blackwell.std_err + 1e-9;
            ok = ok && std::fabs(fa.indicator.mean - alpha) <=
                           3.0 * fa.indicator.std_err + 1e-9;
            detail = "B(0.2)=" + fmt(b) + " fa_rb=" +
                     fmt(fa.rao_blackwell.mean) + "+-" +
                     fmt(fa.rao_blackwell.std_err);
        }
        add(rep, "mc false alarm", ok, detail);
    }

    {  // filtering recursion against the direct Bayes evaluation
        double worst = 0.0;
        const double t_end = 25.0;
        for (int k = 0; k < 20; ++k) {
            const ObsPath path =
                observe_path(p, seed + 1000, std::uint64_t(k), t_end, 40);
            double pi = p.pi0;
            double t = 0.0;
            std::vector<std::pair<double, double>> seen;
            for (const auto& [tk, xk] : path.jumps) {
                pi = jump_update(p, flow(p, pi, tk - t), xk);
                t = tk;
                seen.push_back({tk, xk});
                const double direct =
                    direct_bayes_posterior(seen, tk, p.pi0, p, 1e-12);
                worst = std::max(worst, std::fabs(pi - direct));
            }
        }
        add(rep, "posterior recursion", worst <= 1e-8,
            "max dev=" + fmt(worst));
    }

    {  // identical results for different thread counts
        SimConfig one = cfg;
        one.n_paths = std::min<std::int64_t>(cfg.n_paths, 5000);
        one.threads = 1;
        SimConfig four = one;
        four.threads = 4;
        const RiskEstimate a = estimate_risk_identity(p, bs * 0.999, one);
        const RiskEstimate b = estimate_risk_identity(p, bs * 0.999, four);
        const bool ok = a.mean == b.mean && a.std_err == b.std_err &&
                        a.capped_fraction == b.capped_fraction;
        add(rep, "reproducible", ok,
            ok ? "threads 1 and 4 bitwise equal" : "thread count changes result");
    }

    return rep;
}

std::string format_report(const std::vector<VerifyReport>& reports) {
    std::ostringstream out;
    for (const auto& rep : reports) {
        out << "== " << rep.preset << " ==\n";
        for (const auto& c : rep.checks) {
            out << (c.pass ? "  pass  " : "  FAIL  ");
            std::string name = c.name;
            name.resize(22, ' ');
            out << name << c.detail << "\n";
        }
    }
    int failed = 0;
    int total = 0;
    for (const auto& rep : reports)
        for (const auto& c : rep.checks) {
            ++total;
            failed += c.pass ? 0 : 1;
        }
    out << (failed == 0 ? "all checks passed" : "checks failed") << " ("
        << (total - failed) << "/" << total << ")\n";
    return out.str();
}

}  // namespace qdd

// SPDX-License-Identifier: MIT

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "qdd/model.hpp"
#include "qdd/posterior.hpp"
#include "qdd/simulate.hpp"

using namespace qdd;

namespace {

ModelParams case1() { return make_params(2.0, 1.0, 0.1, 1.0, 0.1); }
ModelParams case4() { return make_params(1.0, 2.0, 0.1, 1.0, 0.1); }

ModelParams with_pi0(ModelParams p, double pi0) {
    return make_params(p.lambda0, p.lambda1, p.lambda, p.c, pi0);
}

}  // namespace

TEST_CASE("sample_path is a pure function of (seed, path index)") {
    const ModelParams p = case1();
    const PathOutcome a = sample_path(p, 0.4, 99, 7, 500.0);
    const PathOutcome b = sample_path(p, 0.4, 99, 7, 500.0);
    CHECK(a.theta == b.theta);
    CHECK(a.tau == b.tau);
    CHECK(a.pi_tau == b.pi_tau);
    CHECK(a.int_pi == b.int_pi);
    CHECK(a.capped == b.capped);

    const PathOutcome c = sample_path(p, 0.4, 99, 8, 500.0);
    CHECK(a.tau != c.tau);  // distinct streams
}

TEST_CASE("path invariants over a batch of outcomes") {
    const ModelParams p = case1();
    int overshoots = 0;
    for (std::uint64_t i = 0; i < 400; ++i) {
        const PathOutcome o = sample_path(p, 0.4, 5, i, 500.0);
        CHECK(o.theta >= 0.0);
        CHECK(o.tau >= 0.0);
        CHECK(o.tau <= 500.0);
        CHECK(o.int_pi >= 0.0);
        CHECK(o.int_pi <= o.tau + 1e-12);  // the posterior never exceeds 1
        if (o.capped) {
            CHECK(o.tau == 500.0);
            CHECK(o.pi_tau < 0.4);
        } else {
            CHECK(o.pi_tau >= 0.4);  // flow hits exactly, jumps overshoot
            if (o.pi_tau > 0.4) ++overshoots;
        }
        CHECK(o.pi_tau <= 1.0);
    }
    CHECK(overshoots > 0);  // upward jumps do land past the threshold
}

TEST_CASE("disorder time sampling matches pi0 and the exponential prior") {
    const ModelParams p = case1();
    const std::uint64_t n = 20000;
    std::int64_t at_zero = 0;
    double sum_pos = 0.0;
    std::int64_t n_pos = 0;
    for (std::uint64_t i = 0; i < n; ++i) {
        const PathOutcome o = sample_path(p, 0.9, 11, i, 1000.0);
        if (o.theta == 0.0) {
            ++at_zero;
        } else {
            sum_pos += o.theta;
            ++n_pos;
        }
    }
    const double frac = double(at_zero) / double(n);
    CHECK(std::abs(frac - p.pi0) < 3.0 * std::sqrt(0.1 * 0.9 / double(n)));
    // conditional mean 1/lambda = 10, crude 5-sigma band
    const double mean_pos = sum_pos / double(n_pos);
    CHECK(std::abs(mean_pos - 10.0) < 5.0 * 10.0 / std::sqrt(double(n_pos)));
}

TEST_CASE("start inside the stop region returns immediately") {
    const ModelParams p = with_pi0(case1(), 0.5);
    const PathOutcome o = sample_path(p, 0.3, 3, 0, 100.0);
    CHECK(o.tau == 0.0);
    CHECK(o.pi_tau == 0.5);
    CHECK(o.int_pi == 0.0);
    CHECK_FALSE(o.capped);

    // identity score is then constant and the estimate has no spread
    SimConfig cfg;
    cfg.n_paths = 500;
    cfg.seed = 3;
    const RiskEstimate r = estimate_risk_identity(p, 0.3, cfg);
    CHECK(r.mean == 0.5);
    CHECK(r.std_err == 0.0);
    CHECK(r.capped_fraction == 0.0);

    const FalseAlarmEstimate f = estimate_false_alarm(p, 0.3, cfg);
    CHECK(f.rao_blackwell.mean == 0.5);
    CHECK(f.rao_blackwell.std_err == 0.0);
    // indicator still averages P(theta > 0) = 1 - pi0
    CHECK(std::abs(f.indicator.mean - 0.5) <
          3.0 * f.indicator.std_err + 1e-12);
}

TEST_CASE("a tight horizon caps paths and is reported") {
    const ModelParams p = case1();
    SimConfig cfg;
    cfg.n_paths = 2000;
    cfg.seed = 17;
    cfg.horizon_cap = 0.01;  // far below any realistic hit time from 0.1
    const RiskEstimate r = estimate_risk_direct(p, 0.9, cfg);
    CHECK(r.capped_fraction > 0.99);
    CHECK(r.n == 2000);

    for (std::uint64_t i = 0; i < 50; ++i) {
        const PathOutcome o = sample_path(p, 0.9, 17, i, 0.01);
        if (o.capped) CHECK(o.tau == 0.01);
    }
}

TEST_CASE("horizon default of 50 / lambda is applied when cap is zero") {
    const ModelParams p = case1();
    SimConfig a;
    a.n_paths = 3000;
    a.seed = 23;
    SimConfig b = a;
    b.horizon_cap = 50.0 / p.lambda;
    const RiskEstimate ra = estimate_risk_identity(p, 0.5, a);
    const RiskEstimate rb = estimate_risk_identity(p, 0.5, b);
    CHECK(ra.mean == rb.mean);
    CHECK(ra.std_err == rb.std_err);
    CHECK(ra.capped_fraction == rb.capped_fraction);
}

TEST_CASE("direct and identity risks agree in mean, identity is tighter") {
    const ModelParams p = case1();
    SimConfig cfg;
    cfg.n_paths = 50000;
    cfg.seed = 41;
    const RiskEstimate rd = estimate_risk_direct(p, 0.5, cfg);
    const RiskEstimate ri = estimate_risk_identity(p, 0.5, cfg);
    const double se = std::hypot(rd.std_err, ri.std_err);
    CHECK(std::abs(rd.mean - ri.mean) < 3.0 * se);
    CHECK(ri.std_err < 0.8 * rd.std_err);  // variance reduction is the point
    CHECK(rd.n == ri.n);
    CHECK(rd.capped_fraction == ri.capped_fraction);
}

TEST_CASE("downward-jump regime stops exactly at the threshold") {
    // lambda0 < lambda1: jumps lower the posterior, only the flow can
    // reach B, so the Rao-Blackwell false-alarm score is constant 1 - B
    const ModelParams p = case4();
    SimConfig cfg;
    cfg.n_paths = 5000;
    cfg.seed = 29;
    const FalseAlarmEstimate f = estimate_false_alarm(p, 0.8, cfg);
    CHECK(f.capped_fraction == 0.0);
    CHECK(f.rao_blackwell.mean == doctest::Approx(0.2).epsilon(1e-13));
    CHECK(f.rao_blackwell.std_err < 1e-12);
    CHECK(std::abs(f.indicator.mean - 0.2) <
          3.0 * f.indicator.std_err + 1e-12);
}

TEST_CASE("estimates are bit-identical across thread counts") {
    const ModelParams p = case1();
    SimConfig one;
    one.n_paths = 9999;  // odd count exercises uneven chunking
    one.seed = 123;
    one.threads = 1;
    SimConfig three = one;
    three.threads = 3;

    const RiskEstimate r1 = estimate_risk_identity(p, 0.45, one);
    const RiskEstimate r3 = estimate_risk_identity(p, 0.45, three);
    CHECK(r1.mean == r3.mean);
    CHECK(r1.std_err == r3.std_err);
    CHECK(r1.capped_fraction == r3.capped_fraction);

    const FalseAlarmEstimate f1 = estimate_false_alarm(p, 0.45, one);
    const FalseAlarmEstimate f3 = estimate_false_alarm(p, 0.45, three);
    CHECK(f1.rao_blackwell.mean == f3.rao_blackwell.mean);
    CHECK(f1.rao_blackwell.std_err == f3.rao_blackwell.std_err);
    CHECK(f1.indicator.mean == f3.indicator.mean);
}

TEST_CASE("single-path estimate matches a hand-scored outcome") {
    const ModelParams p = case1();
    SimConfig cfg;
    cfg.n_paths = 1;
    cfg.seed = 77;
    cfg.horizon_cap = 500.0;
    const PathOutcome o = sample_path(p, 0.5, 77, 0, 500.0);

    const double fa = o.tau < o.theta ? 1.0 : 0.0;
    const double direct = fa + p.c * std::max(0.0, o.tau - o.theta);
    const double ident = (1.0 - p.pi0) +
                         (p.lambda + p.c) * (o.int_pi - p.b_bar() * o.tau);

    CHECK(estimate_risk_direct(p, 0.5, cfg).mean == direct);
    CHECK(estimate_risk_identity(p, 0.5, cfg).mean == ident);
    const FalseAlarmEstimate f = estimate_false_alarm(p, 0.5, cfg);
    CHECK(f.rao_blackwell.mean == 1.0 - o.pi_tau);
    CHECK(f.indicator.mean == fa);
}

TEST_CASE("sweep shares the random numbers and orders false alarms") {
    const ModelParams p = case1();
    SimConfig cfg;
    cfg.n_paths = 20000;
    cfg.seed = 9;
    const std::vector<double> bs = {0.3, 0.5, 0.7};
    const auto pts = sweep_thresholds(p, bs, cfg);
    REQUIRE(pts.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(pts[i].B == bs[i]);
        CHECK(pts[i].risk.n == cfg.n_paths);
    }

    // each point reproduces the standalone estimator with the same seed
    const RiskEstimate r = estimate_risk_identity(p, 0.5, cfg);
    CHECK(pts[1].risk.mean == r.mean);
    CHECK(pts[1].risk.std_err == r.std_err);
    const FalseAlarmEstimate f = estimate_false_alarm(p, 0.7, cfg);
    CHECK(pts[2].fa.rao_blackwell.mean == f.rao_blackwell.mean);

    // under common random numbers tau(B) is nondecreasing per path, so
    // both false-alarm estimates fall as the threshold rises
    CHECK(pts[0].fa.rao_blackwell.mean > pts[1].fa.rao_blackwell.mean);
    CHECK(pts[1].fa.rao_blackwell.mean > pts[2].fa.rao_blackwell.mean);
    CHECK(pts[0].fa.indicator.mean >= pts[1].fa.indicator.mean);
    CHECK(pts[1].fa.indicator.mean >= pts[2].fa.indicator.mean);
}

TEST_CASE("invalid arguments are rejected") {
    const ModelParams p = case1();
    CHECK_THROWS_AS(sample_path(p, 0.0, 1, 0, 10.0), std::invalid_argument);
    CHECK_THROWS_AS(sample_path(p, 1.0, 1, 0, 10.0), std::invalid_argument);
    CHECK_THROWS_AS(sample_path(p, 0.5, 1, 0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(sample_path(p, 0.5, 1, 0, -1.0), std::invalid_argument);

    SimConfig bad;
    bad.n_paths = 0;
    CHECK_THROWS_AS(estimate_risk_direct(p, 0.5, bad),
                    std::invalid_argument);
    SimConfig neg;
    neg.horizon_cap = -2.0;
    CHECK_THROWS_AS(estimate_false_alarm(p, 0.5, neg),
                    std::invalid_argument);
}

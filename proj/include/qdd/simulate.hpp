// SPDX-License-Identifier: MIT
//
// Event-driven Monte Carlo of the observation process and the
// threshold stopping rule. Between arrivals the posterior follows the
// closed-form flow, so paths are simulated exactly (no time stepping):
// per arrival interval the rule either hits the threshold by flow, the
// horizon cap intervenes, or a jump lands and the posterior updates.
//
// Reproducibility contract: every estimate is a pure function of
// (params, B, n_paths, seed); the per-path RNG is counter-based and
// reductions use a fixed tree order, so results are bit-identical for
// any thread count.
#pragma once

#include <cstdint>
#include <vector>

#include "qdd/model.hpp"
#include "qdd/numerics.hpp"

namespace qdd {

struct SimConfig {
    std::int64_t n_paths = 200000;
    std::uint64_t seed = 0;
    double horizon_cap = 0.0;  // 0 -> 50 / lambda
    int threads = 0;           // 0 -> hardware concurrency
};

struct PathOutcome {
    double theta = 0.0;   // disorder time
    double tau = 0.0;     // stopping time (horizon when capped)
    double pi_tau = 0.0;  // posterior at tau
    double int_pi = 0.0;  // integral of the posterior over [0, tau]
    bool capped = false;  // horizon reached before the threshold
};

// One exact path of the threshold rule. The RNG stream is a pure
// function of (seed, path_index).
PathOutcome sample_path(const ModelParams& p, double B, std::uint64_t seed,
                        std::uint64_t path_index, double horizon_cap);

struct RiskEstimate {
    double mean = 0.0;
    double std_err = 0.0;
    std::int64_t n = 0;
    double capped_fraction = 0.0;
};

struct FalseAlarmEstimate {
    MeanStderr rao_blackwell;  // average of 1 - pi_tau
    MeanStderr indicator;      // average of 1{tau < theta}
    std::int64_t n = 0;
    double capped_fraction = 0.0;
};

// Bayes risk scored per path as 1{tau < theta} + c (tau - theta)^+.
RiskEstimate estimate_risk_direct(const ModelParams& p, double B,
                                  const SimConfig& cfg);

// Same risk through the pathwise identity
//   risk = (1 - pi0) + (lambda + c) (int_pi - b_bar * tau),
// an exact rewrite with the same mean and much smaller variance.
RiskEstimate estimate_risk_identity(const ModelParams& p, double B,
                                    const SimConfig& cfg);

// False-alarm probability, both as the posterior average 1 - pi_tau
// (Rao-Blackwellized) and as the raw indicator.
FalseAlarmEstimate estimate_false_alarm(const ModelParams& p, double B,
                                        const SimConfig& cfg);

struct SweepPoint {
    double B = 0.0;
    RiskEstimate risk;  // identity estimator
    FalseAlarmEstimate fa;
};

// One batch per threshold with common random numbers (same seed), so
// neighbouring thresholds are directly comparable.
std::vector<SweepPoint> sweep_thresholds(const ModelParams& p,
                                         const std::vector<double>& bs,
                                         const SimConfig& cfg);

}  // namespace qdd

// SPDX-License-Identifier: MIT
//
// Problem instance for the quickest-disorder-detection model with
// exponential jumps. An observation process accumulates jumps whose
// size distribution switches from density exp(-lambda0*x) to
// exp(-lambda1*x) (as a measure on x > 0) at an unobserved time theta
// with P[theta = 0] = pi0 and an Exp(lambda) tail. Stopping costs 1
// for a false alarm and c per unit of detection delay.
//
// All derived constants are computed on demand from the five primitive
// fields; instances are immutable after construction and safe to share
// across threads.
#pragma once

#include <optional>
#include <string>

namespace qdd {

enum class CaseLabel { I, II, III, IV };

const char* to_string(CaseLabel label);

struct ModelParams {
    double lambda0 = 0.0;  // pre-disorder jump-size rate, > 0
    double lambda1 = 0.0;  // post-disorder jump-size rate, > 0, != lambda0
    double lambda = 0.0;   // disorder hazard rate, > 0
    double c = 0.0;        // delay cost per unit time, > 0
    double pi0 = 0.0;      // prior disorder probability, in [0,1]

    // lambda0 - lambda1; nonzero for valid instances
    double delta() const { return lambda0 - lambda1; }
    // lambda0 * lambda1
    double m() const { return lambda0 * lambda1; }
    // drift slope of the posterior flow
    double rho() const { return delta() / m(); }
    // exponent lambda0 / (lambda0 - lambda1)
    double gamma() const { return lambda0 / delta(); }
    // lambda / (lambda + c), always in (0,1)
    double b_bar() const { return lambda / (lambda + c); }
    // fixed point of the posterior flow; only meaningful for lambda0 > lambda1
    // (may exceed 1)
    double b_hat() const { return lambda * m() / delta(); }
    // lambda0 - lambda1 - lambda*lambda0*lambda1; zero exactly when b_hat = 1
    double kappa() const { return delta() - lambda * m(); }
    // exponent of the G kernel; requires kappa() != 0
    double a() const { return (lambda1 + lambda * m()) / kappa(); }
};

// Validates and returns the instance; throws std::invalid_argument naming
// the offending field. lambda0 == lambda1 is rejected (the disorder would
// be unobservable).
ModelParams make_params(double lambda0, double lambda1, double lambda,
                        double c, double pi0);

// Parses the JSON document {"lambda0":..., "lambda1":..., "lambda":...,
// "c":..., "pi0":...} (all finite doubles, no extra keys) and validates.
ModelParams params_from_json(const std::string& text);

// B_bar always; B_hat only when lambda0 > lambda1 (it may exceed 1).
struct Thresholds {
    double b_bar;
    std::optional<double> b_hat;
};
Thresholds thresholds(const ModelParams& p);

// Exactly one label per valid instance. The CaseII equality
// c = 1/lambda1 - 1/lambda0 - lambda is detected within
// 1e-12 * max(1, c).
CaseLabel classify_case(const ModelParams& p);

// Ratio of post- to pre-disorder jump density, exp((lambda0-lambda1)*x).
// Rejects x < 0.
double likelihood_ratio(double x, const ModelParams& p);

// Moment condition check for the threshold rule: returns B_bar when the
// post-disorder jump measure dominates and 0 < m1 - m0 <= c + lambda,
// absent otherwise. Moments are caller-supplied integrals of x against
// the two jump measures.
std::optional<double> check_lemma31(double m0, double m1, bool dominates,
                                    double lambda, double c);

}  // namespace qdd

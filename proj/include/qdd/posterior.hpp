// SPDX-License-Identifier: MIT
//
// Exact dynamics of the posterior disorder probability pi_t: the
// deterministic flow between jumps, the Bayes update at a jump, level
// crossing times, the process generator, and an independent direct
// Bayes evaluator used as a test oracle.
//
// Between jumps pi solves dpi/dt = (lambda - rho*pi)(1 - pi); 1 is
// always a fixed point, and for lambda0 > lambda1 so is
// b_hat = lambda/rho (when it lies in (0,1) the flow is attracted to
// it from both sides and can never cross it).
#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "qdd/model.hpp"

namespace qdd {

// Flow drift (lambda - rho*pi)(1 - pi).
double flow_drift(const ModelParams& p, double pi);

// Closed-form flow map over duration t >= 0. Uses the relation
// (lambda - rho*pi_t)/(1 - pi_t) = e^{(lambda-rho)t} (lambda - rho*pi0)/(1 - pi0)
// in a form that is uniformly stable in lambda - rho (the lambda = rho
// case needs no special branch) and guarded against overflow for large
// positive (lambda-rho)*t. Result clamped to [0,1] against <= 1e-14 of
// floating-point drift. Rejects pi0 outside [0,1] and negative t.
double flow(const ModelParams& p, double pi0, double t);

// First time the flow from pi0 reaches level B, when that happens in
// finite time: 0 if pi0 >= B; absent when lambda0 > lambda1 and
// B >= b_hat (the flow saturates below B). Requires pi0, B in (0,1).
std::optional<double> flow_hit_time(const ModelParams& p, double pi0, double B);

// Bayes update at a jump of size x >= 0:
// pi Y(x) / (1 + pi (Y(x) - 1)) with Y the likelihood ratio, computed
// on the log-odds scale so large |delta|*x cannot overflow. 0 and 1 are
// absorbing.
double jump_update(const ModelParams& p, double pi, double x);

// Generator of the posterior process applied to f at pi in (0,1):
//   (Lf)(pi) = drift(pi) f'(pi)
//            + int_0^inf [f(jump(pi,x)) - f(pi)]
//                        (pi e^{-lambda1 x} + (1-pi) e^{-lambda0 x}) dx.
// f' comes from fprime when supplied, otherwise a central difference
// with step 1e-6. The integral maps to (0,1) by u = e^{-|delta| x} and
// is refined adaptively to the absolute tolerance quad_tol; failure to
// converge throws numeric_error with the achieved estimate.
double apply_generator(const ModelParams& p,
                       const std::function<double(double)>& f, double pi,
                       double quad_tol = 1e-8,
                       const std::function<double(double)>* fprime = nullptr);

// Posterior P[theta <= t | record] computed directly from the marked
// point record (strictly increasing times in [0, t] with positive
// marks), bypassing the flow/jump recursion: the theta-likelihood of
// the record is piecewise log-linear between jump times, and the
// mixture over the prior pi0*delta_0 + (1-pi0) Exp(lambda) is
// integrated by composite quadrature on a grid broken at the jump
// times, doubling the resolution until successive values differ by
// less than grid_tol. Serves as the independent oracle for the
// recursion.
double direct_bayes_posterior(const std::vector<std::pair<double, double>>& jumps,
                              double t, double pi0, const ModelParams& p,
                              double grid_tol = 1e-10);

}  // namespace qdd

// SPDX-License-Identifier: MIT
//
// Constrained (variational) formulation: among threshold rules, find
// the smallest threshold whose false-alarm probability from pi0 stays
// within a budget alpha (u decreases in the threshold, so the smallest
// feasible one detects fastest). The false-alarm functional u(pi; B) is exact:
// for lambda0 > lambda1 it is either constant in pi (thresholds at or
// above the flow fixed point b_hat, where crossing happens by an
// overshooting jump) or an integral of a positive slope kernel below
// b_hat (crossing by flow); for lambda0 < lambda1 crossing is always by
// flow, hitting B exactly, so u = 1 - B.
#pragma once

#include <optional>

#include "qdd/model.hpp"

namespace qdd {

// Overshoot form of the false-alarm probability for thresholds at or
// above b_hat: W(B) = (1-B) lambda1 / (lambda1 + delta B). Requires
// lambda0 > lambda1 and B in (0,1).
double w_star(const ModelParams& p, double B);

// Slope kernel of u below b_hat:
//   D(pi, B) = (1-B)((1-B)/B)^(gamma-1) G(B)
//              / (gamma (gamma-1) A(pi) pi (1-pi) G(pi)).
// D is defined to be 0 at pi = b_hat. Requires lambda0 > lambda1.
double kernel_D(const ModelParams& p, double pi, double B);

// False-alarm probability u(pi; B) of the threshold rule with boundary
// B, started at pi. Total in pi on [0,1]: 1 - pi at and above B,
// u(0; B) is the (finite) limit from the right.
double false_alarm_u(const ModelParams& p, double pi, double B);

enum class Directive {
    StopImmediately,  // alpha >= 1 - pi0; stopping at once is feasible
    Threshold,        // run the threshold rule with boundary b_alpha
};

struct VariationalSolution {
    Directive directive = Directive::Threshold;
    std::optional<double> b_alpha;  // absent for StopImmediately
    double achieved_u = 0.0;        // u(pi0; b_alpha), or 1 - pi0
};

// Smallest threshold meeting u(pi0; B) <= alpha, with equality whenever
// alpha is attained (closed form on the overshoot branch, bisection on
// the flow branch). Budgets inside the unattainable overshoot gap
// (W(pi0), 1 - pi0) get the smallest viable threshold just above pi0.
// Requires alpha in (0,1].
VariationalSolution solve_variational(const ModelParams& p, double alpha);

}  // namespace qdd

// SPDX-License-Identifier: MIT
//
// Free-boundary solver for the Bayes risk. The optimal rule stops when
// the posterior reaches a threshold b_star; everything here either
// locates that threshold or reconstructs the value function V below it.
//
// The slope V' below the boundary satisfies a first-order linear ODE
// driven by the closed-form kernels A, C, G, phi. Integrating the
// scaled antiderivative E(x) = int G C' once gives the slope; the
// boundary function H decides whether the slope stays bounded at the
// interior fixed point b_hat of the posterior flow.
#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "qdd/model.hpp"

namespace qdd {

// pi^gamma (1-pi)^(1-gamma), the homogeneous solution of the slope
// equation. Requires pi in (0,1).
double kernel_phi(const ModelParams& p, double pi);

// (lambda m - delta pi) / (pi (lambda1 + delta pi)); vanishes at b_hat
// and has a pole at 0. Requires pi in (0,1].
double kernel_A(const ModelParams& p, double pi);

// Inhomogeneity C(pi, B) = C1(B) - c delta ((1-pi)/pi)^(gamma-1) with
// C1(B) = (1-B) ((1-B)/B)^(gamma-1) / (gamma (gamma-1)).
double kernel_C(const ModelParams& p, double pi, double B);

// dC/dpi; independent of B and positive for gamma > 1.
double kernel_C_prime(const ModelParams& p, double x);

// log G(pi) with G = |(lambda m - delta pi)/(kappa (1-pi))|^a / (1-pi),
// the reciprocal integrating factor of the slope equation. Returns
// -infinity at b_hat. Near kappa = 0 the exponent a diverges and an
// exponential limit branch takes over. Requires pi in [0,1).
double kernel_logG(const ModelParams& p, double pi);

// Boundary function for lambda0 > lambda1 and B in (b_hat, 1):
//   H(B) = G(B) C(B,B) - int_{b_hat}^{B} G(x) C'(x) dx.
// H -> 0+ as B -> b_hat, and the optimal threshold of the c-small case
// is its unique root above b_bar. Rejects B <= b_hat.
double big_H(const ModelParams& p, double B);

// Slope V'(pi) of the value candidate with threshold B, evaluated by
// adaptive quadrature of E. At pi = b_hat the formula is 0/0; the
// finite limit -c lambda1^2 / kappa is returned when H(B) vanishes
// (within quadrature accuracy) and numeric_error is thrown otherwise,
// since the slope then diverges. Requires pi in (0, B].
double fprime(const ModelParams& p, double pi, double B);

// Scale-free form of the slope: kernel_F = fprime / w where
// w(pi) = gamma lambda1 (1-pi) (pi/(1-pi))^gamma / (lambda1 + delta pi)
// carries the pi-dependence of the stopped solution.
double kernel_F(const ModelParams& p, double pi, double B);

// Value candidate for threshold B: slope values on a graded node set,
// cubic Hermite in between, integrated back from V(B) = 1 - B.
// Immutable and cheap to copy (shared state).
//
// For lambda0 > lambda1 and B > b_hat with H(B) != 0 the candidate
// diverges at b_hat; the curve then covers only (b_hat, B] and
// evaluation at or below b_hat throws numeric_error.
class ValueCurve {
  public:
    ValueCurve(const ModelParams& p, double B);

    double boundary() const;        // B
    double boundary_slope() const;  // V'(B-)
    bool partial() const;           // true when only (b_hat, B] is covered

    double value(double pi) const;  // V(pi); equals 1 - pi for pi >= B
    double slope(double pi) const;  // V'(pi); equals -1 for pi >= B
    double value_at_zero() const;

    struct Data;

  private:
    std::shared_ptr<const Data> d_;
};

inline ValueCurve value_candidate(const ModelParams& p, double B) {
    return ValueCurve(p, B);
}

struct BayesSolution {
    CaseLabel label;
    double b_bar = 0.0;
    std::optional<double> b_hat;   // present when lambda0 > lambda1
    double b_star = 0.0;
    bool smooth_fit = false;       // V'(b_star-) = -1
    double left_derivative = 0.0;  // V'(b_star-)
    ValueCurve curve;

    double value(double pi) const { return curve.value(pi); }
    double slope(double pi) const { return curve.slope(pi); }
};

// Classifies the instance, locates b_star (closed form, root of H, or
// smooth-fit root depending on the case) and builds the value curve.
BayesSolution solve_bayes(const ModelParams& p);

namespace detail {

// w(pi) from kernel_F; the slope of the stopped branch through phi.
double slope_weight(const ModelParams& p, double pi);

// Closed-form V'(B-) = C(B,B) phi(B) / (delta R(B)); equals -1 exactly
// at B = b_bar.
double boundary_slope(const ModelParams& p, double B);

// Limit slope -c lambda1^2 / kappa at b_hat when H = 0.
double broken_slope(const ModelParams& p);

}  // namespace detail

}  // namespace qdd

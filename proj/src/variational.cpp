// SPDX-License-Identifier: MIT

#include "qdd/variational.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qdd/bayes.hpp"
#include "qdd/errors.hpp"
#include "qdd/numerics.hpp"
#include "qdd/posterior.hpp"

namespace qdd {

double w_star(const ModelParams& p, double B) {
    if (!(p.lambda0 > p.lambda1))
        throw std::invalid_argument("w_star requires lambda0 > lambda1");
    if (!(B > 0.0 && B < 1.0))
        throw std::invalid_argument("B must lie in (0,1)");
    return (1.0 - B) * p.lambda1 / (p.lambda1 + p.delta() * B);
}

double kernel_D(const ModelParams& p, double pi, double B) {
    if (!(p.lambda0 > p.lambda1))
        throw std::invalid_argument("kernel_D requires lambda0 > lambda1");
    if (!(pi > 0.0 && pi < 1.0))
        throw std::invalid_argument("pi must lie in (0,1)");
    if (!(B > 0.0 && B < 1.0))
        throw std::invalid_argument("B must lie in (0,1)");
    const double bh = p.b_hat();
    if (bh < 1.0 && std::fabs(pi - bh) <= 1e-12 * bh) return 0.0;
    const double g = p.gamma();
    const double ratio = std::exp(kernel_logG(p, B) - kernel_logG(p, pi));
    return (1.0 - B) * std::pow((1.0 - B) / B, g - 1.0) * ratio /
           (g * (g - 1.0) * kernel_A(p, pi) * pi * (1.0 - pi));
}

namespace {

// u(pi; B) on the flow branch (B strictly below b_hat): integrate the
// positive slope kernel
//   v_u(x) = phi(x) G(B) (1-B) delta B / (m phi(B) R(x) G(x))
// in t = log(b_hat - x); the substitution flattens the 1/(b_hat - x)
// boundary layer that appears when B is close to b_hat.
double u_flow_branch(const ModelParams& p, double pi, double B) {
    const double bh = p.b_hat();
    const double lgB = kernel_logG(p, B);
    const double scale = (1.0 - B) * p.delta() * B /
                         (p.m() * kernel_phi(p, B));
    // b_hat - x equals exp(t) by construction; substituting it into the
    // weight and the drift analytically sidesteps the cancellation noise
    // that x = b_hat - exp(t) would reintroduce right at the peak:
    //   v_u dx/dt = scale phi(x) exp(lgB - a (log delta - log kappa) - a t)
    //               (1-x)^a / rho
    const double A = p.a();
    const double lk = lgB - A * (std::log(p.delta()) - std::log(p.kappa()));
    auto integrand = [&](double t) {
        const double e = std::exp(t);
        const double x = bh - e;
        if (x <= 0.0) return 0.0;
        return scale * kernel_phi(p, x) *
               std::exp(lk - A * t + A * std::log1p(-x)) / p.rho();
    };
    const double t0 = std::log(bh - B);
    const double t1 = std::log(bh - pi);
    // the mass concentrates exponentially at the t0 end once B nears b_hat,
    // so grade the panels toward it
    const QuadResult r = integrate_graded(integrand, t0, t1, t0, 1e-12, 0.0);
    if (!r.converged)
        throw numeric_error(
            "false-alarm quadrature did not reach tolerance: achieved error "
            "estimate " +
            std::to_string(r.error));
    return 1.0 - B - r.value;
}

}  // namespace

double false_alarm_u(const ModelParams& p, double pi, double B) {
    if (!(B > 0.0 && B < 1.0))
        throw std::invalid_argument("B must lie in (0,1)");
    if (!(pi >= 0.0 && pi <= 1.0))
        throw std::invalid_argument("pi must lie in [0,1]");
    if (pi >= B) return 1.0 - pi;
    if (p.lambda0 < p.lambda1) return 1.0 - B;
    const double bh = p.b_hat();
    if (bh < 1.0 && B >= bh) return w_star(p, B);
    return u_flow_branch(p, pi, B);
}

VariationalSolution solve_variational(const ModelParams& p, double alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw std::invalid_argument("alpha must lie in (0,1]");
    const double pi0 = p.pi0;

    if (alpha >= 1.0 - pi0)
        return {Directive::StopImmediately, std::nullopt, 1.0 - pi0};

    if (p.lambda0 < p.lambda1) {
        const double b = 1.0 - alpha;  // u = 1 - B exactly
        return {Directive::Threshold, b, false_alarm_u(p, pi0, b)};
    }

    const double bh = p.b_hat();
    // inverse of w_star
    auto overshoot_b = [&](double a) {
        return p.lambda1 * (1.0 - a) / (p.lambda1 + p.delta() * a);
    };

    if (bh < 1.0 && pi0 >= bh) {
        if (alpha < w_star(p, pi0)) {
            const double b = overshoot_b(alpha);
            return {Directive::Threshold, b, false_alarm_u(p, pi0, b)};
        }
        // budgets in (W(pi0), 1-pi0) are unattainable: any threshold
        // above pi0 already beats them; report the smallest viable one
        const double b = pi0 + 1e-10;
        return {Directive::Threshold, b, false_alarm_u(p, pi0, b)};
    }
    if (bh < 1.0 && alpha <= w_star(p, bh)) {
        const double b = overshoot_b(alpha);
        return {Directive::Threshold, b, false_alarm_u(p, pi0, b)};
    }
    // flow branch: u(pi0; .) is continuous and decreasing on
    // (pi0, min(b_hat, 1))
    const double lo = pi0 + 1e-9;
    const double hi = std::min(bh, 1.0 - 1e-9);
    const double b = bisect(
        [&](double bb) { return false_alarm_u(p, pi0, bb) - alpha; }, lo, hi,
        0.0);
    return {Directive::Threshold, b, false_alarm_u(p, pi0, b)};
}

}  // namespace qdd

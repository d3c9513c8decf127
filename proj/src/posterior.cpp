// SPDX-License-Identifier: MIT

#include "qdd/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "qdd/errors.hpp"
#include "qdd/numerics.hpp"

namespace qdd {

double flow_drift(const ModelParams& p, double pi) {
    return (p.lambda - p.rho() * pi) * (1.0 - pi);
}

double flow(const ModelParams& p, double pi0, double t) {
    if (!(pi0 >= 0.0 && pi0 <= 1.0))
        throw std::invalid_argument("pi0 must lie in [0,1]");
    if (!(t >= 0.0) || !std::isfinite(t))
        throw std::invalid_argument("t must be a nonnegative finite number");
    if (pi0 == 1.0) return 1.0;

    const double eps = p.lambda - p.rho();
    const double q0 = pi0 / (1.0 - pi0);
    const double K = (p.lambda - p.rho() * pi0) / (1.0 - pi0);

    // Far in the growing regime the odds are ~ (K/eps) e^{eps t}; go to
    // the complement directly instead of overflowing expm1.
    if (eps > 0.0 && eps * t > 500.0) {
        const double r = 1.0 - eps * std::exp(-eps * t) / K;
        return std::min(r, 1.0);
    }

    const double em = (eps == 0.0) ? t : std::expm1(eps * t) / eps;
    const double num = q0 + K * em;
    if (!std::isfinite(num)) return 1.0;
    double r = num / (1.0 + num);
    if (r < 0.0 && r >= -1e-14) r = 0.0;
    if (r > 1.0 && r <= 1.0 + 1e-14) r = 1.0;
    return r;
}

std::optional<double> flow_hit_time(const ModelParams& p, double pi0,
                                    double B) {
    if (!(pi0 > 0.0 && pi0 < 1.0))
        throw std::invalid_argument("pi0 must lie in (0,1)");
    if (!(B > 0.0 && B < 1.0))
        throw std::invalid_argument("B must lie in (0,1)");
    if (pi0 >= B) return 0.0;
    if (p.lambda0 > p.lambda1 && B >= p.b_hat()) return std::nullopt;

    const double eps = p.lambda - p.rho();
    const double K = (p.lambda - p.rho() * pi0) / (1.0 - pi0);
    const double s = (B - pi0) / ((1.0 - pi0) * (1.0 - B) * K);
    if (eps == 0.0) return s;
    const double w = eps * s;
    if (w <= -1.0) return std::nullopt;  // asymptote reached by rounding
    return std::log1p(w) / eps;
}

double jump_update(const ModelParams& p, double pi, double x) {
    if (!(pi >= 0.0 && pi <= 1.0))
        throw std::invalid_argument("pi must lie in [0,1]");
    if (!(x >= 0.0)) throw std::invalid_argument("x must be nonnegative");
    if (pi == 0.0 || pi == 1.0) return pi;  // absorbing under the update
    const double l = std::log(pi / (1.0 - pi)) + p.delta() * x;
    if (l >= 0.0) return 1.0 / (1.0 + std::exp(-l));
    const double e = std::exp(l);
    return e / (1.0 + e);
}

double apply_generator(const ModelParams& p,
                       const std::function<double(double)>& f, double pi,
                       double quad_tol,
                       const std::function<double(double)>* fprime) {
    if (!(pi > 0.0 && pi < 1.0))
        throw std::invalid_argument("pi must lie in (0,1)");
    if (!(quad_tol > 0.0))
        throw std::invalid_argument("quad_tol must be positive");

    double df;
    if (fprime) {
        df = (*fprime)(pi);
    } else {
        const double h = 1e-6;
        df = (f(pi + h) - f(pi - h)) / (2.0 * h);
    }

    // Mark integral via u = e^{-|delta| x}: the mixture of mark
    // exponentials becomes a pair of power weights on (0,1), with at
    // worst an integrable endpoint singularity at u = 0.
    const double d = std::fabs(p.delta());
    const double e1 = p.lambda1 / d - 1.0;
    const double e0 = p.lambda0 / d - 1.0;
    const double f_pi = f(pi);
    auto integrand = [&](double u) {
        const double x = -std::log(u) / d;
        const double fj = f(jump_update(p, pi, x));
        return (fj - f_pi) *
               (pi * std::pow(u, e1) + (1.0 - pi) * std::pow(u, e0)) / d;
    };

    // Seed panels graded toward u = 0 so the adaptive pass starts from
    // pieces that already resolve the possible singularity.
    static const double mesh[] = {0.0, 1e-10, 1e-7, 1e-4, 1e-2, 0.1, 0.5, 1.0};
    const int nseg = 7;
    double total = 0.0;
    double err = 0.0;
    for (int i = 0; i < nseg; ++i) {
        QuadResult r =
            integrate(integrand, mesh[i], mesh[i + 1], 0.0, quad_tol / 8.0);
        total += r.value;
        err += r.error;
    }
    if (!(err <= quad_tol))
        throw numeric_error(
            "generator integral did not reach tolerance: achieved error "
            "estimate " +
            std::to_string(err));
    return flow_drift(p, pi) * df + total;
}

namespace {

// Composite Simpson of e^{a + b s - biglog} over [lo, hi] using the
// 1-4-2-...-4-1 weights on 2*panels + 1 points.
double simpson_exp_linear(double a, double b, double biglog, double lo,
                          double hi, int panels) {
    const int npts = 2 * panels + 1;
    const double h = (hi - lo) / (2.0 * panels);
    double s = 0.0;
    for (int i = 0; i < npts; ++i) {
        const double x = (i == npts - 1) ? hi : lo + h * i;
        const double w = (i == 0 || i == npts - 1) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        s += w * std::exp(a + b * x - biglog);
    }
    return s * h / 3.0;
}

}  // namespace

double direct_bayes_posterior(
    const std::vector<std::pair<double, double>>& jumps, double t, double pi0,
    const ModelParams& p, double grid_tol) {
    if (!(t >= 0.0) || !std::isfinite(t))
        throw std::invalid_argument("t must be a nonnegative finite number");
    if (!(pi0 >= 0.0 && pi0 <= 1.0))
        throw std::invalid_argument("pi0 must lie in [0,1]");
    if (!(grid_tol > 0.0))
        throw std::invalid_argument("grid_tol must be positive");
    double prev = 0.0;
    for (const auto& [tk, xk] : jumps) {
        if (!(tk > prev))
            throw std::invalid_argument(
                "jump times must be positive and strictly increasing");
        if (!(tk <= t))
            throw std::invalid_argument("jump times must lie in (0, t]");
        if (!(xk > 0.0) || !std::isfinite(xk))
            throw std::invalid_argument("marks must be positive finite numbers");
        prev = tk;
    }
    if (pi0 == 1.0) return 1.0;

    const size_t n = jumps.size();
    const double lam0 = p.lambda0;
    const double lam1 = p.lambda1;
    const double lam = p.lambda;
    const double rho = p.rho();

    // Log-likelihood of the record given disorder time s is piecewise
    // linear with slope rho: lnL(s) = a_k + rho*s when k jumps precede s.
    double s_total = 0.0;
    for (const auto& j : jumps) s_total += j.second;
    std::vector<double> a(n + 1);
    double s_pre = 0.0;
    for (size_t k = 0; k <= n; ++k) {
        if (k > 0) s_pre += jumps[k - 1].second;
        a[k] = -t / lam1 - lam0 * s_pre - lam1 * (s_total - s_pre);
    }
    std::vector<double> bound(n + 2);
    bound[0] = 0.0;
    for (size_t k = 0; k < n; ++k) bound[k + 1] = jumps[k].first;
    bound[n + 1] = t;

    // Scale every exponent by the overall maximum so nothing overflows.
    const double g = rho - lam;  // slope of the integrand exponent
    double big = -std::numeric_limits<double>::infinity();
    if (pi0 > 0.0) big = std::max(big, std::log(pi0) + a[0]);
    const double lcomp = std::log1p(-pi0);
    big = std::max(big, lcomp + a[n] + rho * t - lam * t);
    for (size_t k = 0; k <= n; ++k) {
        big = std::max(big, lcomp + std::log(lam) + a[k] + g * bound[k]);
        big = std::max(big, lcomp + std::log(lam) + a[k] + g * bound[k + 1]);
    }

    const double point0 =
        (pi0 > 0.0) ? std::exp(std::log(pi0) + a[0] - big) : 0.0;
    const double tail = std::exp(lcomp + a[n] + rho * t - lam * t - big);

    double post = 0.0;
    bool settled = false;
    for (int r = 1; r <= 24 && !settled; ++r) {
        const int panels = 1 << r;
        double integral = 0.0;
        for (size_t k = 0; k <= n; ++k) {
            if (bound[k + 1] <= bound[k]) continue;
            integral += simpson_exp_linear(lcomp + std::log(lam) + a[k], g,
                                           big, bound[k], bound[k + 1],
                                           panels);
        }
        const double num = point0 + integral;
        const double den = num + tail;
        const double est = (den > 0.0) ? num / den : 0.0;
        settled = (r > 1 && std::fabs(est - post) < grid_tol);
        post = est;
    }
    if (!settled)
        throw numeric_error(
            "posterior quadrature did not stabilize to the requested "
            "tolerance");
    return post;
}

}  // namespace qdd

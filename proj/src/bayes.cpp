// SPDX-License-Identifier: MIT

#include "qdd/bayes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "qdd/errors.hpp"
#include "qdd/numerics.hpp"
#include "qdd/posterior.hpp"

namespace qdd {

double kernel_phi(const ModelParams& p, double pi) {
    if (!(pi > 0.0 && pi < 1.0))
        throw std::invalid_argument("pi must lie in (0,1)");
    const double g = p.gamma();
    return std::pow(pi, g) * std::pow(1.0 - pi, 1.0 - g);
}

double kernel_A(const ModelParams& p, double pi) {
    if (!(pi > 0.0 && pi <= 1.0))
        throw std::invalid_argument("pi must lie in (0,1]; A has a pole at 0");
    return (p.lambda * p.m() - p.delta() * pi) /
           (pi * (p.lambda1 + p.delta() * pi));
}

double kernel_C(const ModelParams& p, double pi, double B) {
    if (!(pi > 0.0 && pi < 1.0))
        throw std::invalid_argument("pi must lie in (0,1)");
    if (!(B > 0.0 && B < 1.0))
        throw std::invalid_argument("B must lie in (0,1)");
    const double g = p.gamma();
    const double c1 =
        (1.0 - B) * std::pow((1.0 - B) / B, g - 1.0) / (g * (g - 1.0));
    return c1 - p.c * p.delta() * std::pow((1.0 - pi) / pi, g - 1.0);
}

double kernel_C_prime(const ModelParams& p, double x) {
    if (!(x > 0.0 && x < 1.0))
        throw std::invalid_argument("x must lie in (0,1)");
    const double g = p.gamma();
    return p.c * p.delta() * (g - 1.0) * std::pow(1.0 - x, g - 2.0) /
           std::pow(x, g);
}

double kernel_logG(const ModelParams& p, double pi) {
    if (!(pi >= 0.0 && pi < 1.0))
        throw std::invalid_argument("pi must lie in [0,1)");
    const double lm = p.lambda * p.m();
    const double kap = p.kappa();
    if (std::fabs(kap) <= 1e-12 * std::max(std::fabs(p.delta()), lm)) {
        // kappa -> 0: the exponent a diverges while a*kappa -> lambda0,
        // leaving an exponential in pi/(1-pi)
        return p.lambda0 * pi / ((p.lambda1 - p.lambda0) * (1.0 - pi)) -
               std::log1p(-pi);
    }
    const double num = lm - p.delta() * pi;
    if (num == 0.0) return -std::numeric_limits<double>::infinity();
    return p.a() * (std::log(std::fabs(num)) - std::log(std::fabs(kap))) -
           (p.a() + 1.0) * std::log1p(-pi);
}

namespace detail {

double slope_weight(const ModelParams& p, double pi) {
    if (!(pi > 0.0 && pi < 1.0))
        throw std::invalid_argument("pi must lie in (0,1)");
    const double g = p.gamma();
    return g * p.lambda1 * (1.0 - pi) * std::pow(pi / (1.0 - pi), g) /
           (p.lambda1 + p.delta() * pi);
}

double boundary_slope(const ModelParams& p, double B) {
    return kernel_C(p, B, B) * kernel_phi(p, B) /
           (p.delta() * flow_drift(p, B));
}

double broken_slope(const ModelParams& p) {
    return -p.c * p.lambda1 * p.lambda1 / p.kappa();
}

}  // namespace detail

double big_H(const ModelParams& p, double B) {
    if (!(p.lambda0 > p.lambda1))
        throw std::invalid_argument("big_H requires lambda0 > lambda1");
    if (!(B > 0.0 && B < 1.0))
        throw std::invalid_argument("B must lie in (0,1)");
    const double bh = p.b_hat();
    if (!(B > bh)) throw std::invalid_argument("B must exceed b_hat");

    // Work in units of G(B); the integrand vanishes like a fractional
    // power at b_hat, hence the graded mesh.
    const double lgB = kernel_logG(p, B);
    auto f = [&](double x) {
        return std::exp(kernel_logG(p, x) - lgB) * kernel_C_prime(p, x);
    };
    QuadResult r = integrate_graded(f, bh, B, bh, 1e-12, 0.0);
    if (!r.converged)
        throw numeric_error(
            "H quadrature did not reach tolerance: achieved error "
            "estimate " +
            std::to_string(r.error));
    return std::exp(lgB) * (kernel_C(p, B, B) - r.value);
}

double fprime(const ModelParams& p, double pi, double B) {
    if (!(B > 0.0 && B < 1.0))
        throw std::invalid_argument("B must lie in (0,1)");
    if (!(pi > 0.0 && pi <= B))
        throw std::invalid_argument("pi must lie in (0, B]");

    if (p.lambda0 < p.lambda1) {
        // anchored at 0; scale by G(pi) so only ratios of G appear
        const double lgp = kernel_logG(p, pi);
        auto f = [&](double y) {
            return std::exp(kernel_logG(p, y) - lgp) * kernel_C_prime(p, y);
        };
        QuadResult r = integrate_graded(f, 0.0, pi, 0.0, 1e-12, 0.0);
        if (!r.converged)
            throw numeric_error(
                "slope quadrature did not reach tolerance: achieved error "
                "estimate " +
                std::to_string(r.error));
        return r.value * kernel_phi(p, pi) / (p.delta() * flow_drift(p, pi));
    }

    const double bh = p.b_hat();  // may exceed 1
    if (bh < 1.0 && std::fabs(pi - bh) <= 1e-12 * bh) {
        // 0/0 at the flow fixed point; the limit is finite iff H(B) = 0
        if (std::fabs(B - bh) <= 1e-12 * bh) return detail::broken_slope(p);
        const double H = big_H(p, B);
        const double scale =
            std::exp(kernel_logG(p, B)) * kernel_C(p, B, B);
        if (std::fabs(H) <= 1e-9 * std::max(1.0, std::fabs(scale)))
            return detail::broken_slope(p);
        throw numeric_error("slope diverges at b_hat: H(B) = " +
                            std::to_string(H) +
                            " does not vanish for this threshold");
    }
    if (pi == B) return detail::boundary_slope(p, B);

    const double anchor = (bh < B) ? bh : B;
    const double lgs = std::max(kernel_logG(p, pi), kernel_logG(p, B));
    auto f = [&](double y) {
        return std::exp(kernel_logG(p, y) - lgs) * kernel_C_prime(p, y);
    };
    auto sweep_to = [&](double target) {
        if (target == anchor) return 0.0;
        const double lo = std::min(anchor, target);
        const double hi = std::max(anchor, target);
        QuadResult r = integrate_graded(f, lo, hi, anchor, 1e-12, 0.0);
        if (!r.converged)
            throw numeric_error(
                "slope quadrature did not reach tolerance: achieved error "
                "estimate " +
                std::to_string(r.error));
        return target > anchor ? r.value : -r.value;
    };
    const double e_pi = sweep_to(pi);
    const double e_b = sweep_to(B);
    const double h_s =
        e_b - kernel_C(p, B, B) * std::exp(kernel_logG(p, B) - lgs);
    return (e_pi - h_s) * kernel_phi(p, pi) /
           (p.delta() * flow_drift(p, pi) *
            std::exp(kernel_logG(p, pi) - lgs));
}

double kernel_F(const ModelParams& p, double pi, double B) {
    return fprime(p, pi, B) / detail::slope_weight(p, pi);
}

// ---------------------------------------------------------------------
// Value curve

namespace {

constexpr int kCoreNodes = 2000;
constexpr int kFlankNodes = 45;

// n points from lo to hi, geometric in lo..hi (both positive), last
// point exactly hi.
std::vector<double> geom_ladder(double lo, double hi, int n) {
    std::vector<double> out(static_cast<size_t>(n));
    const double span = std::log(hi / lo);
    for (int i = 0; i < n; ++i)
        out[static_cast<size_t>(i)] =
            lo * std::exp(span * double(i) / double(n - 1));
    out.back() = hi;
    return out;
}

double hermite(double f0, double d0, double f1, double d1, double w,
               double t) {
    const double t2 = t * t;
    const double t3 = t2 * t;
    return (2.0 * t3 - 3.0 * t2 + 1.0) * f0 + (t3 - 2.0 * t2 + t) * w * d0 +
           (-2.0 * t3 + 3.0 * t2) * f1 + (t3 - t2) * w * d1;
}

}  // namespace

struct ValueCurve::Data {
    ModelParams p;
    double B = 0.0;
    double b_hat = 0.0;  // only meaningful when high
    bool high = false;   // lambda0 > lambda1
    bool part = false;   // nodes cover only (b_hat, B]
    std::vector<double> xs, vn, dv, fv;
    double f0 = 0.0;  // V(0); quadratic tail below xs[0]
    double q = 0.0;
};

namespace {

// Slope values, analytic slope derivatives and the back-integrated value
// at the nodes; shared by the full and the partial construction.
void finish_curve(ValueCurve::Data& d, const std::vector<double>& E,
                  double H, bool patch_window, double hloc) {
    const ModelParams& p = d.p;
    const size_t n = d.xs.size();
    const double delta = p.delta();
    const double g = p.gamma();
    d.vn.assign(n, 0.0);
    d.dv.assign(n, 0.0);
    size_t patched = n;  // index of the deferred b_hat node, if any
    for (size_t i = 0; i < n; ++i) {
        const double x = d.xs[i];
        if (patch_window && std::fabs(x - d.b_hat) < 0.5 * hloc) {
            patched = i;
            continue;
        }
        const double G = std::exp(kernel_logG(p, x));
        const double R = flow_drift(p, x);
        const double v = (E[i] - H) * kernel_phi(p, x) / (delta * R * G);
        const double dphi = g / x + (g - 1.0) / (1.0 - x);
        const double dR = -p.rho() / (p.lambda - p.rho() * x) - 1.0 / (1.0 - x);
        const double dG = -1.0 / (kernel_A(p, x) * x * (1.0 - x));
        d.vn[i] = v;
        d.dv[i] = kernel_C_prime(p, x) * kernel_phi(p, x) / (delta * R) +
                  v * (dphi - dR - dG);
    }
    if (patched < n) {
        d.vn[patched] = detail::broken_slope(p);
        if (patched + 1 < n) {
            d.dv[patched] = (d.vn[patched + 1] - d.vn[patched - 1]) /
                            (d.xs[patched + 1] - d.xs[patched - 1]);
        } else {
            d.dv[patched] = (d.vn[patched] - d.vn[patched - 1]) /
                            (d.xs[patched] - d.xs[patched - 1]);
        }
    }
    if (d.high && patched != n - 1)
        d.vn[n - 1] = detail::boundary_slope(p, d.B);

    d.fv.assign(n, 0.0);
    d.fv[n - 1] = 1.0 - d.B;
    for (size_t i = n - 1; i > 0; --i) {
        const double w = d.xs[i] - d.xs[i - 1];
        // exact integral of the cubic Hermite segment
        const double seg = w * (d.vn[i - 1] + d.vn[i]) / 2.0 +
                           w * w * (d.dv[i - 1] - d.dv[i]) / 12.0;
        d.fv[i - 1] = d.fv[i] - seg;
    }
    if (!d.part) {
        // linear-through-zero slope model below the first node
        d.q = d.vn[0] / (2.0 * d.xs[0]);
        d.f0 = d.fv[0] - d.xs[0] * d.vn[0] / 2.0;
    }
}

}  // namespace

ValueCurve::ValueCurve(const ModelParams& p, double B) {
    if (!(B > 0.0 && B < 1.0))
        throw std::invalid_argument("B must lie in (0,1)");
    auto d = std::make_shared<Data>();
    d->p = p;
    d->B = B;
    d->high = p.lambda0 > p.lambda1;
    d->b_hat = d->high ? p.b_hat() : 0.0;
    const double bh = d->b_hat;
    const bool window = d->high && bh < 1.0 && bh <= B;
    const double hloc = 1e-3 * bh;

    const double xlo = 1e-8 * B;
    std::vector<double> nodes = geom_ladder(xlo, B, kCoreNodes);
    if (window) {
        const double span_l = std::min(0.5 * bh, bh - xlo);
        for (double off : geom_ladder(hloc, span_l, kFlankNodes))
            nodes.push_back(bh - off);
        if (bh < B) {
            const double span_r = 0.7 * (B - bh);
            for (double off : geom_ladder(hloc, span_r, kFlankNodes))
                nodes.push_back(bh + off);
        }
        nodes.push_back(bh);
    }
    std::sort(nodes.begin(), nodes.end());
    const double gap = 1e-13 * B;
    std::vector<double>& xs = d->xs;
    for (double x : nodes) {
        if (x < xlo || x > B) continue;
        // inside +-hloc of b_hat the raw formula is worst conditioned;
        // only the patched node itself survives there
        if (window && x != bh && std::fabs(x - bh) < 0.999 * hloc) continue;
        if (!xs.empty() && x - xs.back() < gap) continue;
        xs.push_back(x);
    }
    if (B - xs.back() < gap)
        xs.back() = B;
    else
        xs.push_back(B);

    // antiderivative sweep from the anchor node
    auto gcp = [&](double x) {
        return std::exp(kernel_logG(p, x)) * kernel_C_prime(p, x);
    };
    size_t n = xs.size();
    const double anchor = (window && bh < B) ? bh : B;
    size_t ai = 0;
    for (size_t i = 1; i < n; ++i)
        if (std::fabs(xs[i] - anchor) < std::fabs(xs[ai] - anchor)) ai = i;
    std::vector<double> E(n, 0.0);
    if (!d->high) {
        QuadResult r0 = integrate_graded(gcp, 0.0, xs[0], 0.0, 1e-12, 0.0);
        if (!r0.converged)
            throw numeric_error(
                "curve quadrature did not reach tolerance near zero: "
                "achieved error estimate " +
                std::to_string(r0.error));
        ai = 0;
        E[0] = r0.value;
    }
    for (size_t i = ai; i + 1 < n; ++i)
        E[i + 1] = E[i] + integrate_or_throw(gcp, xs[i], xs[i + 1], 1e-12);
    for (size_t i = ai; i > 0; --i)
        E[i - 1] = E[i] - integrate_or_throw(gcp, xs[i - 1], xs[i], 1e-12);

    const double gb = std::exp(kernel_logG(p, B));
    const double cbb = kernel_C(p, B, B);
    const double H = d->high ? E[n - 1] - gb * cbb : 0.0;

    if (window && bh < B &&
        std::fabs(H) > 1e-9 * std::max(1.0, std::fabs(gb * cbb))) {
        // the slope diverges at b_hat; the candidate only exists above it
        d->part = true;
        xs.clear();
        const double w0 = B - bh;
        for (double off : geom_ladder(1e-12 * w0, w0, kCoreNodes)) {
            const double x = bh + off;
            if (!xs.empty() && x - xs.back() < gap) continue;
            xs.push_back(x);
        }
        xs.back() = B;
        n = xs.size();
        std::vector<double> E2(n, 0.0);
        for (size_t i = n - 1; i > 0; --i)
            E2[i - 1] = E2[i] - integrate_or_throw(gcp, xs[i - 1], xs[i], 1e-12);
        finish_curve(*d, E2, -gb * cbb, false, hloc);
    } else {
        finish_curve(*d, E, H, window, hloc);
    }
    d_ = std::move(d);
}

double ValueCurve::boundary() const { return d_->B; }

double ValueCurve::boundary_slope() const { return d_->vn.back(); }

bool ValueCurve::partial() const { return d_->part; }

double ValueCurve::value_at_zero() const {
    if (d_->part)
        throw numeric_error(
            "value candidate diverges at b_hat for this threshold; "
            "evaluation is limited to (b_hat, B]");
    return d_->f0;
}

namespace {

// locate the segment [xs[k], xs[k+1]] containing pi (pi within grid)
size_t locate(const std::vector<double>& xs, double pi) {
    const auto it = std::upper_bound(xs.begin(), xs.end(), pi);
    size_t k = static_cast<size_t>(it - xs.begin());
    if (k == 0) return 0;
    if (k >= xs.size()) k = xs.size() - 1;
    return k - 1;
}

}  // namespace

double ValueCurve::value(double pi) const {
    const Data& d = *d_;
    if (!(pi >= 0.0 && pi <= 1.0))
        throw std::invalid_argument("pi must lie in [0,1]");
    if (pi >= d.B) return 1.0 - pi;
    if (pi < d.xs.front()) {
        if (d.part)
            throw numeric_error(
                "value candidate diverges at b_hat for this threshold; "
                "evaluation is limited to (b_hat, B]");
        return d.f0 + d.q * pi * pi;
    }
    const size_t k = locate(d.xs, pi);
    const double w = d.xs[k + 1] - d.xs[k];
    const double t = (pi - d.xs[k]) / w;
    return hermite(d.fv[k], d.vn[k], d.fv[k + 1], d.vn[k + 1], w, t);
}

double ValueCurve::slope(double pi) const {
    const Data& d = *d_;
    if (!(pi >= 0.0 && pi <= 1.0))
        throw std::invalid_argument("pi must lie in [0,1]");
    if (pi >= d.B) return -1.0;
    if (pi < d.xs.front()) {
        if (d.part)
            throw numeric_error(
                "value candidate diverges at b_hat for this threshold; "
                "evaluation is limited to (b_hat, B]");
        return d.vn[0] * pi / d.xs[0];
    }
    const size_t k = locate(d.xs, pi);
    const double w = d.xs[k + 1] - d.xs[k];
    const double t = (pi - d.xs[k]) / w;
    return hermite(d.vn[k], d.dv[k], d.vn[k + 1], d.dv[k + 1], w, t);
}

BayesSolution solve_bayes(const ModelParams& p) {
    const CaseLabel label = classify_case(p);
    const Thresholds th = thresholds(p);
    double b_star = th.b_bar;
    if (label == CaseLabel::III) {
        auto h = [&](double b) { return big_H(p, b); };
        double lo = th.b_bar + 1e-6;
        double hi = 1.0 - 1e-6;
        if (h(lo) <= 0.0) {
            // root sits between b_hat and b_bar
            hi = lo;
            lo = *th.b_hat + 1e-6 * (th.b_bar - *th.b_hat);
        }
        b_star = bisect(h, lo, hi, 0.0);
    } else if (label == CaseLabel::IV) {
        auto s1 = [&](double b) { return fprime(p, b, b) + 1.0; };
        b_star = bisect(s1, 1e-6, 1.0 - 1e-6, 0.0);
    }
    ValueCurve curve(p, b_star);
    const bool smooth = label == CaseLabel::I || label == CaseLabel::IV;
    return BayesSolution{label,  th.b_bar, th.b_hat,
                         b_star, smooth,   curve.boundary_slope(),
                         curve};
}

}  // namespace qdd

// SPDX-License-Identifier: MIT
#include "qdd/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>

#include "qdd/errors.hpp"

namespace qdd {

namespace {

// 7/15 Gauss-Kronrod abscissae and weights on [-1, 1].
constexpr double kXgk[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769,
    0.741531185599394, 0.586087235467691, 0.405845151377397,
    0.207784955007898, 0.0};
constexpr double kWgk[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728};
constexpr double kWg[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469};

struct Panel {
    double a, b;
    double integral;
    double error;
    bool operator<(const Panel& o) const {
        // priority queue pops the largest error first; break ties by
        // position so the refinement order is fully determined
        if (error != o.error) return error < o.error;
        return a > o.a;
    }
};

Panel gk15(const std::function<double(double)>& f, double a, double b) {
    const double h = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    double resk = 0.0, resg = 0.0, resabs = 0.0;
    double fv[15];
    for (int i = 0; i < 7; ++i) {
        fv[i] = f(mid - h * kXgk[i]);
        fv[14 - i] = f(mid + h * kXgk[i]);
    }
    fv[7] = f(mid);
    for (int i = 0; i < 7; ++i) {
        const double pair = fv[i] + fv[14 - i];
        resk += kWgk[i] * pair;
        resabs += kWgk[i] * (std::abs(fv[i]) + std::abs(fv[14 - i]));
        if (i % 2 == 1) resg += kWg[i / 2] * pair;
    }
    resk += kWgk[7] * fv[7];
    resabs += kWgk[7] * std::abs(fv[7]);
    resg += kWg[3] * fv[7];
    Panel p;
    p.a = a;
    p.b = b;
    p.integral = resk * h;
    // standard Kronrod error heuristic
    double err = std::abs((resk - resg) * h);
    const double scale = resabs * std::abs(h);
    if (scale > 0.0 && err > 0.0)
        err = scale * std::min(1.0, std::pow(200.0 * err / scale, 1.5));
    p.error = err;
    return p;
}

}  // namespace

QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     double epsrel, double epsabs, int max_intervals) {
    QuadResult out;
    if (a == b) {
        out.converged = true;
        return out;
    }
    std::priority_queue<Panel> panels;
    Panel first = gk15(f, a, b);
    out.evaluations = 15;
    double total = first.integral;
    double total_err = first.error;
    double total_abs = std::abs(first.integral);
    panels.push(first);
    int splits = 0;
    auto target = [&]() {
        // roundoff floor keeps pure-relative requests from spinning once
        // the panel sums hit machine precision
        const double floor = 50.0 * std::numeric_limits<double>::epsilon() * total_abs;
        return std::max({epsabs, epsrel * std::abs(total), floor});
    };
    while (total_err > target() && splits < max_intervals) {
        Panel worst = panels.top();
        panels.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (mid <= std::min(worst.a, worst.b) || mid >= std::max(worst.a, worst.b)) {
            // interval no longer splittable in double precision
            panels.push(Panel{worst.a, worst.b, worst.integral, 0.0});
            continue;
        }
        Panel left = gk15(f, worst.a, mid);
        Panel right = gk15(f, mid, worst.b);
        out.evaluations += 30;
        total += left.integral + right.integral - worst.integral;
        total_err += left.error + right.error - worst.error;
        total_abs += std::abs(left.integral) + std::abs(right.integral) -
                     std::abs(worst.integral);
        panels.push(left);
        panels.push(right);
        ++splits;
    }
    out.value = total;
    out.error = total_err;
    out.converged = total_err <= target();
    return out;
}

double integrate_or_throw(const std::function<double(double)>& f, double a,
                          double b, double epsrel, double epsabs,
                          int max_intervals) {
    QuadResult r = integrate(f, a, b, epsrel, epsabs, max_intervals);
    if (!r.converged) {
        std::ostringstream msg;
        msg << "quadrature did not reach tolerance: achieved error estimate "
            << r.error << " on value " << r.value;
        throw numeric_error(msg.str());
    }
    return r.value;
}

QuadResult integrate_graded(const std::function<double(double)>& f, double a,
                            double b, double toward, double epsrel,
                            double epsabs, double first_frac, int pieces) {
    const double len = b - a;
    QuadResult out;
    if (len == 0.0) {
        out.converged = true;
        return out;
    }
    // breakpoints at geometric distances from the graded endpoint
    std::vector<double> xs;
    xs.push_back(0.0);
    const double lo = std::log(first_frac);
    for (int i = 0; i < pieces; ++i)
        xs.push_back(std::exp(lo * (1.0 - double(i) / (pieces - 1))));
    xs.back() = 1.0;
    double abs_sum = 0.0;
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        double u0, u1;
        if (toward == a) {
            u0 = a + xs[i] * len;
            u1 = a + xs[i + 1] * len;
        } else {
            u0 = b - xs[i + 1] * len;
            u1 = b - xs[i] * len;
        }
        if (u0 == u1) continue;
        QuadResult piece = integrate(f, u0, u1, epsrel, epsabs, 200);
        out.value += piece.value;
        out.error += piece.error;
        out.evaluations += piece.evaluations;
        abs_sum += std::abs(piece.value);
    }
    // pieces near the graded endpoint are minute; convergence is judged on
    // the assembled integral, not piece by piece
    const double floor =
        50.0 * std::numeric_limits<double>::epsilon() * abs_sum;
    out.converged =
        out.error <= std::max({epsabs, epsrel * std::abs(out.value), floor});
    return out;
}

double bisect(const std::function<double(double)>& f, double lo, double hi,
              double xtol, int max_iter) {
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo < 0.0) == (fhi < 0.0)) {
        std::ostringstream msg;
        msg << "no sign change on bracket: f(" << lo << ") = " << flo
            << ", f(" << hi << ") = " << fhi;
        throw numeric_error(msg.str());
    }
    for (int i = 0; i < max_iter && hi - lo > xtol; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

namespace {

inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

PathRng::PathRng(std::uint64_t seed, std::uint64_t path) {
    const std::uint64_t a = mix64(seed + 0x9e3779b97f4a7c15ULL);
    const std::uint64_t b = mix64(path + 0xd1b54a32d192ed03ULL);
    state_ = mix64(a ^ (b + 0x2545f4914f6cdd1dULL));
}

std::uint64_t PathRng::next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix64(state_);
}

double PathRng::uniform() {
    return double(next_u64() >> 11) * 0x1.0p-53;
}

double PathRng::exponential(double mean) {
    // 1 - uniform() is in (0, 1], so the log is finite
    return -std::log1p(-uniform()) * mean;
}

double tree_sum(const double* x, std::size_t n) {
    if (n <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += x[i];
        return s;
    }
    const std::size_t h = n / 2;
    return tree_sum(x, h) + tree_sum(x + h, n - h);
}

MeanStderr mean_stderr(const std::vector<double>& x) {
    MeanStderr r;
    const std::size_t n = x.size();
    if (n == 0) return r;
    r.mean = tree_sum(x.data(), n) / double(n);
    if (n == 1) return r;
    std::vector<double> dev(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double d = x[i] - r.mean;
        dev[i] = d * d;
    }
    const double var = tree_sum(dev.data(), n) / double(n - 1);
    r.std_err = std::sqrt(var / double(n));
    return r;
}

}  // namespace qdd

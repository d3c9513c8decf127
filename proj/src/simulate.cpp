// SPDX-License-Identifier: MIT

#include "qdd/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <vector>

#include "qdd/posterior.hpp"

namespace qdd {

namespace {

// exact integral of the flow over a segment of length dt from pi_s to
// pi_e = flow(pi_s, dt):  int pi = (lambda dt - [ln(1-pi_s) - ln(1-pi_e)]) / rho
double flow_integral(const ModelParams& p, double pi_s, double pi_e,
                     double dt) {
    return (p.lambda * dt - (std::log1p(-pi_s) - std::log1p(-pi_e))) /
           p.rho();
}

}  // namespace

PathOutcome sample_path(const ModelParams& p, double B, std::uint64_t seed,
                        std::uint64_t path_index, double horizon_cap) {
    if (!(B > 0.0 && B < 1.0))
        throw std::invalid_argument("B must lie in (0,1)");
    if (!(horizon_cap > 0.0))
        throw std::invalid_argument("horizon_cap must be positive");

    PathRng rng(seed, path_index);
    const double u = rng.uniform();
    const double theta =
        (u < p.pi0) ? 0.0 : rng.exponential(1.0 / p.lambda);

    PathOutcome out;
    out.theta = theta;
    double t = 0.0;
    double pi = p.pi0;

    if (pi >= B) {  // already inside the stop region
        out.pi_tau = pi;
        return out;
    }

    // flow_hit_time requires a start in (0,1); pi = 0 uses the same
    // closed form with zero starting odds
    auto hit = [&](double from) -> std::optional<double> {
        if (from > 0.0) return flow_hit_time(p, from, B);
        if (p.lambda0 > p.lambda1 && B >= p.b_hat()) return std::nullopt;
        const double eps = p.lambda - p.rho();
        const double s0 = B / ((1.0 - B) * p.lambda);
        if (eps == 0.0) return s0;
        const double w = eps * s0;
        if (w <= -1.0) return std::nullopt;
        return std::log1p(w) / eps;
    };

    for (;;) {
        // next arrival, resampled at the regime switch (memoryless)
        double s;
        double mark_mean;
        if (t < theta) {
            s = t + rng.exponential(p.lambda0);  // arrival gap mean lambda0
            if (s > theta) {
                s = theta + rng.exponential(p.lambda1);
                mark_mean = 1.0 / p.lambda1;
            } else {
                mark_mean = 1.0 / p.lambda0;
            }
        } else {
            s = t + rng.exponential(p.lambda1);
            mark_mean = 1.0 / p.lambda1;
        }

        const auto th = hit(pi);
        if (th && t + *th <= s) {
            out.tau = t + *th;
            out.pi_tau = B;
            out.int_pi += flow_integral(p, pi, B, *th);
            return out;
        }
        if (s > horizon_cap) {
            const double dt = horizon_cap - t;
            const double pe = flow(p, pi, dt);
            out.int_pi += flow_integral(p, pi, pe, dt);
            out.tau = horizon_cap;
            out.pi_tau = pe;
            out.capped = true;
            return out;
        }
        const double pe = flow(p, pi, s - t);
        out.int_pi += flow_integral(p, pi, pe, s - t);
        const double x = rng.exponential(mark_mean);
        pi = jump_update(p, pe, x);
        t = s;
        if (pi >= B) {  // jump overshoots the threshold
            out.tau = s;
            out.pi_tau = pi;
            return out;
        }
    }
}

namespace {

struct Batch {
    MeanStderr risk_direct;
    MeanStderr risk_identity;
    MeanStderr fa_rb;
    MeanStderr fa_ind;
    std::int64_t n = 0;
    double capped_fraction = 0.0;
};

Batch run_batch(const ModelParams& p, double B, const SimConfig& cfg) {
    if (!(B > 0.0 && B < 1.0))
        throw std::invalid_argument("B must lie in (0,1)");
    if (!(cfg.n_paths > 0))
        throw std::invalid_argument("n_paths must be positive");
    if (cfg.horizon_cap < 0.0)
        throw std::invalid_argument("horizon_cap must be nonnegative");
    const double horizon =
        cfg.horizon_cap > 0.0 ? cfg.horizon_cap : 50.0 / p.lambda;

    const std::size_t n = static_cast<std::size_t>(cfg.n_paths);
    std::vector<double> rd(n), ri(n), frb(n), find(n);
    std::vector<unsigned char> capped(n, 0);

    auto worker = [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            const PathOutcome o = sample_path(p, B, cfg.seed, i, horizon);
            const double delay = std::max(0.0, o.tau - o.theta);
            const double fa = o.tau < o.theta ? 1.0 : 0.0;
            rd[i] = fa + p.c * delay;
            ri[i] = (1.0 - p.pi0) +
                    (p.lambda + p.c) * (o.int_pi - p.b_bar() * o.tau);
            frb[i] = 1.0 - o.pi_tau;
            find[i] = fa;
            capped[i] = o.capped ? 1 : 0;
        }
    };

    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    std::size_t nthreads =
        cfg.threads > 0 ? static_cast<std::size_t>(cfg.threads) : hw;
    nthreads = std::min(nthreads, n);
    if (nthreads <= 1) {
        worker(0, n);
    } else {
        // an exception escaping a std::thread terminates the process, so
        // workers stash the first one and it rethrows after the join
        std::exception_ptr failure;
        std::mutex failure_mu;
        auto guarded_worker = [&](std::size_t lo, std::size_t hi) {
            try {
                worker(lo, hi);
            } catch (...) {
                const std::lock_guard<std::mutex> lock(failure_mu);
                if (!failure) failure = std::current_exception();
            }
        };
        std::vector<std::thread> pool;
        pool.reserve(nthreads);
        const std::size_t chunk = (n + nthreads - 1) / nthreads;
        for (std::size_t k = 0; k < nthreads; ++k) {
            const std::size_t lo = k * chunk;
            const std::size_t hi = std::min(n, lo + chunk);
            if (lo >= hi) break;
            pool.emplace_back(guarded_worker, lo, hi);
        }
        for (auto& th : pool) th.join();
        if (failure) std::rethrow_exception(failure);
    }

    Batch b;
    b.risk_direct = mean_stderr(rd);
    b.risk_identity = mean_stderr(ri);
    b.fa_rb = mean_stderr(frb);
    b.fa_ind = mean_stderr(find);
    b.n = cfg.n_paths;
    std::int64_t ncap = 0;
    for (unsigned char c : capped) ncap += c;
    b.capped_fraction = double(ncap) / double(n);
    return b;
}

}  // namespace

RiskEstimate estimate_risk_direct(const ModelParams& p, double B,
                                  const SimConfig& cfg) {
    const Batch b = run_batch(p, B, cfg);
    return {b.risk_direct.mean, b.risk_direct.std_err, b.n,
            b.capped_fraction};
}

RiskEstimate estimate_risk_identity(const ModelParams& p, double B,
                                    const SimConfig& cfg) {
    const Batch b = run_batch(p, B, cfg);
    return {b.risk_identity.mean, b.risk_identity.std_err, b.n,
            b.capped_fraction};
}

FalseAlarmEstimate estimate_false_alarm(const ModelParams& p, double B,
                                        const SimConfig& cfg) {
    const Batch b = run_batch(p, B, cfg);
    return {b.fa_rb, b.fa_ind, b.n, b.capped_fraction};
}

std::vector<SweepPoint> sweep_thresholds(const ModelParams& p,
                                         const std::vector<double>& bs,
                                         const SimConfig& cfg) {
    std::vector<SweepPoint> out;
    out.reserve(bs.size());
    for (double b : bs) {
        const Batch batch = run_batch(p, b, cfg);
        SweepPoint pt;
        pt.B = b;
        pt.risk = {batch.risk_identity.mean, batch.risk_identity.std_err,
                   batch.n, batch.capped_fraction};
        pt.fa = {batch.fa_rb, batch.fa_ind, batch.n, batch.capped_fraction};
        out.push_back(pt);
    }
    return out;
}

}  // namespace qdd

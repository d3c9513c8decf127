// SPDX-License-Identifier: MIT
//
// Numerical workhorses: adaptive Gauss-Kronrod quadrature, bracketed
// bisection, a counter-based per-path RNG, and order-fixed reductions.
// Everything here is deterministic for fixed inputs regardless of
// threading, which the simulation reproducibility contract relies on.
#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace qdd {

struct QuadResult {
    double value = 0.0;
    double error = 0.0;  // estimated absolute error
    int evaluations = 0;
    bool converged = false;
};

// Globally adaptive 7/15 Gauss-Kronrod rule on [a, b] (a > b allowed,
// result is signed). Stops when the error estimate falls below
// max(epsabs, epsrel*|I|) or a roundoff floor; max_intervals caps the
// subdivision count.
QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     double epsrel = 1e-10, double epsabs = 0.0,
                     int max_intervals = 2000);

// As integrate(), but throws numeric_error naming the achieved error
// estimate when the tolerance was not met.
double integrate_or_throw(const std::function<double(double)>& f, double a,
                          double b, double epsrel = 1e-10, double epsabs = 0.0,
                          int max_intervals = 2000);

// Integrates with a geometric initial mesh graded toward the endpoint
// `toward` (one of a or b), for integrands with an integrable power-law
// endpoint. The first subinterval has width |b-a|*first_frac.
QuadResult integrate_graded(const std::function<double(double)>& f, double a,
                            double b, double toward, double epsrel = 1e-10,
                            double epsabs = 0.0, double first_frac = 1e-12,
                            int pieces = 24);

// Plain bisection for a sign change of f on [lo, hi]; throws
// numeric_error (with both endpoint values) when f(lo) and f(hi) have
// the same sign. Returns the midpoint of the final bracket.
double bisect(const std::function<double(double)>& f, double lo, double hi,
              double xtol, int max_iter = 200);

// Counter-based per-path random stream: the sequence is a pure function
// of (seed, path), so any thread may own any path and results do not
// depend on scheduling.
class PathRng {
public:
    PathRng(std::uint64_t seed, std::uint64_t path);
    std::uint64_t next_u64();
    double uniform();                   // in [0, 1)
    double exponential(double mean);    // mean > 0

private:
    std::uint64_t state_;
};

// Pairwise tree sum with a fixed association order; bit-identical for a
// given array regardless of how it was filled.
double tree_sum(const double* x, std::size_t n);

struct MeanStderr {
    double mean = 0.0;
    double std_err = 0.0;
};

// Two-pass mean and standard error using tree_sum for both passes.
MeanStderr mean_stderr(const std::vector<double>& x);

}  // namespace qdd

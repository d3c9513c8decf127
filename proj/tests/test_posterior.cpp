// SPDX-License-Identifier: MIT

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "qdd/errors.hpp"
#include "qdd/model.hpp"
#include "qdd/numerics.hpp"
#include "qdd/posterior.hpp"

using namespace qdd;

namespace {

ModelParams case1() { return make_params(2.0, 1.0, 0.1, 1.0, 0.1); }
ModelParams case3() { return make_params(2.0, 1.0, 0.1, 0.1, 0.1); }
ModelParams case4() { return make_params(1.0, 2.0, 0.1, 1.0, 0.1); }

// classic fourth-order Runge-Kutta on the drift, used as an in-test oracle
double rk4_flow(const ModelParams& p, double pi0, double t, int steps) {
    const double h = t / steps;
    double y = pi0;
    for (int i = 0; i < steps; ++i) {
        const double k1 = flow_drift(p, y);
        const double k2 = flow_drift(p, y + 0.5 * h * k1);
        const double k3 = flow_drift(p, y + 0.5 * h * k2);
        const double k4 = flow_drift(p, y + h * k3);
        y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return y;
}

}  // namespace

TEST_CASE("flow against reference points and an integrator") {
    CHECK(flow(case1(), 0.1, 1.0) ==
          doctest::Approx(0.13562105149390643).epsilon(1e-14));
    CHECK(flow(case4(), 0.1, 2.0) ==
          doctest::Approx(0.43039028486181297).epsilon(1e-14));

    CHECK(flow(case1(), 0.1, 1.0) ==
          doctest::Approx(rk4_flow(case1(), 0.1, 1.0, 4000)).epsilon(1e-12));
    CHECK(flow(case4(), 0.3, 2.5) ==
          doctest::Approx(rk4_flow(case4(), 0.3, 2.5, 4000)).epsilon(1e-12));

    // semigroup property
    for (double s : {0.3, 1.7}) {
        const double via = flow(case1(), flow(case1(), 0.05, s), 2.0 - s);
        CHECK(via == doctest::Approx(flow(case1(), 0.05, 2.0)).epsilon(1e-13));
    }
}

TEST_CASE("flow fixed point, absorbing state and long-time limits") {
    CHECK(flow(case1(), 0.2, 3.0) == doctest::Approx(0.2).epsilon(1e-13));
    CHECK(flow(case1(), 1.0, 5.0) == 1.0);
    CHECK(flow(case1(), 0.0, 0.0) == 0.0);

    // attracting level is lambda/rho when the drift has a root
    CHECK(flow(case1(), 0.05, 1e6) == doctest::Approx(0.2).epsilon(1e-10));
    // with lambda0 < lambda1 the posterior climbs to one
    const double far = flow(case4(), 0.5, 2000.0);
    CHECK(far <= 1.0);
    CHECK(far == doctest::Approx(1.0).epsilon(1e-12));

    CHECK_THROWS_AS((void)flow(case1(), -0.1, 1.0), std::invalid_argument);
    CHECK_THROWS_AS((void)flow(case1(), 0.1, -1.0), std::invalid_argument);
}

TEST_CASE("hit time of a rising flow") {
    const double t1 = *flow_hit_time(case1(), 0.1, 0.19);
    CHECK(t1 == doctest::Approx(5.4930614433405485).epsilon(1e-13));
    CHECK(flow(case1(), 0.1, t1) == doctest::Approx(0.19).epsilon(1e-12));

    const double t4 = *flow_hit_time(case4(), 0.1, 0.9);
    CHECK(t4 == doctest::Approx(5.8275126024441337).epsilon(1e-13));
    CHECK(flow(case4(), 0.1, t4) == doctest::Approx(0.9).epsilon(1e-12));

    CHECK(*flow_hit_time(case1(), 0.15, 0.12) == 0.0);
    // levels at or above the fixed point are unreachable by the flow
    CHECK_FALSE(flow_hit_time(case1(), 0.1, 0.2).has_value());
    CHECK_FALSE(flow_hit_time(case1(), 0.1, 0.35).has_value());
    // no fixed point below one on the rising side
    CHECK(flow_hit_time(case4(), 0.1, 0.99).has_value());

    CHECK_THROWS_AS((void)flow_hit_time(case1(), 0.0, 0.5),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)flow_hit_time(case1(), 0.5, 1.0),
                    std::invalid_argument);
}

TEST_CASE("jump update") {
    CHECK(jump_update(case1(), 0.5, std::log(2.0)) ==
          doctest::Approx(2.0 / 3.0).epsilon(1e-14));
    CHECK(jump_update(case1(), 0.0, 1.0) == 0.0);
    CHECK(jump_update(case1(), 1.0, 1.0) == 1.0);

    // moves up for lambda0 > lambda1, down otherwise
    CHECK(jump_update(case1(), 0.3, 0.7) > 0.3);
    CHECK(jump_update(case4(), 0.3, 0.7) < 0.3);

    // extreme marks saturate without leaving [0, 1]
    CHECK(jump_update(case1(), 0.5, 800.0) == doctest::Approx(1.0));
    CHECK(jump_update(case4(), 0.5, 800.0) >= 0.0);

    CHECK_THROWS_AS((void)jump_update(case1(), 0.5, -0.1),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)jump_update(case1(), 1.2, 0.1),
                    std::invalid_argument);
}

TEST_CASE("generator calibration on affine functions") {
    for (const ModelParams& p : {case1(), case3(), case4()}) {
        for (double pi : {0.05, 0.35, 0.65, 0.95}) {
            const double gi =
                apply_generator(p, [](double x) { return x; }, pi, 1e-8);
            CHECK(gi == doctest::Approx(p.lambda * (1.0 - pi)).epsilon(1e-6));
            const double gc =
                apply_generator(p, [](double x) { return 1.0 - x; }, pi, 1e-8);
            CHECK(gc ==
                  doctest::Approx(-p.lambda * (1.0 - pi)).epsilon(1e-6));
        }
    }
}

TEST_CASE("generator linearity and derivative override") {
    const ModelParams p = case1();
    auto f = [](double x) { return x * x; };
    auto g = [](double x) { return std::sin(3.0 * x); };
    auto combo = [&](double x) { return 2.0 * f(x) + 3.0 * g(x); };
    const double pi = 0.4;
    const double lhs = apply_generator(p, combo, pi, 1e-9);
    const double rhs = 2.0 * apply_generator(p, f, pi, 1e-9) +
                       3.0 * apply_generator(p, g, pi, 1e-9);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-7));

    // supplying the exact derivative only changes the drift term slightly
    std::function<double(double)> fp = [](double x) { return 2.0 * x; };
    const double with_fp = apply_generator(p, f, pi, 1e-9, &fp);
    CHECK(with_fp ==
          doctest::Approx(apply_generator(p, f, pi, 1e-9)).epsilon(1e-8));

    CHECK_THROWS_AS((void)apply_generator(p, f, 0.0, 1e-8),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)apply_generator(p, f, 0.5, -1.0),
                    std::invalid_argument);
}

TEST_CASE("direct posterior evaluation matches the recursion") {
    const ModelParams p = case1();
    // two jumps: at t=0.5 with mark 0.3, at t=1.2 with mark 1.1
    const std::vector<std::pair<double, double>> jumps = {{0.5, 0.3},
                                                          {1.2, 1.1}};
    const double j1 = jump_update(p, flow(p, 0.1, 0.5), 0.3);
    CHECK(j1 == doctest::Approx(0.15538310655649876).epsilon(1e-13));
    const double j2 = jump_update(p, flow(p, j1, 0.7), 1.1);
    CHECK(j2 == doctest::Approx(0.37543623564429902).epsilon(1e-13));

    const std::vector<std::pair<double, double>> first(jumps.begin(),
                                                       jumps.begin() + 1);
    CHECK(direct_bayes_posterior(first, 0.5, 0.1, p) ==
          doctest::Approx(j1).epsilon(1e-10));
    CHECK(direct_bayes_posterior(jumps, 1.2, 0.1, p) ==
          doctest::Approx(j2).epsilon(1e-10));

    // between jumps the direct evaluation follows the flow
    const double mid = direct_bayes_posterior(first, 1.0, 0.1, p);
    CHECK(mid == doctest::Approx(flow(p, j1, 0.5)).epsilon(1e-10));

    // no observations yet
    CHECK(direct_bayes_posterior({}, 2.0, 0.1, p) ==
          doctest::Approx(flow(p, 0.1, 2.0)).epsilon(1e-10));

    // degenerate prior
    CHECK(direct_bayes_posterior(jumps, 1.2, 1.0, p) == 1.0);
}

TEST_CASE("direct posterior on the falling side") {
    const ModelParams p = case4();
    const std::vector<std::pair<double, double>> jumps = {{0.4, 0.2},
                                                          {0.9, 2.0},
                                                          {2.0, 0.05}};
    double pi = p.pi0;
    double t = 0.0;
    std::vector<std::pair<double, double>> seen;
    for (const auto& [tk, xk] : jumps) {
        pi = jump_update(p, flow(p, pi, tk - t), xk);
        t = tk;
        seen.push_back({tk, xk});
        CHECK(direct_bayes_posterior(seen, tk, p.pi0, p) ==
              doctest::Approx(pi).epsilon(1e-10));
    }
}

TEST_CASE("direct posterior input validation") {
    const ModelParams p = case1();
    CHECK_THROWS_AS(
        (void)direct_bayes_posterior({{0.5, 0.3}, {0.4, 0.1}}, 1.0, 0.1, p),
        std::invalid_argument);
    CHECK_THROWS_AS((void)direct_bayes_posterior({{0.5, 0.3}}, 0.4, 0.1, p),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)direct_bayes_posterior({{0.5, -1.0}}, 1.0, 0.1, p),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)direct_bayes_posterior({{0.0, 0.3}}, 1.0, 0.1, p),
                    std::invalid_argument);
}

// SPDX-License-Identifier: MIT

#include "qdd.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <new>
#include <string>
#include <vector>

#include "qdd/bayes.hpp"
#include "qdd/errors.hpp"
#include "qdd/model.hpp"
#include "qdd/posterior.hpp"
#include "qdd/simulate.hpp"
#include "qdd/variational.hpp"
#include "qdd/verify.hpp"

struct qdd_model {
    qdd::ModelParams p;
};

struct qdd_bayes {
    qdd::BayesSolution s;
};

struct qdd_variational {
    qdd::VariationalSolution s;
};

namespace {

thread_local std::string g_last_error;

qdd_status fail(qdd_status code, const char* what) {
    g_last_error = what;
    return code;
}

// Runs fn, translating exceptions into status codes.
template <typename Fn>
qdd_status guarded(Fn&& fn) {
    try {
        fn();
        return QDD_OK;
    } catch (const std::invalid_argument& e) {
        return fail(QDD_INVALID_ARGUMENT, e.what());
    } catch (const qdd::numeric_error& e) {
        return fail(QDD_NUMERIC_ERROR, e.what());
    } catch (const std::bad_alloc&) {
        return fail(QDD_INTERNAL_ERROR, "out of memory");
    } catch (const std::exception& e) {
        return fail(QDD_INTERNAL_ERROR, e.what());
    }
}

qdd_status require(bool cond, const char* what) {
    return cond ? QDD_OK : fail(QDD_INVALID_ARGUMENT, what);
}

qdd::SimConfig to_config(const qdd_sim_config* cfg) {
    qdd::SimConfig out;
    if (cfg) {
        if (cfg->n_paths > 0) out.n_paths = cfg->n_paths;
        out.seed = cfg->seed;
        if (cfg->horizon_cap > 0.0) out.horizon_cap = cfg->horizon_cap;
        if (cfg->threads > 0) out.threads = cfg->threads;
    }
    return out;
}

int label_code(qdd::CaseLabel label) {
    switch (label) {
        case qdd::CaseLabel::I: return 1;
        case qdd::CaseLabel::II: return 2;
        case qdd::CaseLabel::III: return 3;
        case qdd::CaseLabel::IV: return 4;
    }
    return 0;
}

void fill_risk(const qdd::RiskEstimate& r, qdd_risk* out) {
    out->mean = r.mean;
    out->std_err = r.std_err;
    out->n = r.n;
    out->capped_fraction = r.capped_fraction;
}

void fill_false_alarm(const qdd::FalseAlarmEstimate& f, qdd_false_alarm* out) {
    out->rb_mean = f.rao_blackwell.mean;
    out->rb_std_err = f.rao_blackwell.std_err;
    out->ind_mean = f.indicator.mean;
    out->ind_std_err = f.indicator.std_err;
    out->n = f.n;
    out->capped_fraction = f.capped_fraction;
}

}  // namespace

extern "C" {

const char* qdd_version(void) { return "1.0.0"; }

const char* qdd_last_error(void) { return g_last_error.c_str(); }

qdd_status qdd_model_create(double lambda0, double lambda1, double lambda,
                            double cost, double pi0, qdd_model** out) {
    if (qdd_status s = require(out != nullptr, "out must not be null"))
        return s;
    return guarded([&] {
        auto p = qdd::make_params(lambda0, lambda1, lambda, cost, pi0);
        *out = new qdd_model{p};
    });
}

qdd_status qdd_model_from_json(const char* json_text, qdd_model** out) {
    if (qdd_status s = require(out && json_text,
                               "json_text and out must not be null"))
        return s;
    return guarded([&] {
        auto p = qdd::params_from_json(json_text);
        *out = new qdd_model{p};
    });
}

void qdd_model_free(qdd_model* m) { delete m; }

qdd_status qdd_model_get(const qdd_model* m, double* lambda0, double* lambda1,
                         double* lambda, double* cost, double* pi0) {
    if (qdd_status s = require(m != nullptr, "model must not be null"))
        return s;
    if (lambda0) *lambda0 = m->p.lambda0;
    if (lambda1) *lambda1 = m->p.lambda1;
    if (lambda) *lambda = m->p.lambda;
    if (cost) *cost = m->p.c;
    if (pi0) *pi0 = m->p.pi0;
    return QDD_OK;
}

qdd_status qdd_classify(const qdd_model* m, int* label) {
    if (qdd_status s = require(m && label, "model and label must not be null"))
        return s;
    return guarded([&] { *label = label_code(qdd::classify_case(m->p)); });
}

qdd_status qdd_thresholds(const qdd_model* m, double* b_bar, double* b_hat,
                          int* has_b_hat) {
    if (qdd_status s = require(m != nullptr, "model must not be null"))
        return s;
    return guarded([&] {
        const auto th = qdd::thresholds(m->p);
        if (b_bar) *b_bar = th.b_bar;
        if (has_b_hat) *has_b_hat = th.b_hat ? 1 : 0;
        if (b_hat && th.b_hat) *b_hat = *th.b_hat;
    });
}

qdd_status qdd_likelihood_ratio(const qdd_model* m, double x, double* out) {
    if (qdd_status s = require(m && out, "model and out must not be null"))
        return s;
    return guarded([&] { *out = qdd::likelihood_ratio(x, m->p); });
}

qdd_status qdd_lemma31_threshold(double m0, double m1, int dominates,
                                 double lambda, double cost, double* out,
                                 int* applies) {
    if (qdd_status s = require(out && applies,
                               "out and applies must not be null"))
        return s;
    return guarded([&] {
        const auto b =
            qdd::check_lemma31(m0, m1, dominates != 0, lambda, cost);
        *applies = b ? 1 : 0;
        if (b) *out = *b;
    });
}

qdd_status qdd_flow(const qdd_model* m, double pi0, double t, double* out) {
    if (qdd_status s = require(m && out, "model and out must not be null"))
        return s;
    return guarded([&] { *out = qdd::flow(m->p, pi0, t); });
}

qdd_status qdd_flow_hit_time(const qdd_model* m, double pi0, double b,
                             double* out, int* hits) {
    if (qdd_status s = require(m && out && hits,
                               "model, out and hits must not be null"))
        return s;
    return guarded([&] {
        const auto t = qdd::flow_hit_time(m->p, pi0, b);
        *hits = t ? 1 : 0;
        if (t) *out = *t;
    });
}

qdd_status qdd_jump_update(const qdd_model* m, double pi, double x,
                           double* out) {
    if (qdd_status s = require(m && out, "model and out must not be null"))
        return s;
    return guarded([&] { *out = qdd::jump_update(m->p, pi, x); });
}

qdd_status qdd_direct_posterior(const qdd_model* m, const double* times,
                                const double* marks, size_t n, double t,
                                double pi0, double grid_tol, double* out) {
    if (qdd_status s = require(m && out, "model and out must not be null"))
        return s;
    if (qdd_status s = require(n == 0 || (times && marks),
                               "times and marks must not be null"))
        return s;
    return guarded([&] {
        std::vector<std::pair<double, double>> jumps;
        jumps.reserve(n);
        for (size_t i = 0; i < n; ++i) jumps.emplace_back(times[i], marks[i]);
        *out = qdd::direct_bayes_posterior(jumps, t, pi0, m->p, grid_tol);
    });
}

qdd_status qdd_solve_bayes(const qdd_model* m, qdd_bayes** out) {
    if (qdd_status s = require(m && out, "model and out must not be null"))
        return s;
    return guarded([&] { *out = new qdd_bayes{qdd::solve_bayes(m->p)}; });
}

void qdd_bayes_free(qdd_bayes* s) { delete s; }

qdd_status qdd_bayes_summary(const qdd_bayes* s, int* label, double* b_bar,
                             double* b_hat, int* has_b_hat, double* b_star,
                             int* smooth_fit, double* left_derivative) {
    if (qdd_status st = require(s != nullptr, "solution must not be null"))
        return st;
    if (label) *label = label_code(s->s.label);
    if (b_bar) *b_bar = s->s.b_bar;
    if (has_b_hat) *has_b_hat = s->s.b_hat ? 1 : 0;
    if (b_hat && s->s.b_hat) *b_hat = *s->s.b_hat;
    if (b_star) *b_star = s->s.b_star;
    if (smooth_fit) *smooth_fit = s->s.smooth_fit ? 1 : 0;
    if (left_derivative) *left_derivative = s->s.left_derivative;
    return QDD_OK;
}

qdd_status qdd_bayes_value(const qdd_bayes* s, double pi, double* out) {
    if (qdd_status st = require(s && out,
                                "solution and out must not be null"))
        return st;
    return guarded([&] { *out = s->s.value(pi); });
}

qdd_status qdd_bayes_slope(const qdd_bayes* s, double pi, double* out) {
    if (qdd_status st = require(s && out,
                                "solution and out must not be null"))
        return st;
    return guarded([&] { *out = s->s.slope(pi); });
}

qdd_status qdd_bayes_value_grid(const qdd_bayes* s, const double* pi,
                                double* value, size_t n) {
    if (qdd_status st = require(s != nullptr, "solution must not be null"))
        return st;
    if (qdd_status st = require(n == 0 || (pi && value),
                                "pi and value must not be null"))
        return st;
    return guarded([&] {
        for (size_t i = 0; i < n; ++i) value[i] = s->s.value(pi[i]);
    });
}

qdd_status qdd_false_alarm_u(const qdd_model* m, double pi, double b,
                             double* out) {
    if (qdd_status s = require(m && out, "model and out must not be null"))
        return s;
    return guarded([&] { *out = qdd::false_alarm_u(m->p, pi, b); });
}

qdd_status qdd_solve_variational(const qdd_model* m, double alpha,
                                 qdd_variational** out) {
    if (qdd_status s = require(m && out, "model and out must not be null"))
        return s;
    return guarded([&] {
        *out = new qdd_variational{qdd::solve_variational(m->p, alpha)};
    });
}

void qdd_variational_free(qdd_variational* s) { delete s; }

qdd_status qdd_variational_summary(const qdd_variational* s, int* directive,
                                   double* b_alpha, int* has_b_alpha,
                                   double* achieved_u) {
    if (qdd_status st = require(s != nullptr, "solution must not be null"))
        return st;
    if (directive)
        *directive = s->s.directive == qdd::Directive::Threshold ? 1 : 0;
    if (has_b_alpha) *has_b_alpha = s->s.b_alpha ? 1 : 0;
    if (b_alpha && s->s.b_alpha) *b_alpha = *s->s.b_alpha;
    if (achieved_u) *achieved_u = s->s.achieved_u;
    return QDD_OK;
}

qdd_status qdd_simulate_risk(const qdd_model* m, double b, int direct,
                             const qdd_sim_config* cfg, qdd_risk* out) {
    if (qdd_status s = require(m && out, "model and out must not be null"))
        return s;
    return guarded([&] {
        const auto c = to_config(cfg);
        const auto r = direct ? qdd::estimate_risk_direct(m->p, b, c)
                              : qdd::estimate_risk_identity(m->p, b, c);
        fill_risk(r, out);
    });
}

qdd_status qdd_simulate_false_alarm(const qdd_model* m, double b,
                                    const qdd_sim_config* cfg,
                                    qdd_false_alarm* out) {
    if (qdd_status s = require(m && out, "model and out must not be null"))
        return s;
    return guarded([&] {
        fill_false_alarm(qdd::estimate_false_alarm(m->p, b, to_config(cfg)),
                         out);
    });
}

qdd_status qdd_sweep(const qdd_model* m, const double* bs, size_t n,
                     const qdd_sim_config* cfg, qdd_risk* risks,
                     qdd_false_alarm* fas) {
    if (qdd_status s = require(m != nullptr, "model must not be null"))
        return s;
    if (qdd_status s = require(n == 0 || (bs && risks && fas),
                               "bs, risks and fas must not be null"))
        return s;
    return guarded([&] {
        const std::vector<double> thresholds(bs, bs + n);
        const auto points =
            qdd::sweep_thresholds(m->p, thresholds, to_config(cfg));
        for (size_t i = 0; i < n; ++i) {
            fill_risk(points[i].risk, &risks[i]);
            fill_false_alarm(points[i].fa, &fas[i]);
        }
    });
}

qdd_status qdd_verify(const qdd_model* m, const char* name, uint64_t seed,
                      int threads, int64_t n_paths, char** report_out,
                      int* all_pass) {
    if (qdd_status s = require(m && report_out && all_pass,
                               "model, report_out and all_pass must not be null"))
        return s;
    return guarded([&] {
        const auto rep = qdd::verify_preset(name ? name : "model", m->p, seed,
                                            threads, n_paths);
        const std::string text = qdd::format_report({rep});
        char* buf = static_cast<char*>(std::malloc(text.size() + 1));
        if (!buf) throw std::bad_alloc();
        std::memcpy(buf, text.c_str(), text.size() + 1);
        *report_out = buf;
        *all_pass = rep.all_pass ? 1 : 0;
    });
}

void qdd_string_free(char* s) { std::free(s); }

}  // extern "C"

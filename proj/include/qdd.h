/* SPDX-License-Identifier: MIT */

/*
 * C interface to the quickest-detection library.  All entry points return a
 * qdd_status; results travel through out-parameters.  On failure the thread
 * local message from qdd_last_error() describes what went wrong.  Handles
 * returned through *out must be released with the matching _free call.
 */

#ifndef QDD_H
#define QDD_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum qdd_status {
    QDD_OK = 0,
    QDD_INVALID_ARGUMENT = 1,
    QDD_NUMERIC_ERROR = 2,
    QDD_INTERNAL_ERROR = 3
} qdd_status;

typedef struct qdd_model qdd_model;
typedef struct qdd_bayes qdd_bayes;
typedef struct qdd_variational qdd_variational;

const char* qdd_version(void);

/* Message for the most recent failure on this thread; never NULL. */
const char* qdd_last_error(void);

qdd_status qdd_model_create(double lambda0, double lambda1, double lambda,
                            double cost, double pi0, qdd_model** out);

/* Accepts a JSON object with exactly the keys
 * lambda0, lambda1, lambda, c, pi0. */
qdd_status qdd_model_from_json(const char* json_text, qdd_model** out);

void qdd_model_free(qdd_model* m);

qdd_status qdd_model_get(const qdd_model* m, double* lambda0, double* lambda1,
                         double* lambda, double* cost, double* pi0);

/* label: 1..4 for the four parameter regimes. */
qdd_status qdd_classify(const qdd_model* m, int* label);

/* *has_b_hat is 0 when the interior fixed point does not exist
 * (lambda0 <= lambda1); *b_hat is left untouched in that case. */
qdd_status qdd_thresholds(const qdd_model* m, double* b_bar, double* b_hat,
                          int* has_b_hat);

qdd_status qdd_likelihood_ratio(const qdd_model* m, double x, double* out);

/* Moment test for a general-mark model.  *applies is 1 and *out carries the
 * threshold when the sufficient condition holds, otherwise *applies is 0. */
qdd_status qdd_lemma31_threshold(double m0, double m1, int dominates,
                                 double lambda, double cost, double* out,
                                 int* applies);

qdd_status qdd_flow(const qdd_model* m, double pi0, double t, double* out);

/* *hits is 0 when the flow never reaches b; *out is untouched then. */
qdd_status qdd_flow_hit_time(const qdd_model* m, double pi0, double b,
                             double* out, int* hits);

qdd_status qdd_jump_update(const qdd_model* m, double pi, double x,
                           double* out);

/* times/marks describe n jumps with strictly increasing times in (0, t]. */
qdd_status qdd_direct_posterior(const qdd_model* m, const double* times,
                                const double* marks, size_t n, double t,
                                double pi0, double grid_tol, double* out);

qdd_status qdd_solve_bayes(const qdd_model* m, qdd_bayes** out);
void qdd_bayes_free(qdd_bayes* s);

qdd_status qdd_bayes_summary(const qdd_bayes* s, int* label, double* b_bar,
                             double* b_hat, int* has_b_hat, double* b_star,
                             int* smooth_fit, double* left_derivative);

qdd_status qdd_bayes_value(const qdd_bayes* s, double pi, double* out);
qdd_status qdd_bayes_slope(const qdd_bayes* s, double pi, double* out);

/* Evaluates the value function at n abscissae in one call. */
qdd_status qdd_bayes_value_grid(const qdd_bayes* s, const double* pi,
                                double* value, size_t n);

qdd_status qdd_false_alarm_u(const qdd_model* m, double pi, double b,
                             double* out);

qdd_status qdd_solve_variational(const qdd_model* m, double alpha,
                                 qdd_variational** out);
void qdd_variational_free(qdd_variational* s);

/* directive: 0 stop immediately, 1 use the threshold rule.  *has_b_alpha is
 * 0 for the stop-immediately directive. */
qdd_status qdd_variational_summary(const qdd_variational* s, int* directive,
                                   double* b_alpha, int* has_b_alpha,
                                   double* achieved_u);

typedef struct qdd_sim_config {
    int64_t n_paths;    /* <= 0: default 200000 */
    uint64_t seed;
    double horizon_cap; /* <= 0: default 50 / lambda */
    int threads;        /* <= 0: hardware concurrency */
} qdd_sim_config;

typedef struct qdd_risk {
    double mean;
    double std_err;
    int64_t n;
    double capped_fraction;
} qdd_risk;

typedef struct qdd_false_alarm {
    double rb_mean;
    double rb_std_err;
    double ind_mean;
    double ind_std_err;
    int64_t n;
    double capped_fraction;
} qdd_false_alarm;

/* direct != 0 scores paths by realised detection delay and false alarms;
 * direct == 0 uses the lower-variance running-cost form of the same risk. */
qdd_status qdd_simulate_risk(const qdd_model* m, double b, int direct,
                             const qdd_sim_config* cfg, qdd_risk* out);

qdd_status qdd_simulate_false_alarm(const qdd_model* m, double b,
                                    const qdd_sim_config* cfg,
                                    qdd_false_alarm* out);

/* Runs the simulator once per threshold with common random numbers.
 * risks and fas must each have room for n entries. */
qdd_status qdd_sweep(const qdd_model* m, const double* bs, size_t n,
                     const qdd_sim_config* cfg, qdd_risk* risks,
                     qdd_false_alarm* fas);

/* Self-check battery.  *report_out receives a malloc'd report to release
 * with qdd_string_free; *all_pass is 1 when every check passed.  The text
 * depends only on (model, seed, n_paths), never on timing or threads. */
qdd_status qdd_verify(const qdd_model* m, const char* name, uint64_t seed,
                      int threads, int64_t n_paths, char** report_out,
                      int* all_pass);

void qdd_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* QDD_H */

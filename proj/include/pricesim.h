/* pricesim — contextual posted-price mechanism with reserve prices.
 *
 * C interface to the pricing core: opaque session handles, plain error
 * codes, and batch experiment entry points. Every function returns a
 * ps_status; on failure ps_last_error() describes what went wrong
 * (thread-local, valid until the next failing call on the same thread).
 */
#ifndef PRICESIM_H
#define PRICESIM_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ps_status {
    PS_OK = 0,
    PS_ERR_INVALID_ARGUMENT = 1,
    PS_ERR_CONFIG = 2,
    PS_ERR_RUNTIME = 3
} ps_status;

typedef enum ps_link {
    PS_LINK_IDENTITY = 0,
    PS_LINK_NATURAL_EXP = 1,
    PS_LINK_LOGISTIC_SIGMOID = 2
} ps_link;

typedef enum ps_decision_kind {
    PS_DECISION_SKIP = 0,
    PS_DECISION_EXPLORATORY = 1,
    PS_DECISION_CONSERVATIVE = 2
} ps_decision_kind;

/* Opaque pricing session: knowledge set plus round counters. */
typedef struct ps_mechanism ps_mechanism;

typedef struct ps_mechanism_params {
    int32_t dim;                  /* >= 1; 1 runs the interval specialization */
    double knowledge_radius;      /* R > 0 */
    double feature_norm_bound;    /* S > 0 */
    double epsilon;               /* exploration threshold; <= 0 picks the default */
    double delta;                 /* uncertainty buffer, >= 0 */
    int32_t use_reserve;          /* nonzero: enforce posted >= reserve */
    int32_t allow_conservative_cuts; /* adversarial demonstration mode */
    int32_t link;                 /* ps_link */
    int64_t total_rounds_hint;    /* used by the epsilon default */
} ps_mechanism_params;

typedef struct ps_price_decision {
    int32_t kind;        /* ps_decision_kind */
    double posted_price; /* NaN when kind == PS_DECISION_SKIP */
    double linear_price; /* pre-link price; NaN when skipped */
    double lower_bound;  /* support of the value estimate, pre-link */
    double upper_bound;
    double halfwidth;
} ps_price_decision;

typedef struct ps_adversary_result {
    double regret_half;         /* cumulative regret, horizon T/2 run */
    double regret_full;         /* cumulative regret, horizon T run */
    double growth_ratio;        /* regret_full / regret_half */
    int64_t exploratory_half;
    int64_t exploratory_full;
} ps_adversary_result;

/* Message for the most recent failure on this thread; never NULL. */
const char* ps_last_error(void);

ps_status ps_mechanism_create(const ps_mechanism_params* params, ps_mechanism** out);
void ps_mechanism_destroy(ps_mechanism* mech);

/* Price the query (features[0..dim), reserve). Does not advance the session. */
ps_status ps_mechanism_decide(const ps_mechanism* mech, const double* features, int32_t dim,
                              double reserve, ps_price_decision* out);

/* Feed back the buyer response for a decision obtained from the current
 * round; advances the session. */
ps_status ps_mechanism_observe(ps_mechanism* mech, const double* features, int32_t dim,
                               double reserve, const ps_price_decision* decision,
                               int32_t accepted);

ps_status ps_mechanism_round(const ps_mechanism* mech, int64_t* out);
ps_status ps_mechanism_exploratory_rounds(const ps_mechanism* mech, int64_t* out);

/* Whether the weight vector theta lies in the current knowledge set. */
ps_status ps_mechanism_contains(const ps_mechanism* mech, const double* theta, int32_t dim,
                                int32_t* out);

/* 20 n^2 ln(20 R S^2 (n+1)/eps), the exploratory-round budget (n >= 2). */
ps_status ps_exploratory_round_bound(int32_t n, double knowledge_radius,
                                     double feature_norm_bound, double epsilon, double* out);

/* Default exploration threshold for (n, T, delta). */
ps_status ps_default_epsilon(int32_t n, int64_t total_rounds, double delta, double* out);

/* Runs the experiment described by the config file: all variants x repeats,
 * summary.csv + meta.txt (+ traces). output_dir overrides the config when
 * non-NULL; emit_trace: 0/1 override, -1 keeps the config value. */
ps_status ps_run_experiment(const char* config_path, const char* output_dir, int32_t emit_trace);

/* Worst-case demonstration: axis-aligned queries with midpoint reserves in
 * the first half. Runs horizons T/2 and T and reports the regret growth. */
ps_status ps_run_adversary_demo(int32_t n, int64_t total_rounds,
                                int32_t allow_conservative_cuts, ps_adversary_result* out);

#ifdef __cplusplus
}
#endif

#endif /* PRICESIM_H */

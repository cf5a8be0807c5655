/* C interface to the behavior-expectation-bounds library. */
#ifndef BEB_BEB_H
#define BEB_BEB_H

#include <stddef.h>
#include <stdint.h>

#if defined(BEB_BUILDING_LIBRARY)
#define BEB_API __attribute__((visibility("default")))
#else
#define BEB_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum beb_status {
  BEB_OK = 0,
  BEB_ERR_INVALID_ARGUMENT = 1,
  BEB_ERR_IO = 2,
  BEB_ERR_PARSE = 3,
  BEB_ERR_INVALID_MODEL = 4,
  BEB_ERR_UNSUPPORTED_PREFIX = 5,
  BEB_ERR_NOT_A_MIXTURE = 6,
  BEB_ERR_NOT_A_COMPONENT = 7,
  BEB_ERR_NOT_CERTIFIABLE = 8,
  BEB_ERR_NO_TRIGGER_AVAILABLE = 9,
  BEB_ERR_CAP_INFEASIBLE = 10,
  BEB_ERR_BUDGET_EXCEEDED = 11,
  BEB_ERR_DEGENERATE_FIT = 12,
  BEB_ERR_GENERATOR_FAILED = 13,
  BEB_ERR_VERIFICATION_FAILED = 14,
  BEB_ERR_INTERNAL = 99
} beb_status;

/* Short machine name, e.g. "unsupported-prefix". */
BEB_API const char* beb_status_name(beb_status status);

/* Message of the last failing call on this thread ("" if none). */
BEB_API const char* beb_last_error(void);

typedef struct beb_model beb_model;

/* Which distribution of a loaded mixture a call refers to. */
typedef enum beb_component {
  BEB_MIXTURE = 0,
  BEB_NEGATIVE = 1,
  BEB_POSITIVE = 2
} beb_component;

BEB_API beb_status beb_model_load(const char* path, beb_model** out);
BEB_API beb_status beb_model_load_string(const char* json, beb_model** out);
BEB_API beb_status beb_model_save(const beb_model* model, const char* path);
BEB_API void beb_model_free(beb_model* model);

BEB_API size_t beb_model_vocab_size(const beb_model* model);
BEB_API double beb_model_alpha(const beb_model* model);
/* Symbol text of sentence index i, or NULL when out of range. */
BEB_API const char* beb_model_symbol(const beb_model* model, uint32_t i);

/* Sequences are arrays of sentence indices. */
BEB_API beb_status beb_log_prob_seq(const beb_model* model, beb_component which,
                                    const uint32_t* seq, size_t len, double* out);
/* Writes vocab_size probabilities to out. */
BEB_API beb_status beb_next_dist(const beb_model* model, beb_component which,
                                 const uint32_t* prefix, size_t len, double* out, size_t out_len);
BEB_API beb_status beb_posterior_weight(const beb_model* model, const uint32_t* prefix,
                                        size_t len, double* out);
BEB_API beb_status beb_behavior_expectation(const beb_model* model, beb_component which,
                                            const uint32_t* prefix, size_t len, double* out);
/* KL(p(.|prefix) || q(.|prefix)); +inf on support violation. */
BEB_API beb_status beb_conditional_kl(const beb_model* model, beb_component p, beb_component q,
                                      const uint32_t* prefix, size_t len, double* out);

typedef struct beb_bound_params {
  double alpha;
  double beta;
  double beta_prime;
  double sigma;
  double gamma;
  double epsilon;
  double delta;
  double eta;
} beb_bound_params;

BEB_API void beb_bound_params_init(beb_bound_params* params);
BEB_API beb_status beb_theorem1_length(const beb_bound_params* params, double* out);
BEB_API beb_status beb_theorem2_length(const beb_bound_params* params, double s0_len, double* out);
/* caps_out receives n entries; total_out may be NULL. */
BEB_API beb_status beb_theorem3_budgets(const beb_bound_params* params, const double* answer_lens,
                                        size_t n, double* caps_out, double* total_out);
BEB_API beb_status beb_generalized_length(const beb_bound_params* params, double* out);
BEB_API double beb_kl_decay_bound(double alpha, double beta, double n);
BEB_API double beb_sigmoid_bound(double alpha, double beta, double n);
BEB_API beb_status beb_power_law_accumulation(double beta, double eta, size_t n, double* out);

/* One harness scenario. Strings may be NULL when unused. */
typedef struct beb_run_config {
  const char* scenario; /* validate, estimate-beta, estimate-beta-prompt, estimate-sigma, attack,
                           kl-curve, behavior-curve, converse, bounds, verify, synth */
  const char* model_path;
  const char* params_path;
  const char* out_path;
  const char* curve_out_path;
  int has_seed;
  uint64_t seed;
  size_t max_len;
  size_t trials;
  double delta;
  double epsilon;
  int reverse;
  size_t neutral_len;
  int has_prefix_len;
  size_t prefix_len;
  const char* mode; /* "greedy" or "sample" */
  size_t turns;
  size_t answer_len;
  size_t vocab;
  double alpha;
  double gamma;
  double beta;
  int order;
  int binary;
  int disjoint;
  double jitter;
  unsigned workers;
} beb_run_config;

BEB_API void beb_run_config_init(beb_run_config* config);

/* Runs the scenario, writes its artifacts and copies the one-line summary
   into summary (truncated to cap - 1 bytes). On BEB_ERR_VERIFICATION_FAILED
   the summary is still filled. */
BEB_API beb_status beb_run(const beb_run_config* config, char* summary, size_t cap);

#ifdef __cplusplus
}
#endif

#endif

#include "beb/beb.h"

#include <cmath>
#include <cstring>
#include <string>

#include "core/behavior.hpp"
#include "core/bounds.hpp"
#include "core/divergence.hpp"
#include "core/error.hpp"
#include "core/model_io.hpp"
#include "core/scenarios.hpp"

struct beb_model {
  beb::ModelBundle bundle;
};

namespace {

thread_local std::string g_last_error;

beb_status fail(beb_status st, const std::string& message) {
  g_last_error = message;
  return st;
}

template <typename Fn>
beb_status guarded(Fn&& fn) {
  try {
    g_last_error.clear();
    fn();
    return BEB_OK;
  } catch (const beb::Error& e) {
    return fail(static_cast<beb_status>(e.code()), e.what());
  } catch (const std::exception& e) {
    return fail(BEB_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(BEB_ERR_INTERNAL, "unknown failure");
  }
}

void need(const void* p, const char* what) {
  if (!p) throw beb::Error(beb::ErrorCode::kInvalidArgument, std::string(what) + " is NULL");
}

const beb::SentenceLM& pick(const beb_model* m, beb_component which) {
  need(m, "model");
  switch (which) {
    case BEB_MIXTURE: return m->bundle.model;
    case BEB_NEGATIVE: return m->bundle.model.negative();
    case BEB_POSITIVE: return m->bundle.model.positive();
  }
  throw beb::Error(beb::ErrorCode::kInvalidArgument, "unknown component selector");
}

std::span<const beb::Sentence> seq_of(const uint32_t* p, size_t len) {
  if (len > 0) need(p, "sequence");
  return {p, len};
}

beb::BoundParams to_params(const beb_bound_params* p) {
  need(p, "params");
  beb::BoundParams out;
  out.alpha = p->alpha;
  out.beta = p->beta;
  out.beta_prime = p->beta_prime;
  out.sigma = p->sigma;
  out.gamma = p->gamma;
  out.epsilon = p->epsilon;
  out.delta = p->delta;
  out.eta = p->eta;
  out.validate();
  return out;
}

std::string str(const char* s) { return s ? s : ""; }

}  // namespace

extern "C" {

const char* beb_status_name(beb_status status) {
  if (status == BEB_OK) return "ok";
  return beb::error_code_name(static_cast<beb::ErrorCode>(status)).data();
}

const char* beb_last_error(void) { return g_last_error.c_str(); }

beb_status beb_model_load(const char* path, beb_model** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new beb_model{beb::load_model(path)};
  });
}

beb_status beb_model_load_string(const char* json, beb_model** out) {
  return guarded([&] {
    need(json, "json");
    need(out, "out");
    *out = new beb_model{beb::parse_model(json)};
  });
}

beb_status beb_model_save(const beb_model* model, const char* path) {
  return guarded([&] {
    need(model, "model");
    need(path, "path");
    beb::save_model(path, model->bundle);
  });
}

void beb_model_free(beb_model* model) { delete model; }

size_t beb_model_vocab_size(const beb_model* model) { return model ? model->bundle.vocab.size() : 0; }

double beb_model_alpha(const beb_model* model) {
  return model ? model->bundle.model.alpha() : std::nan("");
}

const char* beb_model_symbol(const beb_model* model, uint32_t i) {
  if (!model || i >= model->bundle.vocab.size()) return nullptr;
  return model->bundle.vocab.symbol(i).c_str();
}

beb_status beb_log_prob_seq(const beb_model* model, beb_component which, const uint32_t* seq,
                            size_t len, double* out) {
  return guarded([&] {
    need(out, "out");
    *out = beb::log_prob_seq(pick(model, which), seq_of(seq, len));
  });
}

beb_status beb_next_dist(const beb_model* model, beb_component which, const uint32_t* prefix,
                         size_t len, double* out, size_t out_len) {
  return guarded([&] {
    need(out, "out");
    const auto& lm = pick(model, which);
    if (out_len < lm.vocab_size()) {
      throw beb::Error(beb::ErrorCode::kInvalidArgument, "output buffer smaller than vocabulary");
    }
    const auto d = beb::next_dist(lm, seq_of(prefix, len));
    std::memcpy(out, d.data(), d.size() * sizeof(double));
  });
}

beb_status beb_posterior_weight(const beb_model* model, const uint32_t* prefix, size_t len,
                                double* out) {
  return guarded([&] {
    need(out, "out");
    *out = beb::posterior_weight(pick(model, BEB_MIXTURE), seq_of(prefix, len));
  });
}

beb_status beb_behavior_expectation(const beb_model* model, beb_component which,
                                    const uint32_t* prefix, size_t len, double* out) {
  return guarded([&] {
    need(out, "out");
    *out = beb::behavior_expectation_exact(pick(model, which), seq_of(prefix, len),
                                           model->bundle.behavior);
  });
}

beb_status beb_conditional_kl(const beb_model* model, beb_component p, beb_component q,
                              const uint32_t* prefix, size_t len, double* out) {
  return guarded([&] {
    need(out, "out");
    *out = beb::conditional_kl_exact(pick(model, p), pick(model, q), seq_of(prefix, len)).value;
  });
}

void beb_bound_params_init(beb_bound_params* params) {
  if (!params) return;
  const beb::BoundParams d;
  *params = beb_bound_params{d.alpha, d.beta, d.beta_prime, d.sigma,
                             d.gamma, d.epsilon, d.delta, d.eta};
}

beb_status beb_theorem1_length(const beb_bound_params* params, double* out) {
  return guarded([&] {
    need(out, "out");
    *out = beb::theorem1_length(to_params(params));
  });
}

beb_status beb_theorem2_length(const beb_bound_params* params, double s0_len, double* out) {
  return guarded([&] {
    need(out, "out");
    *out = beb::theorem2_length(to_params(params), s0_len);
  });
}

beb_status beb_theorem3_budgets(const beb_bound_params* params, const double* answer_lens,
                                size_t n, double* caps_out, double* total_out) {
  return guarded([&] {
    need(answer_lens, "answer_lens");
    need(caps_out, "caps_out");
    const auto tb = beb::theorem3_budgets(to_params(params), std::span<const double>(answer_lens, n));
    std::memcpy(caps_out, tb.per_turn_caps.data(), n * sizeof(double));
    if (total_out) *total_out = tb.total;
  });
}

beb_status beb_generalized_length(const beb_bound_params* params, double* out) {
  return guarded([&] {
    need(out, "out");
    *out = beb::generalized_length(to_params(params));
  });
}

double beb_kl_decay_bound(double alpha, double beta, double n) {
  return beb::kl_decay_bound(alpha, beta, n);
}

double beb_sigmoid_bound(double alpha, double beta, double n) {
  return beb::sigmoid_bound(alpha, beta, n);
}

beb_status beb_power_law_accumulation(double beta, double eta, size_t n, double* out) {
  return guarded([&] {
    need(out, "out");
    *out = beb::power_law_accumulation(beta, eta, n);
  });
}

void beb_run_config_init(beb_run_config* c) {
  if (!c) return;
  const beb::ExperimentConfig d;
  std::memset(c, 0, sizeof *c);
  c->scenario = "validate";
  c->max_len = d.max_len;
  c->trials = d.trials;
  c->delta = d.delta;
  c->epsilon = d.epsilon;
  c->neutral_len = d.neutral_len;
  c->mode = "greedy";
  c->turns = d.turns;
  c->answer_len = d.answer_len;
  c->vocab = d.desk.vocab_size;
  c->alpha = d.desk.alpha;
  c->gamma = d.desk.gamma;
  c->beta = d.desk.target_beta;
  c->order = d.desk.order;
  c->jitter = d.desk.jitter;
  c->workers = d.workers;
}

beb_status beb_run(const beb_run_config* c, char* summary, size_t cap) {
  if (summary && cap > 0) summary[0] = '\0';
  auto copy_out = [&](const std::string& s) {
    if (summary && cap > 0) {
      const size_t n = std::min(cap - 1, s.size());
      std::memcpy(summary, s.data(), n);
      summary[n] = '\0';
    }
  };
  return guarded([&] {
    need(c, "config");
    beb::ExperimentConfig cfg;
    cfg.scenario = beb::parse_scenario(str(c->scenario));
    cfg.model_path = str(c->model_path);
    cfg.params_path = str(c->params_path);
    cfg.out_path = str(c->out_path);
    cfg.curve_out_path = str(c->curve_out_path);
    if (c->has_seed) cfg.seed = c->seed;
    cfg.max_len = c->max_len;
    cfg.trials = c->trials;
    cfg.delta = c->delta;
    cfg.epsilon = c->epsilon;
    cfg.reverse = c->reverse != 0;
    cfg.neutral_len = c->neutral_len;
    if (c->has_prefix_len) cfg.prefix_len = c->prefix_len;
    const std::string mode = str(c->mode);
    if (mode == "greedy" || mode.empty()) {
      cfg.mode = beb::PromptMode::kGreedy;
    } else if (mode == "sample" || mode == "sampled") {
      cfg.mode = beb::PromptMode::kSampled;
    } else {
      throw beb::Error(beb::ErrorCode::kInvalidArgument, "mode must be greedy or sample");
    }
    cfg.turns = c->turns;
    cfg.answer_len = c->answer_len;
    cfg.desk.vocab_size = c->vocab;
    cfg.desk.alpha = c->alpha;
    cfg.desk.gamma = c->gamma;
    cfg.desk.target_beta = c->beta;
    cfg.desk.order = c->order;
    cfg.desk.binary = c->binary != 0;
    cfg.desk.disjoint = c->disjoint != 0;
    cfg.desk.jitter = c->jitter;
    cfg.workers = c->workers;
    try {
      copy_out(beb::run(cfg).summary);
    } catch (const beb::Error& e) {
      if (e.code() == beb::ErrorCode::kVerificationFailed) copy_out(e.what());
      throw;
    }
  });
}

}  // extern "C"

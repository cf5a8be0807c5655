#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "core/behavior.hpp"
#include "core/lm.hpp"
#include "core/rng.hpp"

namespace beb {

// KL value; +inf when p puts mass where q has none, with that symbol flagged.
struct KlValue {
  double value = 0.0;
  std::optional<Sentence> flagged;
  bool infinite() const noexcept { return flagged.has_value(); }
};

KlValue kl_between(std::span<const double> log_p, std::span<const double> log_q);
KlValue conditional_kl(const Context& p, const Context& q);
KlValue conditional_kl_exact(const SentenceLM& p, const SentenceLM& q,
                             std::span<const Sentence> prefix);

struct LengthStat {
  std::size_t n = 0;
  double mean = 0.0;
  double standard_error = 0.0;
  std::size_t trials = 0;
};

struct EstimateReport {
  double point_estimate = 0.0;
  double standard_error = 0.0;
  std::size_t trials = 0;
  std::vector<LengthStat> per_length;
  bool infinite = false;  // some sampled value was +inf
  std::optional<Sentence> flagged;
  bool certified = false;

  // "not-beta-distinguishable-finite" when infinite, then the scope label.
  std::string label() const;
};

// Mean and standard error of a sample; +inf entries give mean +inf, NaN error.
LengthStat summarize(std::size_t n, std::span<const double> xs);

// Expected conditional KL(p || q) after prefixes s ~ p of each length
// 0..max_len. The point estimate is the minimum per-length mean.
EstimateReport estimate_beta(const SentenceLM& p, const SentenceLM& q, std::size_t max_len,
                             std::size_t trials, const RngSpec& rng, unsigned workers = 1);

// Draws the neutral part of a prompt prefix.
using NeutralSampler = std::function<SentenceSeq(Rng&)>;

// `len` sentences drawn ancestrally from `model`.
NeutralSampler neutral_from(const SentenceLM& model, std::size_t len);

// As estimate_beta, but every prefix starts with neutral sentences followed
// by one trigger drawn from p restricted to symbols with b < 0.
EstimateReport estimate_beta_prompt(const SentenceLM& p, const SentenceLM& q,
                                    const NeutralSampler& neutral, const BehaviorScore& b,
                                    std::size_t max_len, std::size_t trials, const RngSpec& rng,
                                    unsigned workers = 1);

// Per-n sample variance of ln p(s_1..s_n | prefix) / q(s_1..s_n | prefix)
// with s ~ p(.|prefix), n = 1..max_n. Point estimate is max_n var(n) / n.
EstimateReport estimate_sigma(const SentenceLM& p, const SentenceLM& q,
                              std::span<const Sentence> prefix, std::size_t max_n,
                              std::size_t trials, const RngSpec& rng, unsigned workers = 1);

struct PositivityReport {
  bool ok = true;
  SentenceSeq witness_context;
  Sentence witness_symbol = 0;
};

// pos(s|ctx) < neg(s|ctx) for every context and every s with b(s) < 0.
PositivityReport check_positivity(const SentenceLM& pos, const SentenceLM& neg,
                                  const BehaviorScore& b);

// Exact extremum of a per-state KL over a finite set of contexts.
struct CertifiedValue {
  double value = 0.0;
  SentenceSeq witness_context;
  bool infinite() const noexcept { return value == std::numeric_limits<double>::infinity(); }
};

// Contexts (last max-order sentences) reachable by walking `walker` from seeds.
std::vector<SentenceSeq> reachable_contexts(const SentenceLM& walker, std::size_t keep,
                                            const std::vector<SentenceSeq>& seeds);

// min KL(neg || pos) over states neg reaches from the empty context. Every
// prefix drawn from neg sees at least this much divergence.
CertifiedValue certify_beta(const SentenceLM& neg, const SentenceLM& pos);

// Same, over states reachable after any sentence with b < 0.
CertifiedValue certify_beta_prompt(const SentenceLM& neg, const SentenceLM& pos,
                                   const BehaviorScore& b);

// max KL(pos || neg) over states pos reaches from the empty context or from
// any context ending with a b < 0 sentence (if there are such sentences).
CertifiedValue certify_beta_prime(const SentenceLM& neg, const SentenceLM& pos,
                                  const BehaviorScore& b);

struct AbgReport {
  double alpha = 0.0;
  EstimateReport beta;
  CertifiedValue certified_beta;
  GammaCertificate gamma;
  bool gamma_ok = false;
};

AbgReport check_abg(const SentenceLM& mixture, const BehaviorScore& b, double gamma,
                    std::size_t max_len, std::size_t trials, const RngSpec& rng,
                    unsigned workers = 1);

}  // namespace beb

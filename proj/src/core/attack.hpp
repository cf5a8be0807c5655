#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "core/behavior.hpp"
#include "core/bounds.hpp"
#include "core/lm.hpp"
#include "core/rng.hpp"

namespace beb {

enum class PromptMode { kGreedy, kSampled };

const char* prompt_mode_name(PromptMode mode) noexcept;

struct PromptTrace {
  SentenceSeq prompt;
  // ln P_-(s_k | ctx) - ln P_+(s_k | ctx) for each appended sentence
  std::vector<double> per_step_log_ratio;
  double cumulative_log_ratio = 0.0;
  PromptMode mode = PromptMode::kGreedy;
  bool truncated = false;  // no admissible sentence at some step
};

// Appends `length` sentences after `start`, each the argmax of
// ln A(s|ctx) - ln P_+(s|ctx) over sentences with A(s|ctx) > 0, where A is
// the attacker (P_- when null). Ties go to the lowest index.
PromptTrace greedy_prompt(const SentenceLM& mixture, std::size_t length,
                          std::span<const Sentence> start = {},
                          const SentenceLM* attacker = nullptr);

// Draws `length` sentences ancestrally from the attacker (P_- when null).
PromptTrace sampled_prompt(const SentenceLM& mixture, std::size_t length, Rng& rng,
                           std::span<const Sentence> start = {},
                           const SentenceLM* attacker = nullptr);

struct PrefixedAttack {
  PromptTrace trace;  // trigger first, then greedy extension
  double prefix_log_ratio = 0.0;  // ln P_-(s0) / P_+(s0)
  double target_log_ratio = 0.0;
  double theorem2_length = 0.0;
  // first attack length k with B_P(s0 + attack[:k]) <= gamma + epsilon
  std::optional<std::size_t> misalignment_length;
};

// After the aligned prefix s0, inserts the negative sentence with the largest
// log ratio, then extends greedily until the attack's log ratio reaches
// beta'|s0| + sigma sqrt(|s0|/delta) + ln(1/a) + ln(1/eps) + ln 4 and the
// exact behavior is misaligned, or max_len sentences are used.
PrefixedAttack prefixed_attack(const SentenceLM& mixture, std::span<const Sentence> aligned_prefix,
                               const BehaviorScore& b, const BoundParams& params,
                               std::size_t max_len);

struct Turn {
  SentenceSeq query;
  SentenceSeq answer;
  double answer_log_ratio = 0.0;  // ln P_-(a|history) / P_+(a|history)
};

struct ConversationTranscript {
  std::vector<Turn> turns;
  std::vector<double> per_turn_caps;
  double final_behavior = 0.0;
  std::uint64_t rng_seed = 0;
  std::size_t total_query_length() const;
  std::size_t total_answer_length() const;
};

// n_turns queries q_1..q_n with model answers after q_1..q_{n-1}. Query i
// uses the floor of its theorem3_budgets cap: one trigger sentence plus greedy text.
// The cap of q_1 has no preceding answer; later caps budget answer_len.
ConversationTranscript converse(const SentenceLM& mixture, const BehaviorScore& b,
                                std::size_t n_turns, std::size_t answer_len,
                                const BoundParams& params, const RngSpec& rng);

// Behavior expectation after attack prompts of each length 0..max_len.
// Greedy: one deterministic prompt, zero error. Sampled: mean over trials.
CurveSeries misalignment_curve(const SentenceLM& mixture, const BehaviorScore& b,
                               std::size_t max_len, PromptMode mode, std::size_t trials,
                               const RngSpec& rng, unsigned workers = 1);

// Mean KL(P_-(.|s) || P(.|s)) over prompts s ~ P_- of each length 0..max_len.
CurveSeries kl_decay_curve(const SentenceLM& mixture, std::size_t max_len, std::size_t trials,
                           const RngSpec& rng, unsigned workers = 1);

// Length where the curve first crosses halfway between its first and last
// values, by linear interpolation.
std::optional<double> curve_midpoint(const CurveSeries& curve);

}  // namespace beb

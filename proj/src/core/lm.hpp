#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "core/rng.hpp"

namespace beb {

// A sentence is an atom of the vocabulary; a prompt is a sequence of them.
using Sentence = std::uint32_t;
using SentenceSeq = std::vector<Sentence>;

inline constexpr std::size_t kMaxVocab = 1024;
inline constexpr double kRowSumTolerance = 1e-9;

class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> symbols);

  std::size_t size() const noexcept { return symbols_.size(); }
  const std::string& symbol(Sentence i) const;
  std::optional<Sentence> index_of(std::string_view symbol) const;
  std::span<const std::string> symbols() const noexcept { return symbols_; }
  std::string render(std::span<const Sentence> seq) const;

 private:
  std::vector<std::string> symbols_;
  std::unordered_map<std::string, Sentence> index_;
};

enum class ModelKind { kCategorical, kMarkov, kMixture };

class Context;

// Immutable sentence-level language model. Copies share the same payload,
// so a model can be handed to any number of workers.
class SentenceLM {
 public:
  // Empty placeholder; only assignment and empty() are valid on it.
  SentenceLM() = default;
  bool empty() const noexcept { return impl_ == nullptr; }

  static SentenceLM categorical(std::vector<double> probs);

  // rows[0] is the empty-prefix (initial) distribution. Order 1 adds one row
  // per last sentence i at 1 + i. Order 2 also keeps those rows for
  // one-sentence prefixes and adds rows for (i, j) at 1 + m + i * m + j.
  static SentenceLM markov(int order, std::vector<std::vector<double>> rows);

  static SentenceLM mixture(double alpha, SentenceLM negative, SentenceLM positive);

  ModelKind kind() const noexcept;
  bool is_finite_state() const noexcept { return kind() != ModelKind::kMixture; }
  std::size_t vocab_size() const noexcept;

  // Finite-state accessors.
  int order() const;
  std::size_t state_count() const;
  std::size_t state_of(std::span<const Sentence> context) const;
  SentenceSeq state_context(std::size_t state) const;
  std::span<const double> row_probs(std::size_t state) const;
  std::span<const double> row_log_probs(std::size_t state) const;

  // Mixture accessors.
  double alpha() const;
  const SentenceLM& negative() const;
  const SentenceLM& positive() const;

  Context start() const;

 private:
  struct FiniteState;
  struct Mixture;
  struct Impl;

  explicit SentenceLM(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

  const FiniteState& finite() const;
  const Mixture& mix() const;

  std::shared_ptr<const Impl> impl_;

  friend class Context;
};

std::size_t state_count_for(int order, std::size_t vocab_size);

// Validates one next-sentence distribution (length m, non-negative, sums to
// 1 +/- 1e-9) and renormalizes it in place. Errors carry `name`.
void check_row(std::vector<double>& row, std::size_t m, const std::string& name);

// Incremental conditioning state: log P(prefix) and everything needed for
// the next-sentence distribution, updated one sentence at a time.
class Context {
 public:
  explicit Context(const SentenceLM& model);

  const SentenceLM& model() const noexcept { return model_; }
  std::size_t length() const noexcept { return length_; }
  double log_prob() const;
  void push(Sentence s);

  // Log conditional next-sentence distribution. For finite-state models this
  // is the state row even when the prefix itself has probability zero; a
  // mixture needs log_prob() > -inf to define its component weights.
  std::vector<double> next_log_dist() const;
  void next_log_dist(std::span<double> out) const;
  double next_log_prob(Sentence s) const;

  // Mixture only: log of the conditional prior of the negative component.
  double negative_log_weight() const;
  const Context& component(std::size_t i) const;

  // Finite-state only.
  std::size_t state() const;

 private:
  SentenceLM model_;
  std::size_t length_ = 0;
  // finite-state
  double log_prob_ = 0.0;
  std::int64_t prev_ = -1;
  std::int64_t last_ = -1;
  // mixture
  std::vector<Context> children_;
};

// log P(seq); -inf when some sentence is impossible.
double log_prob_seq(const SentenceLM& model, std::span<const Sentence> seq);

// Context after `prefix`, requiring P(prefix) > 0; otherwise throws
// unsupported-prefix naming the first impossible sentence.
Context supported_context(const SentenceLM& model, std::span<const Sentence> prefix);

std::vector<double> next_dist(const SentenceLM& model, std::span<const Sentence> prefix);

double posterior_weight(const SentenceLM& model, std::span<const Sentence> prefix);

// Ancestral sampling of n sentences after `prefix`.
SentenceSeq sample_seq(const SentenceLM& model, std::span<const Sentence> prefix, std::size_t n,
                       Rng& rng);

// Draw one sentence from a context, advancing nothing.
Sentence sample_next(const Context& ctx, Rng& rng);

}  // namespace beb

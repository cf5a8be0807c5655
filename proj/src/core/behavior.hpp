#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "core/lm.hpp"
#include "core/rng.hpp"

namespace beb {

// Ground-truth score per vocabulary symbol, each in [-1, 1].
class BehaviorScore {
 public:
  BehaviorScore() = default;
  explicit BehaviorScore(std::vector<double> table);

  std::size_t size() const noexcept { return table_.size(); }
  double operator[](Sentence s) const { return table_.at(s); }
  std::span<const double> values() const noexcept { return table_; }
  double min() const;
  double max() const;
  bool is_negative(Sentence s) const { return table_.at(s) < 0.0; }
  std::vector<Sentence> negatives() const;

 private:
  std::vector<double> table_;
};

// E_{s ~ P(.|ctx)}[b(s)].
double behavior_expectation(const Context& ctx, const BehaviorScore& b);

double behavior_expectation_exact(const SentenceLM& model, std::span<const Sentence> prefix,
                                  const BehaviorScore& b);

struct McEstimate {
  double estimate = 0.0;
  double standard_error = 0.0;  // NaN when trials == 1
  std::size_t trials = 0;
};

McEstimate behavior_expectation_mc(const SentenceLM& model, std::span<const Sentence> prefix,
                                   const BehaviorScore& b, std::size_t trials, const RngSpec& rng);

struct GammaCertificate {
  bool ok = false;
  double max_expectation = 0.0;
  std::size_t witness_state = 0;
  SentenceSeq witness_context;  // the state attaining max_expectation
};

// Checks B_{P}(s*) <= gamma over every conditioning state of a finite-state
// model (all contexts of length <= order), which is the exact sup over s*.
GammaCertificate certify_gamma_negative(const SentenceLM& component, const BehaviorScore& b,
                                        double gamma);

}  // namespace beb

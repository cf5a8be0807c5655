#include "core/behavior.hpp"

#include <cmath>
#include <limits>

#include "core/error.hpp"

namespace beb {

BehaviorScore::BehaviorScore(std::vector<double> table) : table_(std::move(table)) {
  for (std::size_t i = 0; i < table_.size(); ++i) {
    if (!std::isfinite(table_[i]) || table_[i] < -1.0 || table_[i] > 1.0) {
      throw Error(ErrorCode::kInvalidModel,
                  "behavior score for symbol " + std::to_string(i) + " outside [-1, 1]");
    }
  }
}

double BehaviorScore::min() const { return *std::min_element(table_.begin(), table_.end()); }
double BehaviorScore::max() const { return *std::max_element(table_.begin(), table_.end()); }

std::vector<Sentence> BehaviorScore::negatives() const {
  std::vector<Sentence> out;
  for (std::size_t i = 0; i < table_.size(); ++i) {
    if (table_[i] < 0.0) out.push_back(static_cast<Sentence>(i));
  }
  return out;
}

namespace {

void check_size(const SentenceLM& model, const BehaviorScore& b) {
  if (b.size() != model.vocab_size()) {
    throw Error(ErrorCode::kInvalidArgument, "behavior table has " + std::to_string(b.size()) +
                                                 " entries for a vocabulary of " +
                                                 std::to_string(model.vocab_size()));
  }
}

}  // namespace

double behavior_expectation(const Context& ctx, const BehaviorScore& b) {
  const std::vector<double> lp = ctx.next_log_dist();
  double acc = 0.0;
  for (std::size_t s = 0; s < lp.size(); ++s) {
    if (lp[s] != -std::numeric_limits<double>::infinity()) acc += std::exp(lp[s]) * b[s];
  }
  return acc;
}

double behavior_expectation_exact(const SentenceLM& model, std::span<const Sentence> prefix,
                                  const BehaviorScore& b) {
  check_size(model, b);
  return behavior_expectation(supported_context(model, prefix), b);
}

McEstimate behavior_expectation_mc(const SentenceLM& model, std::span<const Sentence> prefix,
                                   const BehaviorScore& b, std::size_t trials,
                                   const RngSpec& rng) {
  if (trials < 1) throw Error(ErrorCode::kInvalidArgument, "trials must be >= 1");
  check_size(model, b);
  const Context ctx = supported_context(model, prefix);
  std::vector<double> p = ctx.next_log_dist();
  for (double& v : p) v = std::exp(v);
  Rng gen = rng.stream(0);
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    const double x = b[static_cast<Sentence>(gen.categorical(p))];
    sum += x;
    sum_sq += x * x;
  }
  McEstimate out;
  out.trials = trials;
  out.estimate = sum / static_cast<double>(trials);
  if (trials == 1) {
    out.standard_error = std::numeric_limits<double>::quiet_NaN();
  } else {
    const double n = static_cast<double>(trials);
    const double var = std::max(0.0, (sum_sq - n * out.estimate * out.estimate) / (n - 1.0));
    out.standard_error = std::sqrt(var / n);
  }
  return out;
}

GammaCertificate certify_gamma_negative(const SentenceLM& component, const BehaviorScore& b,
                                        double gamma) {
  if (!component.is_finite_state()) {
    throw Error(ErrorCode::kNotAComponent,
                "gamma certification needs a categorical or markov component");
  }
  check_size(component, b);
  GammaCertificate out;
  out.max_expectation = -std::numeric_limits<double>::infinity();
  for (std::size_t st = 0; st < component.state_count(); ++st) {
    const auto row = component.row_probs(st);
    double e = 0.0;
    double mass = 0.0;
    for (std::size_t s = 0; s < row.size(); ++s) {
      e += row[s] * b[static_cast<Sentence>(s)];
      mass += row[s];
    }
    // rows sum to 1 only up to rounding
    e /= mass;
    if (e > out.max_expectation) {
      out.max_expectation = e;
      out.witness_state = st;
    }
  }
  out.witness_context = component.state_context(out.witness_state);
  out.ok = out.max_expectation <= gamma;
  return out;
}

}  // namespace beb

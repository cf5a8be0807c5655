#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "core/lm.hpp"

namespace beb {

struct BoundParams {
  double alpha = 0.5;
  double beta = 1.0;
  double beta_prime = 0.0;
  double sigma = 0.0;
  double gamma = -1.0;
  double epsilon = 0.1;
  double delta = 0.1;
  double eta = 0.0;

  void validate() const;
  // theorem2/theorem3 lengths are still evaluated when this holds, but flagged.
  bool beta_prime_below_beta() const noexcept { return beta_prime < beta; }
  double log_inv_alpha() const { return -std::log(alpha); }
  double log_inv_epsilon() const { return -std::log(epsilon); }
};

// (ln 1/a + ln 1/eps + ln 4) / beta
double theorem1_length(const BoundParams& p);

// theorem1_length + (beta'/beta)|s0| + (sigma/beta) sqrt(|s0|/delta) + 1
double theorem2_length(const BoundParams& p, double s0_len);

struct TurnBudgets {
  std::vector<double> per_turn_caps;
  double total = 0.0;
};

// Per-turn query caps for n = answer_lens.size() turns and the total length
// L1 + sum_i ((beta'/beta)|a_i| + (sigma/beta) sqrt(n|a_i|/delta)) + n.
TurnBudgets theorem3_budgets(const BoundParams& p, std::span<const double> answer_lens);

// max{2 * theorem1_length, 4 sigma^2 / (beta^2 delta)}
double generalized_length(const BoundParams& p);

// ln(1 + e^{ln(1/a) - beta n})
double kl_decay_bound(double alpha, double beta, double n);

// 1 / (1 + e^{beta n - ln(1/a)})
double sigmoid_bound(double alpha, double beta, double n);

// sum_{k=1}^{n} beta / k^eta
double power_law_accumulation(double beta, double eta, std::size_t n);

struct LemmaBounds {
  // ((1-a)/a) * P_+(s0) / P_-(s0)
  double prefactor = 0.0;
  // per symbol: prefactor * max{P_+(s|s0) / P_-(s|s0), 1}
  std::vector<double> ratio_bound;
  // 2 * prefactor
  double behavior_gap_bound = 0.0;
};

LemmaBounds lemma_bounds(const SentenceLM& mixture, std::span<const Sentence> prefix);

struct CurvePoint {
  double n = 0.0;
  double value = 0.0;
  double standard_error = 0.0;
};

struct LineFit {
  // value ~ intercept - slope * n over points [first, last]
  double intercept = 0.0;
  double slope = 0.0;
  std::size_t first = 0;
  std::size_t last = 0;
  std::vector<double> residuals;

  double log_inv_alpha_hat() const noexcept { return intercept; }
  double alpha_hat() const { return std::exp(-intercept); }
  double beta_hat() const noexcept { return slope; }
};

struct CurveSeries {
  std::vector<CurvePoint> points;
  std::optional<LineFit> fit;
};

// Longest initial run of points with value >= ln 2, widened to the first two
// points when shorter. Returns inclusive point indices.
std::pair<std::size_t, std::size_t> default_fit_range(const CurveSeries& curve);

LineFit fit_alpha_beta(const CurveSeries& curve, std::pair<std::size_t, std::size_t> range);
LineFit fit_alpha_beta(const CurveSeries& curve);

}  // namespace beb

#include "core/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "core/error.hpp"
#include "core/logspace.hpp"

namespace beb {

namespace {

const double kLn4 = 2.0 * std::numbers::ln2;

void require(bool ok, const char* message) {
  if (!ok) throw Error(ErrorCode::kInvalidArgument, message);
}

}  // namespace

void BoundParams::validate() const {
  require(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0, 1)");
  require(beta > 0.0 && std::isfinite(beta), "beta must be positive and finite");
  require(beta_prime >= 0.0 && std::isfinite(beta_prime), "beta_prime must be >= 0 and finite");
  require(sigma >= 0.0 && std::isfinite(sigma), "sigma must be >= 0 and finite");
  require(gamma >= -1.0 && gamma < 0.0, "gamma must lie in [-1, 0)");
  require(epsilon > 0.0 && std::isfinite(epsilon), "epsilon must be positive");
  require(delta > 0.0 && delta < 1.0, "delta must lie in (0, 1)");
  require(eta >= 0.0 && eta < 1.0, "eta must lie in [0, 1)");
}

double theorem1_length(const BoundParams& p) {
  return (p.log_inv_alpha() + p.log_inv_epsilon() + kLn4) / p.beta;
}

double theorem2_length(const BoundParams& p, double s0_len) {
  require(s0_len >= 0.0, "prefix length must be >= 0");
  return theorem1_length(p) + p.beta_prime / p.beta * s0_len +
         p.sigma / p.beta * std::sqrt(s0_len / p.delta) + 1.0;
}

TurnBudgets theorem3_budgets(const BoundParams& p, std::span<const double> answer_lens) {
  require(!answer_lens.empty(), "need at least one turn");
  const double n = static_cast<double>(answer_lens.size());
  const double l1 = theorem1_length(p);
  TurnBudgets out;
  double extra = 0.0;
  for (double a : answer_lens) {
    require(a >= 0.0, "answer lengths must be >= 0");
    const double e = p.beta_prime / p.beta * a + p.sigma / p.beta * std::sqrt(n * a / p.delta);
    extra += e;
    out.per_turn_caps.push_back(e + l1 / n + 1.0);
  }
  out.total = l1 + extra + n;
  return out;
}

double generalized_length(const BoundParams& p) {
  return std::max(2.0 * theorem1_length(p),
                  4.0 * p.sigma * p.sigma / (p.beta * p.beta * p.delta));
}

double kl_decay_bound(double alpha, double beta, double n) {
  return softplus(-std::log(alpha) - (n == 0.0 ? 0.0 : beta * n));
}

double sigmoid_bound(double alpha, double beta, double n) {
  return 1.0 / (1.0 + std::exp((n == 0.0 ? 0.0 : beta * n) + std::log(alpha)));
}

double power_law_accumulation(double beta, double eta, std::size_t n) {
  require(eta >= 0.0 && eta < 1.0, "eta must lie in [0, 1)");
  if (eta == 0.0) return beta * static_cast<double>(n);
  double acc = 0.0;
  for (std::size_t k = 1; k <= n; ++k) acc += beta / std::pow(static_cast<double>(k), eta);
  return acc;
}

LemmaBounds lemma_bounds(const SentenceLM& mixture, std::span<const Sentence> prefix) {
  const double alpha = mixture.alpha();
  const Context c0 = supported_context(mixture.negative(), prefix);
  Context c1 = mixture.positive().start();
  for (Sentence s : prefix) c1.push(s);
  const std::size_t m = mixture.vocab_size();
  LemmaBounds out;
  out.ratio_bound.assign(m, 0.0);
  if (c1.log_prob() == kNegInf) return out;
  out.prefactor = std::exp(std::log1p(-alpha) - std::log(alpha) + c1.log_prob() - c0.log_prob());
  out.behavior_gap_bound = 2.0 * out.prefactor;
  const std::vector<double> l0 = c0.next_log_dist();
  const std::vector<double> l1 = c1.next_log_dist();
  for (std::size_t s = 0; s < m; ++s) {
    double ratio = 1.0;
    if (l0[s] == kNegInf) {
      ratio = l1[s] == kNegInf ? 1.0 : kPosInf;
    } else if (l1[s] != kNegInf) {
      ratio = std::max(std::exp(l1[s] - l0[s]), 1.0);
    }
    out.ratio_bound[s] = out.prefactor * ratio;
  }
  return out;
}

std::pair<std::size_t, std::size_t> default_fit_range(const CurveSeries& curve) {
  if (curve.points.size() < 2) {
    throw Error(ErrorCode::kDegenerateFit, "a line fit needs at least two points");
  }
  std::size_t last = 0;
  while (last + 1 < curve.points.size() && curve.points[last + 1].value >= std::numbers::ln2) {
    ++last;
  }
  if (curve.points[0].value < std::numbers::ln2 || last < 1) last = 1;
  return {0, last};
}

LineFit fit_alpha_beta(const CurveSeries& curve, std::pair<std::size_t, std::size_t> range) {
  const auto [first, last] = range;
  if (last >= curve.points.size() || first >= last) {
    throw Error(ErrorCode::kDegenerateFit, "fit range must cover at least two observed points");
  }
  const double k = static_cast<double>(last - first + 1);
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = first; i <= last; ++i) {
    mx += curve.points[i].n;
    my += curve.points[i].value;
  }
  mx /= k;
  my /= k;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = first; i <= last; ++i) {
    const double dx = curve.points[i].n - mx;
    sxx += dx * dx;
    sxy += dx * (curve.points[i].value - my);
  }
  if (!(sxx > 0.0)) throw Error(ErrorCode::kDegenerateFit, "all lengths in the fit range are equal");
  LineFit fit;
  fit.first = first;
  fit.last = last;
  fit.slope = -sxy / sxx;
  fit.intercept = my + fit.slope * mx;
  for (std::size_t i = first; i <= last; ++i) {
    fit.residuals.push_back(curve.points[i].value - (fit.intercept - fit.slope * curve.points[i].n));
  }
  return fit;
}

LineFit fit_alpha_beta(const CurveSeries& curve) {
  return fit_alpha_beta(curve, default_fit_range(curve));
}

}  // namespace beb

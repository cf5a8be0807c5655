#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

namespace beb {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kPosInf = std::numeric_limits<double>::infinity();

// log(e^a + e^b); -inf operands are absorbed.
inline double log_sum_exp(double a, double b) noexcept {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b);
  const double lo = std::min(a, b);
  return hi + std::log1p(std::exp(lo - hi));
}

inline double log_sum_exp(std::span<const double> xs) noexcept {
  double hi = kNegInf;
  for (double x : xs) hi = std::max(hi, x);
  if (hi == kNegInf) return kNegInf;
  double acc = 0.0;
  for (double x : xs) acc += std::exp(x - hi);
  return hi + std::log(acc);
}

inline double safe_log(double p) noexcept { return p > 0.0 ? std::log(p) : kNegInf; }

// log(1 + e^x) without overflow.
inline double softplus(double x) noexcept {
  if (x > 35.0) return x + std::exp(-x);
  return std::log1p(std::exp(x));
}

}  // namespace beb

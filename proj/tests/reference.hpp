#pragma once

// Reference evaluators for tests. They read raw transition rows and do plain
// linear-space arithmetic, sharing no code path with Context.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "core/lm.hpp"

namespace ref {

using beb::Sentence;
using beb::SentenceLM;
using beb::SentenceSeq;

// Row index of a finite-state component after `ctx`, from the documented layout.
inline std::size_t row_index(const SentenceLM& c, const SentenceSeq& ctx) {
  const std::size_t m = c.vocab_size();
  const int k = c.order();
  const std::size_t len = ctx.size();
  if (k == 0 || len == 0) return 0;
  if (k == 1 || len == 1) return 1 + ctx[len - 1];
  return 1 + m + static_cast<std::size_t>(ctx[len - 2]) * m + ctx[len - 1];
}

inline std::vector<double> component_next(const SentenceLM& c, const SentenceSeq& ctx) {
  auto row = c.row_probs(row_index(c, ctx));
  return {row.begin(), row.end()};
}

inline double component_prob(const SentenceLM& c, const SentenceSeq& seq) {
  double p = 1.0;
  SentenceSeq ctx;
  for (Sentence s : seq) {
    p *= component_next(c, ctx)[s];
    ctx.push_back(s);
  }
  return p;
}

struct MixtureView {
  double w_neg = 0.0;
  std::vector<double> neg, pos, mix;
};

// Conditional prior and next distribution from the reweighting formula.
inline MixtureView mixture_next(const SentenceLM& mix, const SentenceSeq& prefix) {
  const double a = mix.alpha();
  const double pn = component_prob(mix.negative(), prefix);
  const double pp = component_prob(mix.positive(), prefix);
  MixtureView v;
  if (pp == 0.0) {
    v.w_neg = 1.0;
  } else if (pn == 0.0) {
    v.w_neg = 0.0;
  } else {
    v.w_neg = 1.0 / (1.0 + ((1.0 - a) / a) * (pp / pn));
  }
  v.neg = component_next(mix.negative(), prefix);
  v.pos = component_next(mix.positive(), prefix);
  v.mix.resize(v.neg.size());
  for (std::size_t i = 0; i < v.neg.size(); ++i)
    v.mix[i] = v.w_neg * v.neg[i] + (1.0 - v.w_neg) * v.pos[i];
  return v;
}

inline double prob(const SentenceLM& model, const SentenceSeq& seq) {
  if (model.kind() != beb::ModelKind::kMixture) return component_prob(model, seq);
  const double a = model.alpha();
  return a * component_prob(model.negative(), seq) +
         (1.0 - a) * component_prob(model.positive(), seq);
}

inline std::vector<double> next(const SentenceLM& model, const SentenceSeq& prefix) {
  if (model.kind() != beb::ModelKind::kMixture) return component_next(model, prefix);
  return mixture_next(model, prefix).mix;
}

inline double kl(const std::vector<double>& p, const std::vector<double>& q) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    if (q[i] == 0.0) return INFINITY;
    s += p[i] * std::log(p[i] / q[i]);
  }
  return s;
}

inline double expectation(const std::vector<double>& p, const std::vector<double>& f) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += p[i] * f[i];
  return s;
}

// Calls fn(seq) for every sequence of length n over m symbols.
template <typename Fn>
void for_each_seq(std::size_t m, std::size_t n, Fn&& fn) {
  SentenceSeq seq(n, 0);
  for (;;) {
    fn(static_cast<const SentenceSeq&>(seq));
    std::size_t i = n;
    while (i > 0) {
      --i;
      if (++seq[i] < m) break;
      seq[i] = 0;
      if (i == 0) return;
    }
    if (n == 0) return;
  }
}

// E_{s ~ p, |s| = n} f(s)
template <typename Fn>
double expect_over(const SentenceLM& p, std::size_t n, Fn&& f) {
  double s = 0.0;
  for_each_seq(p.vocab_size(), n, [&](const SentenceSeq& seq) {
    const double w = prob(p, seq);
    if (w > 0.0) s += w * f(seq);
  });
  return s;
}

// Average ranks, then Pearson correlation of the ranks.
inline std::vector<double> ranks(const std::vector<double>& x) {
  std::vector<std::size_t> idx(x.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> r(x.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && x[idx[j + 1]] == x[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  const auto rx = ranks(x), ry = ranks(y);
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += rx[i], my += ry[i];
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace ref

#include "core/divergence.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "core/error.hpp"
#include "core/logspace.hpp"
#include "core/parallel.hpp"

namespace beb {

KlValue kl_between(std::span<const double> log_p, std::span<const double> log_q) {
  KlValue out;
  double acc = 0.0;
  for (std::size_t s = 0; s < log_p.size(); ++s) {
    if (log_p[s] == kNegInf) continue;
    if (log_q[s] == kNegInf) {
      out.value = kPosInf;
      out.flagged = static_cast<Sentence>(s);
      return out;
    }
    acc += std::exp(log_p[s]) * (log_p[s] - log_q[s]);
  }
  out.value = std::max(acc, 0.0);
  return out;
}

KlValue conditional_kl(const Context& p, const Context& q) {
  const std::vector<double> lp = p.next_log_dist();
  const std::vector<double> lq = q.next_log_dist();
  return kl_between(lp, lq);
}

KlValue conditional_kl_exact(const SentenceLM& p, const SentenceLM& q,
                             std::span<const Sentence> prefix) {
  if (p.vocab_size() != q.vocab_size()) {
    throw Error(ErrorCode::kInvalidArgument, "models disagree on vocabulary size");
  }
  return conditional_kl(supported_context(p, prefix), supported_context(q, prefix));
}

std::string EstimateReport::label() const {
  std::string scope = certified ? "certified" : "sampled, not certified";
  if (infinite) return "not-beta-distinguishable-finite; " + scope;
  return scope;
}

LengthStat summarize(std::size_t n, std::span<const double> xs) {
  LengthStat st;
  st.n = n;
  st.trials = xs.size();
  if (xs.empty()) {
    st.mean = std::numeric_limits<double>::quiet_NaN();
    st.standard_error = std::numeric_limits<double>::quiet_NaN();
    return st;
  }
  double sum = 0.0;
  for (double x : xs) sum += x;
  const double t = static_cast<double>(xs.size());
  st.mean = sum / t;
  if (!std::isfinite(st.mean) || xs.size() < 2) {
    st.standard_error = std::numeric_limits<double>::quiet_NaN();
    return st;
  }
  double ss = 0.0;
  for (double x : xs) ss += (x - st.mean) * (x - st.mean);
  st.standard_error = std::sqrt(ss / (t - 1.0) / t);
  return st;
}

namespace {

void require_trials(std::size_t trials) {
  if (trials < 2) throw Error(ErrorCode::kInvalidArgument, "trials must be >= 2");
}

void require_same_vocab(const SentenceLM& p, const SentenceLM& q) {
  if (p.vocab_size() != q.vocab_size()) {
    throw Error(ErrorCode::kInvalidArgument, "models disagree on vocabulary size");
  }
}

// values[t * (max_len + 1) + n] holds the KL after n sentences in trial t.
EstimateReport reduce_per_length(const std::vector<double>& values,
                                 const std::vector<std::optional<Sentence>>& flags,
                                 std::size_t max_len, std::size_t trials) {
  EstimateReport rep;
  rep.trials = trials;
  const std::size_t width = max_len + 1;
  std::vector<double> column(trials);
  for (std::size_t n = 0; n <= max_len; ++n) {
    for (std::size_t t = 0; t < trials; ++t) column[t] = values[t * width + n];
    rep.per_length.push_back(summarize(n, column));
  }
  for (std::size_t t = 0; t < trials && !rep.flagged; ++t) rep.flagged = flags[t];
  rep.infinite = rep.flagged.has_value();
  std::size_t best = 0;
  for (std::size_t i = 1; i < rep.per_length.size(); ++i) {
    if (rep.per_length[i].mean < rep.per_length[best].mean) best = i;
  }
  rep.point_estimate = rep.per_length[best].mean;
  rep.standard_error = rep.per_length[best].standard_error;
  return rep;
}

// KL after each of max_len + 1 prefix lengths along one sampled continuation.
void kl_along_path(Context cp, Context cq, std::size_t max_len, Rng& rng, double* out,
                   std::optional<Sentence>& flag) {
  for (std::size_t n = 0; n <= max_len; ++n) {
    const KlValue kl = conditional_kl(cp, cq);
    out[n] = kl.value;
    if (kl.infinite() && !flag) flag = kl.flagged;
    if (n == max_len) break;
    const Sentence s = sample_next(cp, rng);
    cp.push(s);
    cq.push(s);
  }
}

}  // namespace

EstimateReport estimate_beta(const SentenceLM& p, const SentenceLM& q, std::size_t max_len,
                             std::size_t trials, const RngSpec& rng, unsigned workers) {
  require_trials(trials);
  require_same_vocab(p, q);
  std::vector<double> values(trials * (max_len + 1));
  std::vector<std::optional<Sentence>> flags(trials);
  parallel_for(trials, workers, [&](std::size_t t) {
    Rng r = rng.stream(t);
    kl_along_path(p.start(), q.start(), max_len, r, &values[t * (max_len + 1)], flags[t]);
  });
  return reduce_per_length(values, flags, max_len, trials);
}

NeutralSampler neutral_from(const SentenceLM& model, std::size_t len) {
  return [model, len](Rng& rng) { return sample_seq(model, {}, len, rng); };
}

EstimateReport estimate_beta_prompt(const SentenceLM& p, const SentenceLM& q,
                                    const NeutralSampler& neutral, const BehaviorScore& b,
                                    std::size_t max_len, std::size_t trials, const RngSpec& rng,
                                    unsigned workers) {
  require_trials(trials);
  require_same_vocab(p, q);
  const std::vector<Sentence> negatives = b.negatives();
  if (negatives.empty()) {
    throw Error(ErrorCode::kNoTriggerAvailable, "no symbol has a negative behavior score");
  }
  std::vector<double> values(trials * (max_len + 1));
  std::vector<std::optional<Sentence>> flags(trials);
  parallel_for(trials, workers, [&](std::size_t t) {
    Rng r = rng.stream(t);
    SentenceSeq prefix = neutral ? neutral(r) : SentenceSeq{};
    Context cp = p.start();
    for (Sentence s : prefix) cp.push(s);
    const std::vector<double> lp = cp.next_log_dist();
    std::vector<double> w(negatives.size());
    double total = 0.0;
    for (std::size_t i = 0; i < negatives.size(); ++i) {
      w[i] = std::exp(lp[negatives[i]]);
      total += w[i];
    }
    const Sentence trigger = total > 0.0 ? negatives[r.categorical(w)] : negatives.front();
    prefix.push_back(trigger);
    Context cq = q.start();
    cp.push(trigger);
    for (Sentence s : prefix) cq.push(s);
    kl_along_path(std::move(cp), std::move(cq), max_len, r, &values[t * (max_len + 1)], flags[t]);
  });
  return reduce_per_length(values, flags, max_len, trials);
}

EstimateReport estimate_sigma(const SentenceLM& p, const SentenceLM& q,
                              std::span<const Sentence> prefix, std::size_t max_n,
                              std::size_t trials, const RngSpec& rng, unsigned workers) {
  require_trials(trials);
  require_same_vocab(p, q);
  if (max_n < 1) throw Error(ErrorCode::kInvalidArgument, "sigma needs n >= 1");
  const Context base_p = supported_context(p, prefix);
  const Context base_q = supported_context(q, prefix);
  std::vector<double> ratio(trials * max_n);
  std::vector<std::optional<Sentence>> flags(trials);
  parallel_for(trials, workers, [&](std::size_t t) {
    Rng r = rng.stream(t);
    Context cp = base_p;
    Context cq = base_q;
    double acc = 0.0;
    for (std::size_t n = 0; n < max_n; ++n) {
      const std::vector<double> lp = cp.next_log_dist();
      const Sentence s = sample_next(cp, r);
      const double lq = cq.next_log_prob(s);
      if (lq == kNegInf) {
        acc = kPosInf;
        if (!flags[t]) flags[t] = s;
      } else {
        acc += lp[s] - lq;
      }
      ratio[t * max_n + n] = acc;
      cp.push(s);
      cq.push(s);
    }
  });

  EstimateReport rep;
  rep.trials = trials;
  for (std::size_t t = 0; t < trials && !rep.flagged; ++t) rep.flagged = flags[t];
  rep.infinite = rep.flagged.has_value();
  const double T = static_cast<double>(trials);
  double best = -1.0;
  for (std::size_t n = 1; n <= max_n; ++n) {
    LengthStat st;
    st.n = n;
    st.trials = trials;
    if (rep.infinite) {
      st.mean = kPosInf;
      st.standard_error = std::numeric_limits<double>::quiet_NaN();
    } else {
      double mean = 0.0;
      for (std::size_t t = 0; t < trials; ++t) mean += ratio[t * max_n + n - 1];
      mean /= T;
      double m2 = 0.0;
      double m4 = 0.0;
      for (std::size_t t = 0; t < trials; ++t) {
        const double d = ratio[t * max_n + n - 1] - mean;
        m2 += d * d;
        m4 += d * d * d * d;
      }
      const double var = m2 / (T - 1.0);
      m4 /= T;
      st.mean = var;
      st.standard_error = std::sqrt(std::max(0.0, (m4 - var * var * (T - 3.0) / (T - 1.0)) / T));
    }
    const double per = st.mean / static_cast<double>(n);
    if (n == 1 || per > best) {
      best = per;
      rep.point_estimate = per;
      rep.standard_error = st.standard_error / static_cast<double>(n);
    }
    rep.per_length.push_back(st);
  }
  return rep;
}

namespace {

void require_finite_state(const SentenceLM& m, const char* what) {
  if (!m.is_finite_state()) {
    throw Error(ErrorCode::kNotCertifiable,
                std::string(what) + " must be categorical or markov to certify");
  }
}

std::size_t keep_len(const SentenceLM& a, const SentenceLM& b) {
  return static_cast<std::size_t>(std::max(a.order(), b.order()));
}

SentenceSeq extend(const SentenceSeq& ctx, Sentence s, std::size_t keep) {
  if (keep == 0) return {};
  SentenceSeq out = ctx;
  out.push_back(s);
  if (out.size() > keep) out.erase(out.begin(), out.end() - static_cast<std::ptrdiff_t>(keep));
  return out;
}

// All contexts of length exactly 0..keep.
std::vector<SentenceSeq> all_contexts(std::size_t m, std::size_t keep) {
  std::vector<SentenceSeq> out{{}};
  std::vector<SentenceSeq> layer{{}};
  for (std::size_t len = 1; len <= keep; ++len) {
    std::vector<SentenceSeq> next;
    for (const auto& c : layer) {
      for (std::size_t s = 0; s < m; ++s) {
        SentenceSeq e = c;
        e.push_back(static_cast<Sentence>(s));
        next.push_back(std::move(e));
      }
    }
    out.insert(out.end(), next.begin(), next.end());
    layer = std::move(next);
  }
  return out;
}

std::vector<SentenceSeq> negative_seeds(std::size_t m, std::size_t keep, const BehaviorScore& b) {
  std::set<SentenceSeq> seeds;
  const auto negatives = b.negatives();
  if (negatives.empty()) {
    throw Error(ErrorCode::kNoTriggerAvailable, "no symbol has a negative behavior score");
  }
  for (const auto& c : all_contexts(m, keep == 0 ? 0 : keep - 1)) {
    for (Sentence s : negatives) seeds.insert(extend(c, s, keep));
  }
  return {seeds.begin(), seeds.end()};
}

KlValue row_kl(const SentenceLM& a, const SentenceLM& b, const SentenceSeq& ctx) {
  return kl_between(a.row_log_probs(a.state_of(ctx)), b.row_log_probs(b.state_of(ctx)));
}

CertifiedValue extremum(const SentenceLM& a, const SentenceLM& b,
                        const std::vector<SentenceSeq>& contexts, bool take_max) {
  CertifiedValue out;
  out.value = take_max ? -1.0 : kPosInf;
  bool have = false;
  for (const auto& ctx : contexts) {
    const double v = row_kl(a, b, ctx).value;
    if (!have || (take_max ? v > out.value : v < out.value)) {
      out.value = v;
      out.witness_context = ctx;
      have = true;
    }
  }
  return out;
}

}  // namespace

std::vector<SentenceSeq> reachable_contexts(const SentenceLM& walker, std::size_t keep,
                                            const std::vector<SentenceSeq>& seeds) {
  std::set<SentenceSeq> seen(seeds.begin(), seeds.end());
  std::vector<SentenceSeq> frontier(seen.begin(), seen.end());
  const std::size_t m = walker.vocab_size();
  while (!frontier.empty()) {
    std::vector<SentenceSeq> next;
    for (const auto& ctx : frontier) {
      const auto row = walker.row_probs(walker.state_of(ctx));
      for (std::size_t s = 0; s < m; ++s) {
        if (row[s] <= 0.0) continue;
        SentenceSeq e = extend(ctx, static_cast<Sentence>(s), keep);
        if (seen.insert(e).second) next.push_back(std::move(e));
      }
    }
    frontier = std::move(next);
  }
  return {seen.begin(), seen.end()};
}

CertifiedValue certify_beta(const SentenceLM& neg, const SentenceLM& pos) {
  require_finite_state(neg, "negative component");
  require_finite_state(pos, "positive component");
  require_same_vocab(neg, pos);
  const std::size_t keep = keep_len(neg, pos);
  return extremum(neg, pos, reachable_contexts(neg, keep, {{}}), false);
}

CertifiedValue certify_beta_prompt(const SentenceLM& neg, const SentenceLM& pos,
                                   const BehaviorScore& b) {
  require_finite_state(neg, "negative component");
  require_finite_state(pos, "positive component");
  require_same_vocab(neg, pos);
  const std::size_t keep = keep_len(neg, pos);
  const auto seeds = negative_seeds(neg.vocab_size(), keep, b);
  return extremum(neg, pos, reachable_contexts(neg, keep, seeds), false);
}

CertifiedValue certify_beta_prime(const SentenceLM& neg, const SentenceLM& pos,
                                  const BehaviorScore& b) {
  require_finite_state(neg, "negative component");
  require_finite_state(pos, "positive component");
  require_same_vocab(neg, pos);
  const std::size_t keep = keep_len(neg, pos);
  std::vector<SentenceSeq> seeds{{}};
  if (!b.negatives().empty()) {
    const auto neg_seeds = negative_seeds(neg.vocab_size(), keep, b);
    seeds.insert(seeds.end(), neg_seeds.begin(), neg_seeds.end());
  }
  return extremum(pos, neg, reachable_contexts(pos, keep, seeds), true);
}

PositivityReport check_positivity(const SentenceLM& pos, const SentenceLM& neg,
                                  const BehaviorScore& b) {
  require_finite_state(pos, "positive model");
  require_finite_state(neg, "negative model");
  require_same_vocab(pos, neg);
  const auto negatives = b.negatives();
  PositivityReport rep;
  for (const auto& ctx : all_contexts(pos.vocab_size(), keep_len(pos, neg))) {
    const auto rp = pos.row_probs(pos.state_of(ctx));
    const auto rn = neg.row_probs(neg.state_of(ctx));
    for (Sentence s : negatives) {
      if (!(rp[s] < rn[s])) {
        rep.ok = false;
        rep.witness_context = ctx;
        rep.witness_symbol = s;
        return rep;
      }
    }
  }
  return rep;
}

AbgReport check_abg(const SentenceLM& mixture, const BehaviorScore& b, double gamma,
                    std::size_t max_len, std::size_t trials, const RngSpec& rng,
                    unsigned workers) {
  if (mixture.kind() != ModelKind::kMixture) {
    throw Error(ErrorCode::kNotAMixture, "alpha-beta-gamma check needs a mixture model");
  }
  const SentenceLM& neg = mixture.negative();
  const SentenceLM& pos = mixture.positive();
  AbgReport rep;
  rep.alpha = mixture.alpha();
  rep.beta = estimate_beta(neg, pos, max_len, trials, rng, workers);
  rep.certified_beta = certify_beta(neg, pos);
  rep.gamma = certify_gamma_negative(neg, b, gamma);
  rep.gamma_ok = rep.gamma.ok;
  return rep;
}

}  // namespace beb

#include "core/attack.hpp"

#include <cmath>

#include "core/divergence.hpp"
#include "core/error.hpp"
#include "core/logspace.hpp"
#include "core/parallel.hpp"

namespace beb {

const char* prompt_mode_name(PromptMode mode) noexcept {
  return mode == PromptMode::kGreedy ? "greedy" : "sampled";
}

namespace {

double log_ratio(double a, double b) {
  if (a == kNegInf && b == kNegInf) return 0.0;
  if (b == kNegInf) return kPosInf;
  if (a == kNegInf) return kNegInf;
  return a - b;
}

// Argmax over admissible sentences (proposal > 0) of ln proposal - ln P_+.
std::optional<Sentence> greedy_pick(std::span<const double> proposal, std::span<const double> lpos) {
  std::optional<Sentence> best;
  double best_score = kNegInf;
  for (std::size_t s = 0; s < proposal.size(); ++s) {
    if (proposal[s] == kNegInf) continue;
    const double score = log_ratio(proposal[s], lpos[s]);
    if (!best || score > best_score) {
      best = static_cast<Sentence>(s);
      best_score = score;
    }
  }
  return best;
}

// Negative sentence with the largest ln P_- - ln P_+ among those P_- can emit.
Sentence pick_trigger(const Context& cm, const std::vector<Sentence>& negatives) {
  const std::vector<double> lneg = cm.component(0).next_log_dist();
  const std::vector<double> lpos = cm.component(1).next_log_dist();
  std::optional<Sentence> best;
  double best_score = kNegInf;
  for (Sentence s : negatives) {
    if (lneg[s] == kNegInf) continue;
    const double score = log_ratio(lneg[s], lpos[s]);
    if (!best || score > best_score) {
      best = s;
      best_score = score;
    }
  }
  if (!best) {
    throw Error(ErrorCode::kNoTriggerAvailable,
                "the negative component gives zero probability to every b < 0 sentence here");
  }
  return *best;
}

double step_ratio(const Context& cm, Sentence s) {
  return log_ratio(cm.component(0).next_log_prob(s), cm.component(1).next_log_prob(s));
}

void append(PromptTrace& trace, Context& cm, Sentence s) {
  const double r = step_ratio(cm, s);
  trace.prompt.push_back(s);
  trace.per_step_log_ratio.push_back(r);
  trace.cumulative_log_ratio += r;
  cm.push(s);
}

Context mixture_context(const SentenceLM& mixture, std::span<const Sentence> start) {
  if (mixture.kind() != ModelKind::kMixture) {
    throw Error(ErrorCode::kNotAMixture, "attacks need a mixture model");
  }
  Context cm = mixture.start();
  for (Sentence s : start) cm.push(s);
  return cm;
}

std::optional<Context> attacker_context(const SentenceLM* attacker, const SentenceLM& mixture,
                                        std::span<const Sentence> start) {
  if (!attacker) return std::nullopt;
  if (attacker->vocab_size() != mixture.vocab_size()) {
    throw Error(ErrorCode::kInvalidArgument, "attacker and model disagree on vocabulary size");
  }
  Context ca = attacker->start();
  for (Sentence s : start) ca.push(s);
  return ca;
}

}  // namespace

PromptTrace greedy_prompt(const SentenceLM& mixture, std::size_t length,
                          std::span<const Sentence> start, const SentenceLM* attacker) {
  Context cm = mixture_context(mixture, start);
  std::optional<Context> ca = attacker_context(attacker, mixture, start);
  PromptTrace trace;
  trace.mode = PromptMode::kGreedy;
  for (std::size_t k = 0; k < length; ++k) {
    const std::vector<double> proposal =
        ca ? ca->next_log_dist() : cm.component(0).next_log_dist();
    const std::vector<double> lpos = cm.component(1).next_log_dist();
    const auto pick = greedy_pick(proposal, lpos);
    if (!pick) {
      trace.truncated = true;
      break;
    }
    append(trace, cm, *pick);
    if (ca) ca->push(*pick);
  }
  return trace;
}

PromptTrace sampled_prompt(const SentenceLM& mixture, std::size_t length, Rng& rng,
                           std::span<const Sentence> start, const SentenceLM* attacker) {
  Context cm = mixture_context(mixture, start);
  std::optional<Context> ca = attacker_context(attacker, mixture, start);
  PromptTrace trace;
  trace.mode = PromptMode::kSampled;
  for (std::size_t k = 0; k < length; ++k) {
    const Sentence s = sample_next(ca ? *ca : cm.component(0), rng);
    append(trace, cm, s);
    if (ca) ca->push(s);
  }
  return trace;
}

PrefixedAttack prefixed_attack(const SentenceLM& mixture, std::span<const Sentence> aligned_prefix,
                               const BehaviorScore& b, const BoundParams& params,
                               std::size_t max_len) {
  params.validate();
  if (mixture.kind() != ModelKind::kMixture) {
    throw Error(ErrorCode::kNotAMixture, "attacks need a mixture model");
  }
  supported_context(mixture.positive(), aligned_prefix);
  const std::vector<Sentence> negatives = b.negatives();
  if (negatives.empty()) {
    throw Error(ErrorCode::kNoTriggerAvailable, "no symbol has a negative behavior score");
  }
  Context cm = mixture_context(mixture, aligned_prefix);
  const double s0 = static_cast<double>(aligned_prefix.size());
  PrefixedAttack out;
  out.prefix_log_ratio = log_ratio(cm.component(0).log_prob(), cm.component(1).log_prob());
  out.target_log_ratio = params.beta_prime * s0 + params.sigma * std::sqrt(s0 / params.delta) +
                         params.log_inv_alpha() + params.log_inv_epsilon() + 2.0 * std::log(2.0);
  out.theorem2_length = theorem2_length(params, s0);
  out.trace.mode = PromptMode::kGreedy;
  const double threshold = params.gamma + params.epsilon;
  for (std::size_t k = 1; k <= max_len; ++k) {
    Sentence s = 0;
    if (k == 1) {
      s = pick_trigger(cm, negatives);
    } else {
      const auto pick =
          greedy_pick(cm.component(0).next_log_dist(), cm.component(1).next_log_dist());
      if (!pick) {
        out.trace.truncated = true;
        break;
      }
      s = *pick;
    }
    append(out.trace, cm, s);
    if (!out.misalignment_length && behavior_expectation(cm, b) <= threshold) {
      out.misalignment_length = k;
    }
    if (out.misalignment_length && out.trace.cumulative_log_ratio >= out.target_log_ratio) break;
  }
  return out;
}

std::size_t ConversationTranscript::total_query_length() const {
  std::size_t n = 0;
  for (const auto& t : turns) n += t.query.size();
  return n;
}

std::size_t ConversationTranscript::total_answer_length() const {
  std::size_t n = 0;
  for (const auto& t : turns) n += t.answer.size();
  return n;
}

ConversationTranscript converse(const SentenceLM& mixture, const BehaviorScore& b,
                                std::size_t n_turns, std::size_t answer_len,
                                const BoundParams& params, const RngSpec& rng) {
  params.validate();
  if (n_turns < 1) throw Error(ErrorCode::kInvalidArgument, "a conversation needs >= 1 turn");
  const std::vector<Sentence> negatives = b.negatives();
  if (negatives.empty()) {
    throw Error(ErrorCode::kNoTriggerAvailable, "no symbol has a negative behavior score");
  }
  std::vector<double> answer_lens(n_turns, static_cast<double>(answer_len));
  answer_lens[0] = 0.0;
  ConversationTranscript out;
  out.per_turn_caps = theorem3_budgets(params, answer_lens).per_turn_caps;
  out.rng_seed = rng.master_seed;
  std::vector<std::size_t> lengths;
  for (std::size_t i = 0; i < n_turns; ++i) {
    const double cap = out.per_turn_caps[i];
    if (cap < 1.0) {
      throw Error(ErrorCode::kCapInfeasible, "turn " + std::to_string(i + 1) + ": query cap " +
                                                 std::to_string(cap) + " is below one sentence");
    }
    lengths.push_back(static_cast<std::size_t>(std::floor(cap)));
  }
  Rng r = rng.stream(0);
  Context cm = mixture_context(mixture, {});
  for (std::size_t i = 0; i < n_turns; ++i) {
    Turn turn;
    PromptTrace q;
    append(q, cm, pick_trigger(cm, negatives));
    for (std::size_t k = 1; k < lengths[i]; ++k) {
      const auto pick =
          greedy_pick(cm.component(0).next_log_dist(), cm.component(1).next_log_dist());
      if (!pick) break;
      append(q, cm, *pick);
    }
    turn.query = std::move(q.prompt);
    if (i + 1 < n_turns) {
      for (std::size_t k = 0; k < answer_len; ++k) {
        const Sentence s = sample_next(cm, r);
        turn.answer_log_ratio += step_ratio(cm, s);
        turn.answer.push_back(s);
        cm.push(s);
      }
    }
    out.turns.push_back(std::move(turn));
  }
  out.final_behavior = behavior_expectation(cm, b);
  return out;
}

CurveSeries misalignment_curve(const SentenceLM& mixture, const BehaviorScore& b,
                               std::size_t max_len, PromptMode mode, std::size_t trials,
                               const RngSpec& rng, unsigned workers) {
  CurveSeries curve;
  if (mode == PromptMode::kGreedy) {
    const PromptTrace trace = greedy_prompt(mixture, max_len);
    Context cm = mixture_context(mixture, {});
    curve.points.push_back({0.0, behavior_expectation(cm, b), 0.0});
    for (std::size_t k = 0; k < trace.prompt.size(); ++k) {
      cm.push(trace.prompt[k]);
      curve.points.push_back({static_cast<double>(k + 1), behavior_expectation(cm, b), 0.0});
    }
    return curve;
  }
  if (trials < 2) throw Error(ErrorCode::kInvalidArgument, "trials must be >= 2");
  const std::size_t width = max_len + 1;
  std::vector<double> values(trials * width);
  parallel_for(trials, workers, [&](std::size_t t) {
    Rng r = rng.stream(t);
    Context cm = mixture_context(mixture, {});
    for (std::size_t n = 0; n <= max_len; ++n) {
      values[t * width + n] = behavior_expectation(cm, b);
      if (n < max_len) cm.push(sample_next(cm.component(0), r));
    }
  });
  std::vector<double> column(trials);
  for (std::size_t n = 0; n <= max_len; ++n) {
    for (std::size_t t = 0; t < trials; ++t) column[t] = values[t * width + n];
    const LengthStat st = summarize(n, column);
    curve.points.push_back({static_cast<double>(n), st.mean, st.standard_error});
  }
  return curve;
}

CurveSeries kl_decay_curve(const SentenceLM& mixture, std::size_t max_len, std::size_t trials,
                           const RngSpec& rng, unsigned workers) {
  if (trials < 2) throw Error(ErrorCode::kInvalidArgument, "trials must be >= 2");
  const std::size_t width = max_len + 1;
  std::vector<double> values(trials * width);
  parallel_for(trials, workers, [&](std::size_t t) {
    Rng r = rng.stream(t);
    Context cm = mixture_context(mixture, {});
    for (std::size_t n = 0; n <= max_len; ++n) {
      values[t * width + n] = conditional_kl(cm.component(0), cm).value;
      if (n < max_len) cm.push(sample_next(cm.component(0), r));
    }
  });
  CurveSeries curve;
  std::vector<double> column(trials);
  for (std::size_t n = 0; n <= max_len; ++n) {
    for (std::size_t t = 0; t < trials; ++t) column[t] = values[t * width + n];
    const LengthStat st = summarize(n, column);
    curve.points.push_back({static_cast<double>(n), st.mean, st.standard_error});
  }
  return curve;
}

std::optional<double> curve_midpoint(const CurveSeries& curve) {
  if (curve.points.size() < 2) return std::nullopt;
  const double y0 = curve.points.front().value;
  const double yf = curve.points.back().value;
  if (y0 == yf) return std::nullopt;
  const double half = 0.5 * (y0 + yf);
  for (std::size_t i = 0; i + 1 < curve.points.size(); ++i) {
    const auto& a = curve.points[i];
    const auto& c = curve.points[i + 1];
    if ((a.value - half) * (c.value - half) <= 0.0 && a.value != c.value) {
      return a.n + (half - a.value) / (c.value - a.value) * (c.n - a.n);
    }
  }
  return std::nullopt;
}

}  // namespace beb

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "core/attack.hpp"
#include "core/desk.hpp"
#include "reference.hpp"
#include "support.hpp"

using namespace beb;

namespace {

SentenceLM cat(std::vector<double> p) { return SentenceLM::categorical(std::move(p)); }

DeskModel desk(std::uint64_t seed, int order = 0, bool binary = false, double alpha = 1e-3) {
  DeskSpec s;
  s.order = order;
  s.binary = binary;
  s.alpha = alpha;
  return make_desk_model(s, RngSpec{seed});
}

}  // namespace

TEST_CASE("greedy prompt") {
  const auto same = SentenceLM::mixture(0.1, cat({0.3, 0.7}), cat({0.3, 0.7}));
  CHECK(greedy_prompt(same, 6).cumulative_log_ratio == 0.0);
  CHECK(greedy_prompt(same, 6).prompt == SentenceSeq(6, 0));  // ties to the lowest index

  const auto mix = SentenceLM::mixture(0.1, cat({0.5, 0.3, 0.2}), cat({0.2, 0.1, 0.7}));
  const auto t = greedy_prompt(mix, 5);
  CHECK(t.prompt == SentenceSeq(5, 1));
  CHECK(t.cumulative_log_ratio == doctest::Approx(5 * std::log(3.0)).epsilon(1e-14));

  // argmax dominates the expectation at every step
  Rng r(5);
  for (int i = 0; i < 20; ++i) {
    const auto m = random_mixture(r, 4, 2, 0.0);
    const auto g = greedy_prompt(m, 6);
    SentenceSeq ctx;
    for (std::size_t k = 0; k < g.prompt.size(); ++k) {
      const double kl = ref::kl(ref::next(m.negative(), ctx), ref::next(m.positive(), ctx));
      CHECK(g.per_step_log_ratio[k] >= kl - 1e-12);
      ctx.push_back(g.prompt[k]);
    }
  }
}

TEST_CASE("desk greedy attack clears the theorem1 ratio") {
  const auto d = desk(31);
  BoundParams p;
  p.alpha = 1e-3;
  p.beta = d.certified_beta;
  p.epsilon = 0.1;
  const auto len = static_cast<std::size_t>(std::ceil(theorem1_length(p)));
  const auto t = greedy_prompt(d.bundle.model, len);
  CHECK(t.cumulative_log_ratio >= std::log(1e3) + std::log(10.0) + std::log(4.0));
  // Sufficiency: past the ratio, behavior is within epsilon of P_-.
  const double bp = behavior_expectation_exact(d.bundle.model, t.prompt, d.bundle.behavior);
  const double bn = behavior_expectation_exact(d.bundle.model.negative(), t.prompt, d.bundle.behavior);
  CHECK(bp <= bn + 0.1);
  // generated model: ln(1/alpha)/beta is about 7, a length-8 greedy attack misaligns
  CHECK(std::abs(std::log(1e3) / d.certified_beta - 7) < 2.5);
  const auto eight = greedy_prompt(d.bundle.model, 8);
  CHECK(behavior_expectation_exact(d.bundle.model, eight.prompt, d.bundle.behavior) <= -0.5 + 0.1);
}

TEST_CASE("posterior weight is increasing in the prompt log ratio") {
  const auto d = desk(32, 1);
  Rng r(1);
  for (int i = 0; i < 50; ++i) {
    const auto t = sampled_prompt(d.bundle.model, 6, r);
    const double w = posterior_weight(d.bundle.model, t.prompt);
    const double a = 1e-3;
    const double want = 1 / (1 + ((1 - a) / a) * std::exp(-t.cumulative_log_ratio));
    CHECK(std::abs(w - want) < 1e-12);
  }
}

TEST_CASE("sampled prompt") {
  const auto same = SentenceLM::mixture(0.1, cat({0.3, 0.7}), cat({0.3, 0.7}));
  Rng r(8);
  CHECK(sampled_prompt(same, 5, r).cumulative_log_ratio == 0.0);

  const auto mix = SentenceLM::mixture(0.1, cat({0.5, 0.5}), cat({0.9, 0.1}));
  const double kl = 0.5 * std::log(0.5 / 0.9) + 0.5 * std::log(0.5 / 0.1);
  double sum = 0, sq = 0;
  const int n = 1000;
  for (int i = 0; i < n; ++i) {
    const double x = sampled_prompt(mix, 4, r).cumulative_log_ratio;
    sum += x;
    sq += x * x;
  }
  const double mean = sum / n;
  const double se = std::sqrt((sq / n - mean * mean) / (n - 1));
  CHECK(std::abs(mean - 4 * kl) <= 3 * se);
}

TEST_CASE("prefixed attack") {
  const auto d = desk(33, 1);
  BoundParams p;
  p.alpha = 1e-3;
  p.beta = d.certified_beta;
  p.beta_prime = 3;
  p.sigma = 1;
  p.gamma = -0.5;
  const auto empty = prefixed_attack(d.bundle.model, {}, d.bundle.behavior, p, 40);
  CHECK(d.bundle.behavior.is_negative(empty.trace.prompt[0]));
  const auto rest = greedy_prompt(d.bundle.model, empty.trace.prompt.size() - 1,
                                  SentenceSeq{empty.trace.prompt[0]});
  CHECK(SentenceSeq(empty.trace.prompt.begin() + 1, empty.trace.prompt.end()) == rest.prompt);
  CHECK(empty.misalignment_length.has_value());
  CHECK(empty.prefix_log_ratio == 0.0);
}

TEST_CASE("conversation") {
  const auto d = desk(34, 1);
  BoundParams p;
  p.alpha = 1e-3;
  p.beta = d.certified_beta;
  p.beta_prime = 3;
  p.sigma = 1;
  p.gamma = -0.5;
  const auto t = converse(d.bundle.model, d.bundle.behavior, 3, 2, p, RngSpec{4});
  CHECK(t.turns.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(static_cast<double>(t.turns[i].query.size()) <= t.per_turn_caps[i]);
    CHECK(t.turns[i].answer.size() == (i + 1 < 3 ? 2u : 0u));
  }
  CHECK(t.final_behavior <= p.gamma + p.epsilon);

  // one turn without answers is a trigger plus the greedy extension
  const auto one = converse(d.bundle.model, d.bundle.behavior, 1, 0, p, RngSpec{4});
  const auto& q = one.turns[0].query;
  const auto g = greedy_prompt(d.bundle.model, q.size() - 1, SentenceSeq{q[0]});
  CHECK(SentenceSeq(q.begin() + 1, q.end()) == g.prompt);
  CHECK(one.final_behavior == behavior_expectation_exact(d.bundle.model, q, d.bundle.behavior));

  // every cap keeps its +1 term, so a query always fits the trigger
  for (double c : t.per_turn_caps) CHECK(c >= 1.0);
}

TEST_CASE("answers carry bounded divergence") {
  // mid-conversation answers have mean per-sentence log ratio <= beta'
  const auto d = desk(35, 1);
  const auto& m = d.bundle.model;
  const double beta_prime = certify_beta_prime(m.negative(), m.positive(), d.bundle.behavior).value;
  Rng r(2);
  double sum = 0;
  std::size_t n = 0;
  for (int i = 0; i < 400; ++i) {
    const auto a = sample_seq(m, SentenceSeq{0}, 3, r);
    sum += log_prob_seq(m.negative(), SentenceSeq{0, a[0], a[1], a[2]}) -
           log_prob_seq(m.negative(), SentenceSeq{0}) -
           (log_prob_seq(m.positive(), SentenceSeq{0, a[0], a[1], a[2]}) -
            log_prob_seq(m.positive(), SentenceSeq{0}));
    n += 3;
  }
  CHECK(sum / static_cast<double>(n) <= beta_prime);
}

TEST_CASE("curves") {
  const auto d = desk(36);
  const auto& m = d.bundle.model;
  const auto& b = d.bundle.behavior;
  const auto c = misalignment_curve(m, b, 12, PromptMode::kGreedy, 1, RngSpec{1});
  const double a = 1e-3;
  const double unprompted = a * behavior_expectation_exact(m.negative(), {}, b) +
                            (1 - a) * behavior_expectation_exact(m.positive(), {}, b);
  CHECK(c.points[0].value == doctest::Approx(unprompted).epsilon(1e-14));
  for (std::size_t i = 1; i < c.points.size(); ++i) CHECK(c.points[i].value <= c.points[i - 1].value + 1e-15);

  const auto bin = desk(37, 0, true);
  const auto bc = misalignment_curve(bin.bundle.model, bin.bundle.behavior, 20, PromptMode::kGreedy, 1,
                                     RngSpec{1});
  for (const auto& pt : bc.points) CHECK(pt.value <= sigmoid_bound(a, bin.certified_beta, pt.n) + 1e-12);
  const auto mid = curve_midpoint(bc);
  REQUIRE(mid.has_value());
  CHECK(std::abs(*mid - std::log(1 / a) / bin.certified_beta) <= 1.0);

  const auto kc = kl_decay_curve(m, 25, 32, RngSpec{2});
  CHECK(kc.points.back().value < 0.05);

  DeskSpec ds;
  ds.disjoint = true;
  ds.alpha = 0.25;
  ds.gamma = -1;
  const auto dis = make_desk_model(ds, RngSpec{3});
  CHECK(dis.certified_beta == INFINITY);
  CHECK(dis.report.gamma_ok);
  const auto dk = kl_decay_curve(dis.bundle.model, 2, 4, RngSpec{3});
  CHECK(dk.points[0].value == doctest::Approx(1.386294).epsilon(1e-6));
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "core/desk.hpp"
#include "core/lm.hpp"
#include "reference.hpp"
#include "support.hpp"

using namespace beb;

namespace {

SentenceLM cat(std::vector<double> p) { return SentenceLM::categorical(std::move(p)); }

}  // namespace

TEST_CASE("log_prob_seq on hand-computed sequences") {
  CHECK(log_prob_seq(cat({0.5, 0.5}), SentenceSeq{0, 1}) == doctest::Approx(std::log(0.25)).epsilon(1e-15));
  const auto sym = SentenceLM::mixture(0.5, cat({1, 0}), cat({0, 1}));
  CHECK(log_prob_seq(sym, SentenceSeq{0}) == doctest::Approx(std::log(0.5)).epsilon(1e-15));
  const auto mix = SentenceLM::mixture(0.25, cat({0.8, 0.2}), cat({0.1, 0.9}));
  CHECK(log_prob_seq(mix, SentenceSeq{0, 0}) == doctest::Approx(std::log(0.1675)).epsilon(1e-14));
  CHECK(log_prob_seq(cat({1, 0}), SentenceSeq{1}) == -INFINITY);
}

TEST_CASE("next_dist and posterior weights") {
  Rng r(7);
  for (int i = 0; i < 20; ++i) {
    const auto mix = random_mixture(r, 4, 2);
    const auto d = next_dist(mix, {});
    const auto a = mix.alpha();
    const auto n = ref::component_next(mix.negative(), {});
    const auto p = ref::component_next(mix.positive(), {});
    for (std::size_t s = 0; s < 4; ++s) CHECK(std::abs(d[s] - (a * n[s] + (1 - a) * p[s])) < 1e-15);
    CHECK(posterior_weight(mix, {}) == doctest::Approx(a).epsilon(1e-15));
  }
  // equal-likelihood prefix keeps the prior
  const auto same = SentenceLM::mixture(0.3, cat({0.5, 0.5}), cat({0.5, 0.5}));
  CHECK(posterior_weight(same, SentenceSeq{0, 1, 1}) == doctest::Approx(0.3).epsilon(1e-14));

  // alpha = 0.01 and a prefix with P_-/P_+ = 9900: 1 / (1 + 99 / 9900) = 1 / 1.01
  const auto hi = SentenceLM::mixture(0.01, cat({0.99, 0.01}), cat({0.0001, 0.9999}));
  CHECK(posterior_weight(hi, SentenceSeq{0}) == doctest::Approx(1 / 1.01).epsilon(1e-12));
  // ratio 9801 gives exactly 0.99
  const auto r99 = SentenceLM::mixture(0.01, cat({0.9801, 0.0199}), cat({0.0001, 0.9999}));
  CHECK(posterior_weight(r99, SentenceSeq{0}) == doctest::Approx(0.99).epsilon(1e-12));

  // alpha = 0.25 and ratio 3 gives 0.5
  const auto mid = SentenceLM::mixture(0.25, cat({0.6, 0.4}), cat({0.2, 0.8}));
  CHECK(posterior_weight(mid, SentenceSeq{0}) == doctest::Approx(0.5).epsilon(1e-14));

  // impossible under P_+
  const auto sep = SentenceLM::mixture(0.1, cat({0.5, 0.5}), cat({0, 1}));
  CHECK(posterior_weight(sep, SentenceSeq{0}) == 1.0);
}

TEST_CASE("errors") {
  const auto sep = SentenceLM::mixture(0.1, cat({1, 0}), cat({1, 0}));
  CHECK(code_of([&] { next_dist(sep, SentenceSeq{1}); }) == ErrorCode::kUnsupportedPrefix);
  try {
    next_dist(sep, SentenceSeq{0, 1});
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("sentence #1 (index 1)") != std::string::npos);
  }
  CHECK(code_of([] { posterior_weight(cat({0.5, 0.5}), {}); }) == ErrorCode::kNotAMixture);
  CHECK(code_of([] { cat({0.5, 0.6}); }) == ErrorCode::kInvalidModel);
  CHECK(code_of([] { cat({-0.1, 1.1}); }) == ErrorCode::kInvalidModel);
  CHECK(code_of([] { SentenceLM::markov(1, {{0.5, 0.5}}); }) == ErrorCode::kInvalidModel);
  CHECK(code_of([] { SentenceLM::mixture(1.0, cat({1, 0}), cat({0, 1})); }) ==
        ErrorCode::kInvalidModel);
}

TEST_CASE("sampling") {
  Rng r(3);
  CHECK(sample_seq(cat({0.3, 0.7}), {}, 0, r).empty());
  CHECK(sample_seq(cat({1, 0}), {}, 5, r) == SentenceSeq{0, 0, 0, 0, 0});
  Rng big(11);
  const auto seq = sample_seq(cat({0.3, 0.7}), {}, 100000, big);
  double zeros = 0;
  for (auto s : seq) zeros += s == 0;
  CHECK(std::abs(zeros / 1e5 - 0.3) < 0.005);

  Rng a(99);
  const auto mix = SentenceLM::mixture(0.2, random_component(a, 5, 2), random_component(a, 5, 1));
  Rng c(5), d(5);
  CHECK(sample_seq(mix, {}, 50, c) == sample_seq(mix, {}, 50, d));
}

TEST_CASE("chain rule and normalization on enumerated sequences") {
  Rng r(21);
  for (int t = 0; t < 10; ++t) {
    const std::size_t m = 2 + t % 5;
    const auto mix = random_mixture(r, m, 2, 0.2);
    for (std::size_t len = 0; len <= 3; ++len) {
      ref::for_each_seq(m, len, [&](const SentenceSeq& a) {
        const double la = log_prob_seq(mix, a);
        if (la == -INFINITY) return;
        const auto d = next_dist(mix, a);
        double sum = 0;
        for (double x : d) sum += x;
        CHECK(std::abs(sum - 1.0) < 1e-12);
        for (Sentence s = 0; s < m; ++s) {
          if (d[s] == 0.0) continue;
          SentenceSeq ab = a;
          ab.push_back(s);
          CHECK(std::abs(log_prob_seq(mix, ab) - (la + std::log(d[s]))) < 1e-10);
          CHECK(std::abs(std::exp(log_prob_seq(mix, ab)) - ref::prob(mix, ab)) < 1e-12);
        }
      });
    }
  }
}

TEST_CASE("markov state layout") {
  const auto m2 = SentenceLM::markov(
      2, {{0.5, 0.5}, {0.9, 0.1}, {0.2, 0.8}, {1, 0}, {0, 1}, {0.3, 0.7}, {0.6, 0.4}});
  CHECK(m2.state_count() == 7);
  CHECK(m2.state_of(SentenceSeq{}) == 0);
  CHECK(m2.state_of(SentenceSeq{1}) == 2);
  CHECK(m2.state_of(SentenceSeq{1, 0}) == 5);
  CHECK(m2.state_of(SentenceSeq{0, 0, 1, 0}) == 5);
  CHECK(m2.state_context(6) == SentenceSeq{1, 1});
  CHECK(log_prob_seq(m2, SentenceSeq{1, 0, 1}) == doctest::Approx(std::log(0.5 * 0.2 * 0.7)));
}

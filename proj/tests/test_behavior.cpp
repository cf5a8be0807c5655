#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "core/behavior.hpp"
#include "core/desk.hpp"
#include "reference.hpp"
#include "support.hpp"

using namespace beb;

namespace {

SentenceLM cat(std::vector<double> p) { return SentenceLM::categorical(std::move(p)); }

}  // namespace

TEST_CASE("exact behavior expectation") {
  const BehaviorScore pm({1.0, -1.0});
  CHECK(behavior_expectation_exact(cat({0.5, 0.5}), {}, pm) == 0.0);
  CHECK(behavior_expectation_exact(cat({0.9, 0.1}), {}, pm) == doctest::Approx(0.8).epsilon(1e-15));

  Rng r(4);
  for (int i = 0; i < 20; ++i) {
    const auto mix = random_mixture(r, 5, 2);
    std::vector<double> t(5);
    for (auto& x : t) x = 2 * r.uniform() - 1;
    const BehaviorScore b(t);
    const double a = mix.alpha();
    const double lin = a * behavior_expectation_exact(mix.negative(), {}, b) +
                       (1 - a) * behavior_expectation_exact(mix.positive(), {}, b);
    CHECK(std::abs(behavior_expectation_exact(mix, {}, b) - lin) < 1e-15);
    const auto prefix = sample_seq(mix, {}, 3, r);
    const double e = behavior_expectation_exact(mix, prefix, b);
    CHECK(e >= b.min() - 1e-15);
    CHECK(e <= b.max() + 1e-15);
    CHECK(std::abs(e - ref::expectation(ref::next(mix, prefix), t)) < 1e-12);
  }
}

TEST_CASE("score table validation") {
  CHECK(code_of([] { BehaviorScore({0.5, 1.5}); }) == ErrorCode::kInvalidModel);
  CHECK(code_of([] { behavior_expectation_exact(cat({0.5, 0.5}), {}, BehaviorScore({1.0})); }) ==
        ErrorCode::kInvalidArgument);
  CHECK(BehaviorScore({1, -1, -0.5, 0}).negatives() == std::vector<Sentence>{1, 2});
}

TEST_CASE("Monte Carlo behavior expectation") {
  const auto mc0 = behavior_expectation_mc(cat({1, 0}), {}, BehaviorScore({-1, 1}), 100, RngSpec{1});
  CHECK(mc0.estimate == -1.0);
  CHECK(mc0.standard_error == 0.0);
  const auto mc1 = behavior_expectation_mc(cat({0.5, 0.5}), {}, BehaviorScore({1, -1}), 10000, RngSpec{2});
  CHECK(std::abs(mc1.estimate) < 0.03);
  CHECK(std::isnan(behavior_expectation_mc(cat({0.5, 0.5}), {}, BehaviorScore({1, -1}), 1, RngSpec{2})
                       .standard_error));

  int ok = 0;
  Rng r(8);
  for (int i = 0; i < 100; ++i) {
    const auto mix = random_mixture(r, 4, 2);
    std::vector<double> t(4);
    for (auto& x : t) x = 2 * r.uniform() - 1;
    const BehaviorScore b(t);
    const auto prefix = sample_seq(mix, {}, 2, r);
    const double exact = behavior_expectation_exact(mix, prefix, b);
    const auto mc = behavior_expectation_mc(mix, prefix, b, 2000, RngSpec{100u + i});
    ok += std::abs(mc.estimate - exact) <= 3 * mc.standard_error + 1e-12;
  }
  CHECK(ok >= 97);
}

TEST_CASE("gamma certification") {
  const BehaviorScore pm({1.0, -1.0});
  CHECK(certify_gamma_negative(cat({0, 1}), pm, -1.0).ok);

  // every row has expectation -0.5
  const auto m1 = SentenceLM::markov(1, {{0.25, 0.75}, {0.25, 0.75}, {0.25, 0.75}});
  CHECK(certify_gamma_negative(m1, pm, -0.4).ok);
  const auto fail = certify_gamma_negative(m1, pm, -0.6);
  CHECK_FALSE(fail.ok);
  CHECK(fail.max_expectation == doctest::Approx(-0.5));

  // one bad row is named
  const auto m2 = SentenceLM::markov(1, {{0.1, 0.9}, {0.1, 0.9}, {0.6, 0.4}});
  const auto c = certify_gamma_negative(m2, pm, -0.5);
  CHECK_FALSE(c.ok);
  CHECK(c.witness_context == SentenceSeq{1});

  const auto mix = SentenceLM::mixture(0.5, cat({0, 1}), cat({1, 0}));
  CHECK(code_of([&] { certify_gamma_negative(mix, pm, -1.0); }) == ErrorCode::kNotAComponent);
}

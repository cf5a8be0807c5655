#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "core/desk.hpp"
#include "core/divergence.hpp"
#include "reference.hpp"
#include "support.hpp"

using namespace beb;

namespace {

SentenceLM cat(std::vector<double> p) { return SentenceLM::categorical(std::move(p)); }

// 0.5 ln(0.5/0.9) + 0.5 ln(0.5/0.1)
const double kKlHalfVsNine = 0.5 * std::log(0.5 / 0.9) + 0.5 * std::log(0.5 / 0.1);

}  // namespace

TEST_CASE("conditional KL") {
  const auto p = cat({0.5, 0.5});
  const auto q = cat({0.9, 0.1});
  CHECK(conditional_kl_exact(p, p, {}).value == 0.0);
  CHECK(conditional_kl_exact(p, q, {}).value == doctest::Approx(0.510826).epsilon(1e-6));
  CHECK(std::abs(conditional_kl_exact(p, q, {}).value - kKlHalfVsNine) < 1e-15);
  const auto inf = conditional_kl_exact(cat({1, 0}), cat({0, 1}), {});
  CHECK(inf.infinite());
  CHECK(*inf.flagged == 0);

  Rng r(2);
  for (int i = 0; i < 30; ++i) {
    const auto mix = random_mixture(r, 4, 2, 0.1);
    const auto prefix = sample_seq(mix.negative(), {}, 2, r);
    const auto k = conditional_kl_exact(mix.negative(), mix, prefix).value;
    CHECK(k >= 0.0);
    const double want = ref::kl(ref::next(mix.negative(), prefix), ref::next(mix, prefix));
    CHECK(std::abs(k - want) < 1e-12);
  }
}

TEST_CASE("estimate_beta") {
  const auto p = cat({0.5, 0.5});
  const auto q = cat({0.9, 0.1});
  const auto same = estimate_beta(p, p, 4, 16, RngSpec{1});
  for (const auto& st : same.per_length) CHECK(st.mean == 0.0);
  const auto rep = estimate_beta(p, q, 5, 64, RngSpec{1});
  for (const auto& st : rep.per_length) {
    CHECK(std::abs(st.mean - kKlHalfVsNine) < 1e-12);
    CHECK(std::abs(st.mean - 0.510826) <= 3 * st.standard_error + 1e-6);
  }
  CHECK(rep.label() == "sampled, not certified");

  const auto inf = estimate_beta(cat({0.5, 0.5}), cat({0, 1}), 2, 8, RngSpec{1});
  CHECK(inf.infinite);
  CHECK(inf.label().rfind("not-beta-distinguishable-finite", 0) == 0);
  CHECK(code_of([&] { estimate_beta(p, q, 2, 1, RngSpec{1}); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("estimate_beta_prompt") {
  const BehaviorScore b({-1, 1, 1});
  const auto p = cat({0.6, 0.3, 0.1});
  const auto q = cat({0.2, 0.4, 0.4});
  const auto plain = estimate_beta(p, q, 3, 32, RngSpec{3});
  const auto prompt = estimate_beta_prompt(p, q, neutral_from(p, 2), b, 3, 32, RngSpec{3});
  for (std::size_t n = 0; n <= 3; ++n)
    CHECK(std::abs(plain.per_length[n].mean - prompt.per_length[n].mean) < 1e-12);
  const auto zero = estimate_beta_prompt(p, p, neutral_from(p, 2), b, 3, 8, RngSpec{3});
  for (const auto& st : zero.per_length) CHECK(st.mean == 0.0);
  CHECK(code_of([&] {
          estimate_beta_prompt(p, q, neutral_from(p, 1), BehaviorScore({1, 1, 0}), 2, 8, RngSpec{3});
        }) == ErrorCode::kNoTriggerAvailable);

  // Markov pair whose KL doubles once a negative sentence has been seen.
  const auto pm = SentenceLM::markov(1, {{0.4, 0.3, 0.3}, {0.7, 0.2, 0.1}, {0.4, 0.3, 0.3}, {0.4, 0.3, 0.3}});
  const auto qm = SentenceLM::markov(1, {{0.3, 0.35, 0.35}, {0.3, 0.4, 0.3}, {0.3, 0.35, 0.35}, {0.3, 0.35, 0.35}});
  const auto e = estimate_beta_prompt(pm, qm, neutral_from(pm, 0), b, 2, 4000, RngSpec{9});
  // Oracle: prefixes are [0] followed by n sentences from pm.
  for (std::size_t n = 0; n <= 2; ++n) {
    double truth = 0.0;
    ref::for_each_seq(3, n, [&](const SentenceSeq& tail) {
      SentenceSeq s{0};
      s.insert(s.end(), tail.begin(), tail.end());
      const double w = ref::prob(pm, s) / ref::prob(pm, SentenceSeq{0});
      truth += w * ref::kl(ref::next(pm, s), ref::next(qm, s));
    });
    CHECK(std::abs(e.per_length[n].mean - truth) <= 3 * e.per_length[n].standard_error + 1e-12);
  }
}

TEST_CASE("estimate_sigma") {
  const auto p = cat({0.5, 0.5});
  const auto q = cat({0.9, 0.1});
  const auto zero = estimate_sigma(p, p, {}, 4, 16, RngSpec{1});
  for (const auto& st : zero.per_length) CHECK(st.mean == 0.0);
  const double var1 = 0.25 * std::pow(std::log(0.5 / 0.9) - std::log(0.5 / 0.1), 2);
  CHECK(var1 == doctest::Approx(1.206949).epsilon(1e-6));
  const auto rep = estimate_sigma(p, q, {}, 5, 2000, RngSpec{4});
  for (const auto& st : rep.per_length) {
    CHECK(std::abs(st.mean - static_cast<double>(st.n) * var1) <= 3 * st.standard_error);
  }
}

TEST_CASE("positivity") {
  const BehaviorScore b({-1, 1});
  CHECK(check_positivity(cat({0, 1}), cat({0.5, 0.5}), b).ok);
  const auto eq = check_positivity(cat({0.5, 0.5}), cat({0.5, 0.5}), b);
  CHECK_FALSE(eq.ok);
  CHECK(eq.witness_symbol == 0);
  const auto neg = SentenceLM::markov(1, {{0.5, 0.5}, {0.5, 0.5}, {0.5, 0.5}});
  const auto pos = SentenceLM::markov(1, {{0.1, 0.9}, {0.1, 0.9}, {0.7, 0.3}});
  const auto w = check_positivity(pos, neg, b);
  CHECK_FALSE(w.ok);
  CHECK(w.witness_context == SentenceSeq{1});
  CHECK(w.witness_symbol == 0);
  const auto mix = SentenceLM::mixture(0.5, neg, pos);
  CHECK(code_of([&] { check_positivity(mix, neg, b); }) == ErrorCode::kNotCertifiable);
}

TEST_CASE("certified beta and check_abg") {
  const BehaviorScore b({-1, -1, 1, 1});
  const auto neg = cat({0.5, 0.5, 0, 0});
  const auto pos = cat({0, 0, 0.5, 0.5});
  const auto mix = SentenceLM::mixture(0.2, neg, pos);
  const auto rep = check_abg(mix, b, -1.0, 3, 8, RngSpec{1});
  CHECK(rep.gamma_ok);
  CHECK(rep.beta.infinite);
  CHECK(rep.certified_beta.infinite());
  CHECK(rep.alpha == 0.2);

  const auto same = check_abg(SentenceLM::mixture(0.2, neg, neg), b, -1.0, 3, 8, RngSpec{1});
  for (const auto& st : same.beta.per_length) CHECK(st.mean == 0.0);

  DeskSpec spec;
  spec.order = 1;
  const auto d = make_desk_model(spec, RngSpec{77});
  CHECK(d.report.alpha == 1e-3);
  CHECK(std::abs(d.certified_beta - 1.0) <= 0.25);
  // certified beta is a lower bound for every sampled per-length mean
  for (const auto& st : d.report.beta.per_length) CHECK(st.mean >= d.certified_beta - 1e-12);
  const auto& m = d.bundle.model;
  for (std::size_t n = 0; n <= 3; ++n) {
    const double truth = ref::expect_over(m.negative(), n, [&](const SentenceSeq& s) {
      return ref::kl(ref::next(m.negative(), s), ref::next(m.positive(), s));
    });
    const auto& st = d.report.beta.per_length[n];
    CHECK(std::abs(st.mean - truth) <= 3 * st.standard_error + 1e-12);
  }
  CHECK(code_of([&] { check_abg(neg, b, -1.0, 2, 4, RngSpec{1}); }) == ErrorCode::kNotAMixture);
}

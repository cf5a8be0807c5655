#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "core/desk.hpp"
#include "core/oracle.hpp"
#include "support.hpp"

using namespace beb;

namespace {

SentenceLM cat(std::vector<double> p) { return SentenceLM::categorical(std::move(p)); }

}  // namespace

TEST_CASE("enumerate_all") {
  const auto one = enumerate_all(cat({0.3, 0.7}), 1);
  REQUIRE(one.size() == 2);
  CHECK(std::exp(one[0].log_prob) + std::exp(one[1].log_prob) == doctest::Approx(1.0).epsilon(1e-15));
  const auto eight = enumerate_all(cat({0.5, 0.5}), 3);
  REQUIRE(eight.size() == 8);
  for (const auto& e : eight) CHECK(e.log_prob == doctest::Approx(std::log(0.125)).epsilon(1e-15));
  CHECK(eight[5].seq == SentenceSeq{1, 0, 1});

  DeskSpec spec;
  spec.order = 1;
  spec.vocab_size = 6;
  const auto d = make_desk_model(spec, RngSpec{2});
  for (std::size_t n = 0; n <= 4; ++n) {
    double sum = 0;
    for (const auto& e : enumerate_all(d.bundle.model, n)) {
      sum += std::exp(e.log_prob);
      CHECK(e.log_prob == log_prob_seq(d.bundle.model, e.seq));  // same path, bit-for-bit
    }
    CHECK(std::abs(sum - 1) < 1e-9);
  }
}

TEST_CASE("budget") {
  CHECK(code_of([] { enumerate_all(cat(std::vector<double>(9, 1.0 / 9)), 1); }) ==
        ErrorCode::kBudgetExceeded);
  CHECK(code_of([] { enumerate_all(cat({0.5, 0.5}), 6); }) == ErrorCode::kBudgetExceeded);
  CHECK(enumerate_all(cat(std::vector<double>(8, 0.125)), 5).size() == 32768);
  CHECK(code_of([] {
          exact_expectation_over_seqs(cat({0.5, 0.5}), [](const SentenceSeq&) { return 1.0; }, 6);
        }) == ErrorCode::kBudgetExceeded);
}

TEST_CASE("exact expectations") {
  const auto p = cat({0.5, 0.5});
  const auto q = cat({0.9, 0.1});
  CHECK(exact_expectation_over_seqs(p, [](const SentenceSeq&) { return 1.0; }, 3) ==
        doctest::Approx(1.0).epsilon(1e-15));
  auto ratio = [&](const SentenceLM& a, const SentenceLM& b) {
    return [&a, &b](const SentenceSeq& s) { return log_prob_seq(a, s) - log_prob_seq(b, s); };
  };
  CHECK(exact_expectation_over_seqs(p, ratio(p, p), 3) == 0.0);
  CHECK(exact_expectation_over_seqs(p, ratio(p, q), 2) == doctest::Approx(1.021651).epsilon(1e-6));

  // conditional on a prefix
  const auto m = SentenceLM::markov(1, {{0.5, 0.5}, {1, 0}, {0, 1}});
  const double e = exact_expectation_over_seqs(
      m, [](const SentenceSeq& s) { return static_cast<double>(s[0]); }, 1, {}, SentenceSeq{1});
  CHECK(e == 1.0);
}

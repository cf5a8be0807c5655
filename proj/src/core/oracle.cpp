#include "core/oracle.hpp"

#include <cmath>

#include "core/error.hpp"
#include "core/logspace.hpp"

namespace beb {

namespace {

void check_budget(const SentenceLM& model, std::size_t n, const EnumerationBudget& budget) {
  if (budget.max_vocab > 8 || budget.max_len > 5) {
    throw Error(ErrorCode::kBudgetExceeded, "enumeration budget caps are vocab 8, length 5");
  }
  if (model.vocab_size() > budget.max_vocab) {
    throw Error(ErrorCode::kBudgetExceeded, "vocabulary of " + std::to_string(model.vocab_size()) +
                                                " exceeds enumeration budget of " +
                                                std::to_string(budget.max_vocab));
  }
  if (n > budget.max_len) {
    throw Error(ErrorCode::kBudgetExceeded, "length " + std::to_string(n) +
                                                " exceeds enumeration budget of " +
                                                std::to_string(budget.max_len));
  }
}

void walk(const Context& ctx, SentenceSeq& seq, std::size_t n, std::vector<Enumerated>& out) {
  if (seq.size() == n) {
    out.push_back({seq, ctx.log_prob()});
    return;
  }
  const std::size_t m = ctx.model().vocab_size();
  for (std::size_t s = 0; s < m; ++s) {
    Context next = ctx;
    next.push(static_cast<Sentence>(s));
    seq.push_back(static_cast<Sentence>(s));
    walk(next, seq, n, out);
    seq.pop_back();
  }
}

}  // namespace

std::vector<Enumerated> enumerate_all(const SentenceLM& model, std::size_t n,
                                      const EnumerationBudget& budget) {
  check_budget(model, n, budget);
  std::vector<Enumerated> out;
  SentenceSeq seq;
  walk(model.start(), seq, n, out);
  return out;
}

double exact_expectation_over_seqs(const SentenceLM& model,
                                   const std::function<double(const SentenceSeq&)>& f,
                                   std::size_t n, const EnumerationBudget& budget,
                                   std::span<const Sentence> prefix) {
  check_budget(model, n, budget);
  const Context base = supported_context(model, prefix);
  const double base_lp = base.log_prob();
  std::vector<Enumerated> rows;
  SentenceSeq seq;
  walk(base, seq, n, rows);
  double acc = 0.0;
  for (const auto& r : rows) {
    if (r.log_prob == kNegInf) continue;
    acc += std::exp(r.log_prob - base_lp) * f(r.seq);
  }
  return acc;
}

}  // namespace beb

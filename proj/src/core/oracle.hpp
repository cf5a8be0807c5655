#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "core/lm.hpp"

namespace beb {

// Hard caps for brute-force enumeration: at most 8^5 sequences.
struct EnumerationBudget {
  std::size_t max_vocab = 8;
  std::size_t max_len = 5;
};

struct Enumerated {
  SentenceSeq seq;
  double log_prob = 0.0;
};

// Every sequence of exactly length n, in lexicographic order, with its log
// probability computed by the same incremental path as log_prob_seq.
std::vector<Enumerated> enumerate_all(const SentenceLM& model, std::size_t n,
                                      const EnumerationBudget& budget = {});

// sum over seq of length n of P(seq | prefix) * f(seq); zero-probability
// sequences are skipped.
double exact_expectation_over_seqs(const SentenceLM& model,
                                   const std::function<double(const SentenceSeq&)>& f,
                                   std::size_t n, const EnumerationBudget& budget = {},
                                   std::span<const Sentence> prefix = {});

}  // namespace beb

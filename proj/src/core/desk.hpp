#pragma once

#include <cstddef>

#include "core/divergence.hpp"
#include "core/model_io.hpp"
#include "core/rng.hpp"

namespace beb {

// Knobs for a synthetic two-component mixture. The first ceil(m/2) symbols
// ("n0", "n1", ...) are negative, the rest ("p0", ...) positive.
struct DeskSpec {
  std::size_t vocab_size = 8;
  double alpha = 1e-3;
  double gamma = -0.5;
  double target_beta = 1.0;
  int order = 0;
  bool binary = false;    // scores {0, 1} and P_- only emits negatives
  bool disjoint = false;  // P_+ never emits negatives
  double jitter = 0.1;    // spread of per-symbol log ratios around the shift
  double concentration = 4.0;
  std::size_t max_attempts = 10000;
  double tolerance = 0.25;  // accepted relative error of the certified beta

  void validate() const;
};

struct DeskModel {
  ModelBundle bundle;
  AbgReport report;
  double certified_beta = 0.0;
  std::size_t attempts = 0;
};

// Rejection sampler: draws component rows, then bisects on the shift that
// separates P_+ from P_- on negative symbols until the certified beta meets
// the target.
DeskModel make_desk_model(const DeskSpec& spec, const RngSpec& rng);

}  // namespace beb

namespace beb {

// Random finite-state model: rows from Gamma(shape) weights, each entry
// zeroed with probability zero_prob (at least one entry per row survives).
SentenceLM random_component(Rng& rng, std::size_t m, int order, double zero_prob = 0.0,
                            double shape = 0.7);

// Mixture of two random components of order <= max_order, alpha log-uniform
// in [1e-3, 0.9].
SentenceLM random_mixture(Rng& rng, std::size_t m, int max_order, double zero_prob = 0.0);

}  // namespace beb

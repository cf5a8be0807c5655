#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "core/attack.hpp"
#include "core/bounds.hpp"
#include "core/desk.hpp"
#include "core/model_io.hpp"

namespace beb {

enum class Scenario {
  kValidate,
  kEstimateBeta,
  kEstimateBetaPrompt,
  kEstimateSigma,
  kAttack,
  kKlCurve,
  kBehaviorCurve,
  kConverse,
  kBounds,
  kVerify,
  kSynth,
};

const char* scenario_name(Scenario s) noexcept;
Scenario parse_scenario(const std::string& name);

struct ExperimentConfig {
  Scenario scenario = Scenario::kValidate;
  std::string model_path;
  std::string params_path;
  std::string out_path;
  std::string curve_out_path;
  std::optional<std::uint64_t> seed;

  std::size_t max_len = 10;
  std::size_t trials = 32;
  double delta = 0.1;
  double epsilon = 0.1;

  bool reverse = false;         // estimate: swap to (P_+, P_-)
  std::size_t neutral_len = 2;  // estimate beta-prompt
  std::optional<std::size_t> prefix_len;  // attack
  PromptMode mode = PromptMode::kGreedy;
  std::size_t turns = 2;       // converse
  std::size_t answer_len = 2;  // converse

  DeskSpec desk;  // synth
  unsigned workers = 1;

  void validate() const;
  // Stable hash of everything that determines the outputs (file contents
  // included, output paths and worker count excluded).
  std::string hash() const;
};

struct RunResult {
  std::string summary;  // one line
  std::vector<std::string> artifacts;
};

RunResult run(const ExperimentConfig& config);

// Bound parameters measured on a model: exact alpha, certified beta
// (prompt variant when the vocabulary has b < 0 symbols), certified beta',
// sampled sigma (largest of both directions) and the certified gamma.
BoundParams derive_params(const ModelBundle& bundle, double epsilon, double delta,
                          const RngSpec& rng, unsigned workers = 1);

BoundParams parse_params(const std::string& json_text, std::optional<double>* s0_len,
                         std::vector<double>* answer_lens);

std::string format_number(double v);

}  // namespace beb

#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace beb {

std::uint64_t splitmix64(std::uint64_t x) noexcept;

// Deterministic stream engine. mt19937_64 is fully specified by the standard,
// and uniform() avoids the implementation-defined distribution adaptors.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, 1) with 53 bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller.
  double normal();

  // Gamma(shape, 1) via Marsaglia-Tsang.
  double gamma(double shape);

  // Index drawn from a probability vector (need not be exactly normalized).
  std::size_t categorical(std::span<const double> probs);

 private:
  std::mt19937_64 engine_;
};

// Master seed plus a stream derivation rule: stream i of a spec is seeded
// with hash(master_seed, i), so results depend only on (seed, index).
struct RngSpec {
  std::uint64_t master_seed = 0;

  Rng stream(std::uint64_t index) const;

  // Independent sub-spec, keyed by a tag and an optional index.
  RngSpec child(std::string_view tag, std::uint64_t index = 0) const;
};

std::uint64_t hash_seed(std::uint64_t master_seed, std::uint64_t index) noexcept;

std::uint64_t fnv1a64(std::string_view data,
                      std::uint64_t basis = 0xcbf29ce484222325ULL) noexcept;

}  // namespace beb

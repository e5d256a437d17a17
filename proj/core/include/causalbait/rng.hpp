#pragma once

#include <algorithm>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace causalbait {

// Named sub-streams so each consumer of randomness draws from an
// independent, reproducible sequence derived from the run seed.
enum class Stream : std::uint64_t {
  Split = 1,
  Oversample,
  SyntheticLayout,
  SyntheticSample,
  MaskInit,
  MaskBatches,
  ScenarioInit,
  ScenarioModel,
  ScenarioBatches,
  GateInit,
  GateNoise,
  GateBatches,
  ClassifierInit,
  ClassifierBatches,
  GradCheck,
  ValAssignment,
};

// splitmix64 finaliser applied to a combination of two words.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Counter-style derivation: the same (seed, stream, path) always yields
  // the same generator, independent of what other streams consumed.
  static Rng derive(std::uint64_t seed, Stream stream, std::initializer_list<std::uint64_t> path = {});

  double uniform();                                  // [0, 1)
  double uniform(double lo, double hi);
  double normal(double mean = 0.0, double stddev = 1.0);
  double gumbel();
  std::uint64_t below(std::uint64_t n);              // [0, n)
  bool bernoulli(double p) { return uniform() < p; }

  template <class It>
  void shuffle(It first, It last) {
    std::shuffle(first, last, engine_);
  }

  std::vector<std::size_t> permutation(std::size_t n);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace causalbait

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "causalbait/data_io.hpp"
#include "causalbait/eval.hpp"
#include "causalbait/trainer.hpp"

namespace causalbait {

enum class DimRole { Invariant, ScenarioCausal, Spurious, Noise };

const char* to_string(DimRole r);

// How a spurious dimension encodes its cue. Symmetric: mean +a when aligned
// with the label sign and -a otherwise. Disguise: the cue (mean a, else 0)
// is carried by non-bait posts when aligned and by bait posts otherwise.
enum class SpuriousCoding { Symmetric, Disguise };

const char* to_string(SpuriousCoding c);
SpuriousCoding parse_spurious_coding(const std::string& s);

struct SyntheticSpec {
  std::size_t n_inv = 8;
  std::size_t n_sc = 8;
  std::size_t n_spur = 12;
  std::size_t n_noise = 12;
  std::size_t num_scenarios = 4;
  std::size_t n_per_scenario = 500;
  // Sizes of the in-distribution validation/test splits and the OOD split.
  std::size_t n_val_per_scenario = 125;
  std::size_t n_test_per_scenario = 250;
  double rho_train = 0.9;
  double rho_test = 0.1;
  double signal_noise_sigma = 0.5;
  double amp_inv = 0.15;
  double amp_sc = 0.3;
  double amp_spur = 0.5;
  SpuriousCoding coding = SpuriousCoding::Disguise;
  std::uint64_t seed = 0;

  std::size_t d() const { return n_inv + n_sc + n_spur + n_noise; }
  // Throws ConfigError on an empty layout, rho outside [0,1] or sigma < 0.
  void validate() const;

  bool operator==(const SyntheticSpec&) const = default;
};

struct GroundTruth {
  std::vector<DimRole> roles;              // role of each dimension
  std::vector<std::vector<int>> patterns;  // scenario -> sign per scenario-causal dim, ascending dim order
  std::vector<int> rule_of_scenario;       // scenario -> rule id
  std::vector<int> train_scenarios;        // true scenario of each training sample

  bool operator==(const GroundTruth&) const = default;
};

struct SyntheticData {
  Dataset train;     // rho_train
  Dataset val;       // rho_train
  Dataset test_id;   // rho_train
  Dataset test_ood;  // rho_test
  GroundTruth truth;
};

// Role layout and scenario sign patterns depend on the seed only; each
// sample is drawn from its own counter-derived stream.
SyntheticData generate(const SyntheticSpec& spec);

// Test metrics of the pipeline-sized classifier trained directly on raw x.
// With val, the best-validation-F1 epoch is kept.
Metrics erm_baseline(const Dataset& train, const Dataset& test, const ClassifierConfig& cfg, std::uint64_t seed,
                     const Dataset* val = nullptr);
// One fit, scored on each test set.
std::vector<Metrics> erm_baseline(const Dataset& train, const std::vector<const Dataset*>& tests,
                                  const ClassifierConfig& cfg, std::uint64_t seed, const Dataset* val = nullptr);

// Ranking AUC of m over invariant dims (positives) vs spurious + noise dims
// (negatives); ties count one half.
double mask_recovery_auc(const std::vector<float>& m, const GroundTruth& gt);

std::string truth_to_json(const GroundTruth& gt);
void write_truth(const GroundTruth& gt, const std::filesystem::path& path);
GroundTruth load_truth(const std::filesystem::path& path);

}  // namespace causalbait

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "causalbait/data_io.hpp"
#include "causalbait/eval.hpp"
#include "causalbait/synthetic.hpp"
#include "causalbait/trainer.hpp"

namespace causalbait {

struct NamedDataset {
  std::string name;
  Dataset data;
};

struct ExperimentData {
  Dataset train;
  Dataset val;
  std::vector<NamedDataset> tests;  // the first one is scored
  std::optional<GroundTruth> truth;
};

// Canonical splits for one seed; the OOD split is scored first.
ExperimentData synthetic_experiment(SyntheticSpec spec, std::uint64_t seed);

struct Variant {
  std::string name;
  std::function<void(TrainConfig&)> apply;  // empty for the erm baseline
  bool erm = false;
};

// full, no_eicf, no_escf, no_enf, then text_only when one of text_families
// is in the manifest (a note is added otherwise).
std::vector<Variant> ablation_variants(const FeatureManifest& manifest, const std::vector<std::string>& text_families,
                                       std::vector<std::string>& notes);
// float_l2 (the reference), float_l0, binary_l2, binary_l0.
std::vector<Variant> mask_config_variants();
std::vector<Variant> scenario_sweep_variants(const std::vector<std::size_t>& sizes);
Variant erm_variant();

struct VariantRun {
  std::string variant;
  std::uint64_t seed = 0;
  std::vector<Metrics> metrics;  // one per test split
  double mask_auc = -1.0;        // -1 without ground truth
  std::vector<double> moved_rate_history;
  std::size_t rounds_run = 0;
};

struct VariantSummary {
  std::string variant;
  std::size_t seeds = 0;
  Metrics mean;           // over seeds, scored split; confusion counts summed
  double std_acc = 0.0;
  double std_f1 = 0.0;
  double delta_acc = 0.0;  // points, against the first variant
  double delta_f1 = 0.0;
  double mean_mask_auc = -1.0;
};

struct StudyReport {
  std::vector<std::string> test_names;
  std::vector<VariantRun> runs;
  std::vector<VariantSummary> summary;
  std::vector<std::string> notes;

  const VariantSummary* find(const std::string& variant) const;
};

using DataForSeed = std::function<ExperimentData(std::uint64_t seed)>;

// Every variant on every seed; data is built once per seed.
StudyReport run_study(const std::vector<Variant>& variants, const std::vector<std::uint64_t>& seeds,
                      const DataForSeed& data, const TrainConfig& base, const TrainLog& log = {});

std::string study_to_json(const StudyReport& r);
// variant,seed,split,acc,pre,rec,f1,mask_auc
std::string study_to_csv(const StudyReport& r);
// Aligned text table of the summary.
std::string study_table(const StudyReport& r);

}  // namespace causalbait

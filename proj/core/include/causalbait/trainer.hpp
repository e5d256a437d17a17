#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "causalbait/causal_gate.hpp"
#include "causalbait/data_io.hpp"
#include "causalbait/invariant_mask.hpp"
#include "causalbait/mlp.hpp"
#include "causalbait/scenario_em.hpp"

namespace causalbait {

struct ClassifierConfig {
  std::size_t hidden = 512;
  // Number of linear layers; 3 gives two rectified hidden layers.
  std::size_t layers = 3;
  double lr = 2e-5;
  std::size_t epochs = 10;
  std::size_t batch_size = 64;

  bool operator==(const ClassifierConfig&) const = default;
};

std::vector<std::size_t> classifier_sizes(std::size_t input, const ClassifierConfig& cfg);

struct Ablations {
  bool no_eicf = false;  // IRM penalty removed (alpha = 0)
  bool no_escf = false;  // contrastive gate stage skipped, sc = vc
  bool no_enf = false;   // scenarios stay at their random initial assignment
  // Manifest families to keep; empty keeps all. Excluded families are zeroed.
  std::vector<std::string> feature_subset;

  bool operator==(const Ablations&) const = default;
};

struct TrainConfig {
  std::size_t rounds = 20;
  ClassifierConfig classifier;
  IrmConfig irm;
  MaskMode mask_mode = MaskMode::Float;
  MaskRegularizer mask_regularizer = MaskRegularizer::L2;
  EmConfig em;
  GateConfig gate;
  Ablations ablations;
  // Outer loop stops once the validation IRM objective has improved by less
  // than early_stop_tol for early_stop_patience consecutive rounds.
  double early_stop_tol = 1e-4;
  std::size_t early_stop_patience = 3;
  std::uint64_t seed = 0;

  bool operator==(const TrainConfig&) const = default;
};

struct RoundSummary {
  std::size_t em_rounds = 0;
  double final_moved_rate = 0.0;
  double val_irm = 0.0;
  std::size_t mask_best_epoch = 0;
  double mask_lr = 0.0;
  double contrastive = 0.0;  // mean contrastive loss over the last gate epoch
};

struct TrainReport {
  std::vector<RoundSummary> rounds;
  std::size_t classifier_best_epoch = 0;
  double classifier_best_val_f1 = 0.0;
  std::vector<double> classifier_val_f1;
};

struct ModelBundle {
  InvarianceMask mask;
  ScenarioState scenario;
  std::vector<std::string> scenario_ids;  // training id of each assignment entry
  GateNet gate;
  MlpParams classifier;
  FeatureManifest manifest;
  TrainConfig config;
  // True unless the contrastive stage was ablated (then sc = vc).
  bool gate_enabled = true;

  std::size_t dim() const { return mask.size(); }
  bool operator==(const ModelBundle&) const = default;
};

struct TrainResult {
  ModelBundle bundle;
  TrainReport report;
};

using TrainLog = std::function<void(std::string_view)>;

TrainResult train(const Dataset& train, const Dataset& val, const TrainConfig& cfg, const TrainLog& log = {});

// Returns a 0/1 keep flag per feature for the configured family subset.
std::vector<float> feature_keep_mask(const FeatureManifest& manifest, std::size_t d,
                                     const std::vector<std::string>& families);

// Classifier input [ic ; sc] for every row of x.
Matrix classifier_inputs(const ModelBundle& bundle, const Matrix& x);

struct Prediction {
  float score = 0.0f;
  int label = 0;
};

Prediction predict(const ModelBundle& bundle, const std::vector<float>& x);
std::vector<float> predict_scores(const ModelBundle& bundle, const Matrix& x);

struct ClassifierFit {
  MlpParams params;
  std::size_t best_epoch = 0;
  double best_val_f1 = 0.0;
  std::vector<double> val_f1;
};

// Mini-batch Adam on cross-entropy; keeps the epoch with the best validation
// F1 (earliest on ties). Without validation data the last epoch is kept.
ClassifierFit fit_classifier(const Matrix& x, const std::vector<float>& y, const Matrix* val_x,
                             const std::vector<float>* val_y, const ClassifierConfig& cfg, std::uint64_t seed);

void save_bundle(const ModelBundle& bundle, const std::filesystem::path& path);
ModelBundle load_bundle(const std::filesystem::path& path);

inline constexpr std::uint32_t kBundleFormatVersion = 1;

}  // namespace causalbait

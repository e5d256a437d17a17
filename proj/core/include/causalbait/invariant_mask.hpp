#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "causalbait/autodiff.hpp"
#include "causalbait/data_io.hpp"
#include "causalbait/mlp.hpp"

namespace causalbait {

enum class MaskMode { Float, Binary };
enum class MaskRegularizer { L0, L2 };
// Dummy: squared gradient w.r.t. a frozen scalar on the logits.
// FullLinear: squared gradient w.r.t. every weight and bias of the linear head.
enum class IrmPenalty { Dummy, FullLinear };

const char* to_string(MaskMode m);
const char* to_string(MaskRegularizer r);
const char* to_string(IrmPenalty p);
MaskMode parse_mask_mode(const std::string& s);
MaskRegularizer parse_mask_regularizer(const std::string& s);
IrmPenalty parse_irm_penalty(const std::string& s);

// Hard-concrete stretch and temperature used by the L0 surrogate.
inline constexpr double kHardConcreteZeta = 1.1;
inline constexpr double kHardConcreteGamma = -0.1;
inline constexpr double kHardConcreteBeta = 2.0 / 3.0;

struct InvarianceMask {
  std::vector<float> raw;
  MaskMode mode = MaskMode::Float;
  MaskRegularizer regularizer = MaskRegularizer::L2;

  static InvarianceMask uniform(std::size_t d, MaskMode mode, MaskRegularizer reg, float raw_value = 0.0f);

  std::size_t size() const { return raw.size(); }
  // sigmoid(raw) in float mode; the 0.5 threshold of it in binary mode.
  std::vector<float> effective() const;

  bool operator==(const InvarianceMask&) const = default;
};

struct MaskSplit {
  std::vector<float> ic;
  std::vector<float> vc;
};

// ic = m * x, vc = (1 - m) * x.
MaskSplit apply_mask(const InvarianceMask& m, const std::vector<float>& x);
void apply_mask(const std::vector<float>& m, const Matrix& x, Matrix& ic, Matrix& vc);

struct IrmConfig {
  double alpha = 1.0;
  double beta = 0.1;
  double mask_lr = 0.01;
  // Candidate mask learning rates; when non-empty each is trained and the
  // one with the lowest validation objective is kept.
  std::vector<double> mask_lr_grid = {0.01, 0.001, 0.0001};
  double head_lr = 0.01;
  std::size_t epochs = 100;
  // Samples drawn from each scenario per step.
  std::size_t batch_size = 256;
  IrmPenalty penalty = IrmPenalty::Dummy;
  float raw_init = 0.0f;

  bool operator==(const IrmConfig&) const = default;
};

template <class T>
struct BasicScenarioBatch {
  BasicMatrix<T> x;
  std::vector<T> y;
};
using ScenarioBatch = BasicScenarioBatch<float>;

struct IrmTerms {
  double risk = 0.0;        // mean over scenarios of L_s
  double penalty = 0.0;     // mean over scenarios of the gradient-norm term
  double regularizer = 0.0; // R(m)
  double total = 0.0;       // risk + alpha * penalty + beta * R
};

// Records the masked IRM objective on `tape`:
//   (1/|S|) sum_s [ L_s + alpha * pen_s ] + beta * R(m)
// with the head applied to ic = m * x of each scenario batch.
template <class T>
ad::Var<T> irm_objective(ad::Tape<T>& tape, ad::Param<T>& raw, MaskMode mode, MaskRegularizer reg,
                         BasicMlp<T>& head, const std::vector<BasicScenarioBatch<T>>& batches, double alpha,
                         double beta, IrmPenalty penalty, IrmTerms* terms = nullptr);

double irm_loss(const InvarianceMask& m, const MlpParams& head, const std::vector<ScenarioBatch>& subsets,
                const IrmConfig& cfg, IrmTerms* terms = nullptr);

// Groups rows by scenario id; scenarios with no rows give empty batches.
std::vector<ScenarioBatch> scenario_batches(const Matrix& x, const std::vector<float>& y,
                                            const std::vector<int>& assignment, std::size_t num_scenarios);

struct MaskTrainResult {
  InvarianceMask mask;
  MlpParams head;
  double best_val_loss = 0.0;
  std::size_t best_epoch = 0;
  double mask_lr = 0.0;
  std::vector<double> val_history;
};

struct MaskTrainInput {
  const Matrix* x = nullptr;
  const std::vector<float>* y = nullptr;
  const std::vector<int>* assignment = nullptr;
  // Optional validation data; scenarios without validation rows are skipped
  // when scoring. Without validation data the training objective is used.
  const Matrix* val_x = nullptr;
  const std::vector<float>* val_y = nullptr;
  const std::vector<int>* val_assignment = nullptr;
  std::size_t num_scenarios = 1;
};

// Minimises the masked IRM objective with stratified mini-batches (every
// step sees a batch from each scenario) and returns the epoch with the best
// validation objective.
MaskTrainResult train_mask(const MaskTrainInput& in, const IrmConfig& cfg, const InvarianceMask& init_mask,
                           const MlpParams& init_head, std::uint64_t seed);

// Convenience form that reads scenario ids from the records.
MaskTrainResult train_mask(const Dataset& train, const Dataset* val, std::size_t num_scenarios, const IrmConfig& cfg,
                           MaskMode mode, MaskRegularizer reg, std::uint64_t seed);

MlpParams init_irm_head(std::size_t d, std::uint64_t seed);

}  // namespace causalbait

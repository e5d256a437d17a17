#pragma once

#include <cstddef>
#include <vector>

#include "causalbait/autodiff.hpp"

namespace causalbait {

struct AdamConfig {
  double lr = 2e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  // Global gradient-norm clip applied before each update; <= 0 disables.
  double clip_norm = 5.0;
};

// Per-parameter moment accumulators plus step counter.
struct OptimizerState {
  std::vector<Matrix> m;
  std::vector<Matrix> v;
  std::size_t step = 0;
};

class Adam {
 public:
  Adam(std::vector<ad::Param<float>*> params, AdamConfig cfg);

  // Applies one bias-corrected update from the gradients currently stored
  // in each Param, then leaves those gradients untouched.
  void step();
  void zero_grad();

  const OptimizerState& state() const { return state_; }
  const AdamConfig& config() const { return cfg_; }
  void set_lr(double lr) { cfg_.lr = lr; }

 private:
  std::vector<ad::Param<float>*> params_;
  AdamConfig cfg_;
  OptimizerState state_;
};

// Global L2 norm over all gradients (double accumulation, fixed order).
double grad_norm(const std::vector<ad::Param<float>*>& params);

// Rescales all gradients in place so their joint norm is at most max_norm.
// Used when several optimizers with different learning rates share a step.
void clip_global_norm(const std::vector<ad::Param<float>*>& params, double max_norm);

}  // namespace causalbait

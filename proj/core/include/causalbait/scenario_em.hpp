#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "causalbait/data_io.hpp"
#include "causalbait/invariant_mask.hpp"
#include "causalbait/matrix.hpp"
#include "causalbait/mlp.hpp"

namespace causalbait {

struct EmConfig {
  std::size_t num_scenarios = 10;
  std::size_t inner_epochs = 5;
  std::size_t max_rounds = 30;
  double moved_rate_threshold = 0.01;
  double lr = 0.01;
  std::size_t hidden = 64;
  std::size_t batch_size = 64;
  std::uint64_t seed = 0;

  bool operator==(const EmConfig&) const = default;
};

struct ScenarioState {
  std::size_t num_scenarios = 0;
  std::vector<MlpParams> models;      // Phi_s: vc -> logit for y
  std::vector<int> assignment;        // sample index -> scenario
  std::vector<double> moved_rate_history;
  std::size_t fit_calls = 0;          // rounds of fitting performed so far

  bool operator==(const ScenarioState&) const = default;
};

// Uniform random assignment where every scenario is non-empty.
std::vector<int> init_assignment(std::size_t n, std::size_t num_scenarios, std::uint64_t seed);

// Fresh state: random assignment plus freshly initialised scenario models.
ScenarioState init_scenario_state(std::size_t n, std::size_t d, const EmConfig& cfg);

// Trains each Phi_s for cfg.inner_epochs passes over its own samples only.
// Batch order for scenario s depends only on (seed, round, s) and its data.
void fit_scenario_models(ScenarioState& state, const Matrix& vc, const std::vector<float>& y, const EmConfig& cfg);

// exp(-cross-entropy of Phi_s on (vc_i, y_i)) for every s.
std::vector<double> membership_score(const ScenarioState& state, const std::vector<float>& vc_i, float y_i);
// Row i holds the scores of sample i.
std::vector<std::vector<double>> membership_scores(const ScenarioState& state, const Matrix& vc,
                                                   const std::vector<float>& y);

// Moves every sample to its highest-scoring scenario (ties to the lowest
// index), repairs empty scenarios with the worst-fitting samples, appends
// and returns the moved rate.
double reallocate(ScenarioState& state, const Matrix& vc, const std::vector<float>& y);

// Alternates fitting and reallocation until the moved rate drops below the
// threshold or max_rounds is reached. Continues from the given state.
void run_em(ScenarioState& state, const Matrix& vc, const std::vector<float>& y, const EmConfig& cfg);

// Dataset form: vc is computed from the mask, a fresh state is initialised
// and the EM loop runs to convergence.
ScenarioState run_em(const Dataset& train, const InvarianceMask& mask, const EmConfig& cfg);

// Scenario of each sample by highest membership score (no repair).
std::vector<int> assign_by_membership(const ScenarioState& state, const Matrix& vc, const std::vector<float>& y);

void write_moved_rate_csv(const std::vector<double>& history, const std::filesystem::path& path);

}  // namespace causalbait

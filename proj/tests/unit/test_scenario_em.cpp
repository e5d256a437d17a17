#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "causalbait/errors.hpp"
#include "causalbait/rng.hpp"
#include "causalbait/scenario_em.hpp"

using namespace causalbait;

namespace {

// Scenario model that outputs the constant logit z.
MlpParams constant_model(std::size_t d, double z) {
  MlpParams m = zero_mlp<float>({d, 4, 1});
  m.biases[1].value[0] = static_cast<float>(z);
  return m;
}

double logit(double p) { return std::log(p / (1.0 - p)); }

ScenarioState state_of(std::vector<MlpParams> models, std::vector<int> assignment) {
  ScenarioState st;
  st.num_scenarios = models.size();
  st.models = std::move(models);
  st.assignment = std::move(assignment);
  return st;
}

struct Toy {
  Matrix vc;
  std::vector<float> y;
  std::vector<int> truth;
};

// Two clusters with opposite vc[0] -> y rules; the second feature tells the
// clusters apart.
Toy opposite_rules(std::size_t per_cluster, std::uint64_t seed) {
  Rng rng(seed);
  Toy t;
  t.vc = Matrix(2 * per_cluster, 2);
  for (std::size_t i = 0; i < 2 * per_cluster; ++i) {
    const int c = i < per_cluster ? 0 : 1;
    const double a = rng.uniform(-1.0, 1.0);
    t.vc(i, 0) = static_cast<float>(a);
    t.vc(i, 1) = static_cast<float>((c == 0 ? 1.0 : -1.0) + rng.normal(0, 0.2));
    const bool pos = c == 0 ? a > 0 : a < 0;
    t.y.push_back(pos ? 1.0f : 0.0f);
    t.truth.push_back(c);
  }
  return t;
}

EmConfig toy_cfg(std::size_t S) {
  EmConfig c;
  c.num_scenarios = S;
  c.inner_epochs = 5;
  c.max_rounds = 15;
  c.lr = 0.01;
  c.hidden = 32;
  c.batch_size = 32;
  c.seed = 3;
  return c;
}

}  // namespace

TEST(InitAssignment, FourIntoFourIsPermutation) {
  const auto a = init_assignment(4, 4, 1);
  EXPECT_EQ(std::set<int>(a.begin(), a.end()), (std::set<int>{0, 1, 2, 3}));
}

TEST(InitAssignment, EveryScenarioNonEmptyAndSeeded) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto a = init_assignment(12, 5, seed);
    EXPECT_EQ(std::set<int>(a.begin(), a.end()).size(), 5u);
    EXPECT_EQ(a, init_assignment(12, 5, seed));
  }
}

TEST(InitAssignment, TooFewSamplesIsConfigError) {
  EXPECT_THROW(init_assignment(3, 5, 1), ConfigError);
  EXPECT_THROW(init_assignment(3, 0, 1), ConfigError);
}

TEST(FitScenarioModels, SeparableToyIsFitPerfectly) {
  Rng rng(4);
  Matrix vc(60, 2);
  std::vector<float> y;
  for (std::size_t i = 0; i < 60; ++i) {
    const double sign = i % 2 ? 1.0 : -1.0;
    vc(i, 0) = static_cast<float>(sign * rng.uniform(0.5, 1.5));
    vc(i, 1) = static_cast<float>(rng.normal(0, 1));
    y.push_back(sign > 0 ? 1.0f : 0.0f);
  }
  EmConfig cfg = toy_cfg(1);
  cfg.inner_epochs = 40;
  ScenarioState st = init_scenario_state(60, 2, cfg);
  fit_scenario_models(st, vc, y, cfg);
  const Matrix z = mlp_forward(st.models[0], vc);
  for (std::size_t i = 0; i < 60; ++i) EXPECT_EQ(z[i] > 0.0f, y[i] == 1.0f) << i;
}

TEST(FitScenarioModels, ZeroEpochsIsNoOp) {
  EmConfig cfg = toy_cfg(2);
  cfg.inner_epochs = 0;
  const Toy t = opposite_rules(10, 1);
  ScenarioState st = init_scenario_state(20, 2, cfg);
  const auto before = st.models;
  fit_scenario_models(st, t.vc, t.y, cfg);
  EXPECT_EQ(st.models, before);
}

TEST(FitScenarioModels, IdenticalDataAndInitGiveIdenticalModels) {
  EmConfig cfg = toy_cfg(2);
  const MlpParams init = init_mlp<float>({2, 8, 1}, 5);
  ScenarioState st = state_of({init, init}, {0, 1});
  const Matrix vc(2, 2, {0.3f, -0.4f, 0.3f, -0.4f});
  fit_scenario_models(st, vc, {1.0f, 1.0f}, cfg);
  EXPECT_EQ(st.models[0], st.models[1]);
  EXPECT_FALSE(st.models[0] == init);
}

TEST(Membership, ConfidentCorrectModelScoresOne) {
  const auto st = state_of({constant_model(2, 40.0)}, {0});
  EXPECT_NEAR(membership_score(st, {0.1f, 0.2f}, 1.0f)[0], 1.0, 1e-12);
}

TEST(Membership, ChanceModelScoresHalf) {
  const auto st = state_of({constant_model(2, 0.0)}, {0});
  EXPECT_NEAR(membership_score(st, {0.1f, 0.2f}, 0.0f)[0], 0.5, 1e-12);
}

TEST(Membership, ScoreFallsAsLossRises) {
  const auto st = state_of({constant_model(1, 2.0), constant_model(1, 0.5), constant_model(1, -1.0)}, {0});
  const auto s = membership_score(st, {0.0f}, 1.0f);
  EXPECT_GT(s[0], s[1]);
  EXPECT_GT(s[1], s[2]);
}

TEST(Reallocate, ArgmaxScenario) {
  // Scores (0.2, 0.7, 0.1) for the single sample.
  auto st = state_of({constant_model(1, logit(0.2)), constant_model(1, logit(0.7)), constant_model(1, logit(0.1))},
                     {0});
  const auto scores = membership_score(st, {0.0f}, 1.0f);
  EXPECT_NEAR(scores[0], 0.2, 1e-6);
  EXPECT_NEAR(scores[1], 0.7, 1e-6);
  EXPECT_NEAR(reallocate(st, Matrix(1, 1, 0.0f), {1.0f}), 1.0, 0.0);
  EXPECT_EQ(st.assignment, std::vector<int>{1});
}

TEST(Reallocate, TieGoesToLowerIndex) {
  auto st = state_of({constant_model(1, 0.0), constant_model(1, 0.0)}, {1, 1, 1, 1, 0});
  const Matrix vc(5, 1, 0.0f);
  const auto a = assign_by_membership(st, vc, {1, 0, 1, 0, 1});
  for (int s : a) EXPECT_EQ(s, 0);
}

TEST(Reallocate, StableAssignmentHasZeroMovedRate) {
  auto st = state_of({constant_model(1, 2.0), constant_model(1, -2.0)}, {0, 0, 0, 0});
  const Matrix vc(4, 1, 0.0f);
  const std::vector<float> y{1.0f, 0.0f, 1.0f, 0.0f};
  EXPECT_EQ(reallocate(st, vc, y), 0.5);
  EXPECT_EQ(st.assignment, (std::vector<int>{0, 1, 0, 1}));
  EXPECT_EQ(reallocate(st, vc, y), 0.0);
  EXPECT_EQ(st.moved_rate_history, (std::vector<double>{0.5, 0.0}));
}

TEST(Reallocate, EmptyScenarioIsRefilled) {
  auto st = state_of({constant_model(1, 3.0), constant_model(1, -3.0)}, {0, 1, 0, 1, 0, 1});
  reallocate(st, Matrix(6, 1, 0.0f), std::vector<float>(6, 1.0f));
  EXPECT_GT(std::count(st.assignment.begin(), st.assignment.end(), 1), 0);
  EXPECT_GT(std::count(st.assignment.begin(), st.assignment.end(), 0), 0);
}

TEST(RunEm, OppositeRulesConverge) {
  const Toy t = opposite_rules(100, 7);
  EmConfig cfg = toy_cfg(2);
  ScenarioState st = init_scenario_state(200, 2, cfg);
  run_em(st, t.vc, t.y, cfg);
  ASSERT_FALSE(st.moved_rate_history.empty());
  EXPECT_LE(st.moved_rate_history.size(), 15u);
  EXPECT_LT(st.moved_rate_history.back(), 0.01);
}

TEST(RunEm, SingleScenarioConvergesImmediately) {
  const Toy t = opposite_rules(10, 1);
  EmConfig cfg = toy_cfg(1);
  ScenarioState st = init_scenario_state(20, 2, cfg);
  run_em(st, t.vc, t.y, cfg);
  EXPECT_EQ(st.moved_rate_history, std::vector<double>{0.0});
}

TEST(RunEm, ZeroRoundsKeepsInitialState) {
  const Toy t = opposite_rules(10, 1);
  EmConfig cfg = toy_cfg(2);
  cfg.max_rounds = 0;
  ScenarioState st = init_scenario_state(20, 2, cfg);
  const ScenarioState before = st;
  run_em(st, t.vc, t.y, cfg);
  EXPECT_EQ(st, before);
  EXPECT_TRUE(st.moved_rate_history.empty());
}

TEST(RunEm, SeededRunsAreIdentical) {
  const Toy t = opposite_rules(30, 9);
  EmConfig cfg = toy_cfg(3);
  ScenarioState a = init_scenario_state(60, 2, cfg), b = init_scenario_state(60, 2, cfg);
  run_em(a, t.vc, t.y, cfg);
  run_em(b, t.vc, t.y, cfg);
  EXPECT_EQ(a, b);
}

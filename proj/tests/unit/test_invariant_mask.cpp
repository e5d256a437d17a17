#include <gtest/gtest.h>

#include <cmath>

#include "causalbait/errors.hpp"
#include "causalbait/invariant_mask.hpp"
#include "causalbait/optim.hpp"
#include "causalbait/rng.hpp"

using namespace causalbait;

namespace {

float logit(double p) { return static_cast<float>(std::log(p / (1.0 - p))); }

MlpParams linear_head(std::vector<float> w, float b) {
  const std::size_t d = w.size();
  MlpParams h = zero_mlp<float>({d, 1});
  h.weights[0].value = Matrix(d, 1, std::move(w));
  h.biases[0].value = Matrix(1, 1, b);
  return h;
}

std::vector<ScenarioBatch> hand_batches() {
  return {{Matrix(2, 2, {1.0f, 2.0f, -1.0f, 0.5f}), {1.0f, 0.0f}},
          {Matrix(2, 2, {0.5f, -1.0f, 2.0f, 1.0f}), {0.0f, 1.0f}}};
}

// Plain mean cross-entropy, written out independently of the library.
double reference_bce(const MlpParams& head, const std::vector<float>& m, const Matrix& x, const std::vector<float>& y) {
  double total = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    double z = head.biases[0].value[0];
    for (std::size_t j = 0; j < x.cols(); ++j) z += static_cast<double>(m[j]) * x(i, j) * head.weights[0].value[j];
    total += std::max(z, 0.0) - z * y[i] + std::log1p(std::exp(-std::abs(z)));
  }
  return total / static_cast<double>(x.rows());
}

// Two scenarios; dims 0-1 carry a stable signal, dims 2-3 a signal whose
// sign flips between scenarios, dims 4-5 are noise.
Dataset planted(std::uint64_t seed, std::size_t per_scenario = 300) {
  Rng rng(seed);
  Dataset ds;
  ds.d = 6;
  ds.manifest = FeatureManifest::single(6);
  for (int s = 0; s < 2; ++s)
    for (std::size_t i = 0; i < per_scenario; ++i) {
      PostRecord r;
      r.id = std::to_string(s) + "-" + std::to_string(i);
      r.y = rng.bernoulli(0.5) ? 1 : 0;
      const double c = r.y ? 1.0 : -1.0;
      const double flip = s == 0 ? 1.0 : -1.0;
      r.x = {static_cast<float>(0.6 * c + rng.normal(0, 0.6)), static_cast<float>(0.6 * c + rng.normal(0, 0.6)),
             static_cast<float>(1.2 * c * flip + rng.normal(0, 0.4)),
             static_cast<float>(1.2 * c * flip + rng.normal(0, 0.4)), static_cast<float>(rng.normal(0, 1)),
             static_cast<float>(rng.normal(0, 1))};
      r.scenario = s;
      ds.records.push_back(r);
    }
  return ds;
}

IrmConfig quick_irm() {
  IrmConfig c;
  c.alpha = 2.0;
  c.beta = 0.03;
  c.mask_lr_grid = {0.01};
  c.head_lr = 0.01;
  c.epochs = 150;
  c.batch_size = 64;
  return c;
}

}  // namespace

TEST(ApplyMask, OnesKeepEverything) {
  const auto m = InvarianceMask::uniform(3, MaskMode::Binary, MaskRegularizer::L2, 2.0f);
  const auto s = apply_mask(m, {1.5f, -2.0f, 3.0f});
  EXPECT_EQ(s.ic, (std::vector<float>{1.5f, -2.0f, 3.0f}));
  EXPECT_EQ(s.vc, (std::vector<float>{0.0f, 0.0f, 0.0f}));
}

TEST(ApplyMask, ZerosKeepNothing) {
  const auto m = InvarianceMask::uniform(2, MaskMode::Binary, MaskRegularizer::L2, -2.0f);
  const auto s = apply_mask(m, {1.5f, -2.0f});
  EXPECT_EQ(s.ic, (std::vector<float>{0.0f, 0.0f}));
  EXPECT_EQ(s.vc, (std::vector<float>{1.5f, -2.0f}));
}

TEST(ApplyMask, QuarterMask) {
  const auto m = InvarianceMask::uniform(2, MaskMode::Float, MaskRegularizer::L2, logit(0.25));
  const auto s = apply_mask(m, {4.0f, 8.0f});
  EXPECT_NEAR(s.ic[0], 1.0f, 1e-6);
  EXPECT_NEAR(s.ic[1], 2.0f, 1e-6);
  EXPECT_NEAR(s.vc[0], 3.0f, 1e-6);
  EXPECT_NEAR(s.vc[1], 6.0f, 1e-6);
}

TEST(ApplyMask, ComponentsSumToInput) {
  Rng rng(5);
  InvarianceMask m = InvarianceMask::uniform(7, MaskMode::Float, MaskRegularizer::L2);
  std::vector<float> x(7);
  for (std::size_t j = 0; j < 7; ++j) {
    m.raw[j] = static_cast<float>(rng.normal(0, 2));
    x[j] = static_cast<float>(rng.normal(0, 3));
  }
  const auto s = apply_mask(m, x);
  for (std::size_t j = 0; j < 7; ++j) EXPECT_EQ(s.ic[j] + s.vc[j], x[j]);
}

TEST(ApplyMask, LengthMismatchIsShapeError) {
  EXPECT_THROW(apply_mask(InvarianceMask::uniform(3, MaskMode::Float, MaskRegularizer::L2), {1.0f}), ShapeError);
}

TEST(IrmLoss, SingleScenarioWithoutPenaltiesIsCrossEntropy) {
  Rng rng(8);
  for (int inst = 0; inst < 20; ++inst) {
    const std::size_t d = 5, n = 9;
    InvarianceMask m = InvarianceMask::uniform(d, MaskMode::Float, MaskRegularizer::L2);
    for (auto& v : m.raw) v = static_cast<float>(rng.normal(0, 1));
    std::vector<float> w(d);
    for (auto& v : w) v = static_cast<float>(rng.normal(0, 1));
    const MlpParams head = linear_head(w, static_cast<float>(rng.normal(0, 1)));
    Matrix x(n, d);
    for (auto& v : x.storage()) v = static_cast<float>(rng.normal(0, 1));
    std::vector<float> y(n);
    for (auto& v : y) v = rng.bernoulli(0.5) ? 1.0f : 0.0f;
    IrmConfig cfg;
    cfg.alpha = 0.0;
    cfg.beta = 0.0;
    EXPECT_NEAR(irm_loss(m, head, {{x, y}}, cfg), reference_bce(head, m.effective(), x, y), 1e-6);
  }
}

TEST(IrmLoss, L2RegularizerAtHalfMask) {
  const std::size_t d = 6;
  const auto m = InvarianceMask::uniform(d, MaskMode::Float, MaskRegularizer::L2, 0.0f);
  IrmConfig cfg;
  cfg.alpha = 0.0;
  cfg.beta = 1.0;
  IrmTerms terms;
  irm_loss(m, linear_head(std::vector<float>(d, 0.3f), 0.0f), {{Matrix(2, d, 1.0f), {1.0f, 0.0f}}}, cfg, &terms);
  EXPECT_NEAR(terms.regularizer, 0.25 * d, 1e-6);
  EXPECT_NEAR(terms.total, terms.risk + terms.regularizer, 1e-6);
}

TEST(IrmLoss, TwoScenarioHandCase) {
  InvarianceMask m = InvarianceMask::uniform(2, MaskMode::Float, MaskRegularizer::L2);
  m.raw = {0.0f, 1.0f};
  IrmConfig cfg;
  cfg.alpha = 1.5;
  cfg.beta = 0.2;
  IrmTerms terms;
  const double v = irm_loss(m, linear_head({0.7f, -1.2f}, 0.1f), hand_batches(), cfg, &terms);
  EXPECT_NEAR(v, 1.4606301084984845, 1e-5);
  EXPECT_NEAR(terms.risk, 1.0277208924025918, 1e-5);
  EXPECT_NEAR(terms.penalty, 0.18401325801212554, 1e-5);
  EXPECT_NEAR(terms.regularizer, 0.784446645388523, 1e-5);
}

TEST(IrmLoss, TwoScenarioHandCaseFullLinearPenalty) {
  InvarianceMask m = InvarianceMask::uniform(2, MaskMode::Float, MaskRegularizer::L2);
  m.raw = {0.0f, 1.0f};
  IrmConfig cfg;
  cfg.alpha = 1.5;
  cfg.beta = 0.2;
  cfg.penalty = IrmPenalty::FullLinear;
  EXPECT_NEAR(irm_loss(m, linear_head({0.7f, -1.2f}, 0.1f), hand_batches(), cfg), 1.6751404127542149, 1e-5);
}

TEST(IrmLoss, L0SurrogateIsBoundedByDimension) {
  IrmConfig cfg;
  cfg.alpha = 0.0;
  cfg.beta = 1.0;
  for (float raw : {-6.0f, 0.0f, 6.0f}) {
    IrmTerms terms;
    const auto m = InvarianceMask::uniform(4, MaskMode::Float, MaskRegularizer::L0, raw);
    irm_loss(m, linear_head(std::vector<float>(4, 0.1f), 0.0f), {{Matrix(1, 4, 1.0f), {1.0f}}}, cfg, &terms);
    EXPECT_GE(terms.regularizer, 0.0);
    EXPECT_LE(terms.regularizer, 4.0);
  }
}

TEST(IrmLoss, EmptyScenarioIsRejected) {
  IrmConfig cfg;
  const auto m = InvarianceMask::uniform(2, MaskMode::Float, MaskRegularizer::L2);
  EXPECT_THROW(irm_loss(m, linear_head({1.0f, 1.0f}, 0.0f), {{Matrix(0, 2), {}}}, cfg), ScenarioError);
  EXPECT_THROW(irm_loss(m, linear_head({1.0f, 1.0f}, 0.0f), {}, cfg), ScenarioError);
  cfg.alpha = -1.0;
  EXPECT_THROW(irm_loss(m, linear_head({1.0f, 1.0f}, 0.0f), hand_batches(), cfg), ConfigError);
}

TEST(IrmLoss, ScenarioBatchesGroupRows) {
  const Matrix x(4, 1, {0.0f, 1.0f, 2.0f, 3.0f});
  const auto b = scenario_batches(x, {0, 1, 0, 1}, {1, 0, 1, 2}, 3);
  ASSERT_EQ(b.size(), 3u);
  EXPECT_EQ(b[0].x, Matrix(1, 1, 1.0f));
  EXPECT_EQ(b[1].x, Matrix(2, 1, {0.0f, 2.0f}));
  EXPECT_EQ(b[2].y, std::vector<float>{1.0f});
  EXPECT_THROW(scenario_batches(x, {0, 1, 0, 1}, {1, 0, 1, 3}, 3), ScenarioError);
}

TEST(TrainMask, NoPenaltyMatchesDirectHead) {
  Dataset ds = planted(3);
  for (auto& r : ds.records) r.scenario = 0;
  IrmConfig cfg = quick_irm();
  cfg.alpha = 0.0;
  cfg.beta = 0.0;
  cfg.epochs = 200;
  cfg.batch_size = ds.size();
  const auto res = train_mask(ds, nullptr, 1, cfg, MaskMode::Float, MaskRegularizer::L2, 4);
  const Matrix x = ds.features();
  const auto y = ds.labels();
  const double masked = irm_loss(res.mask, res.head, {{x, y}}, cfg);

  // Unmasked logistic head, same initialisation, optimiser and step budget.
  MlpParams head = init_irm_head(ds.d, 4);
  AdamConfig ac;
  ac.lr = cfg.head_lr;
  Adam opt(head.params(), ac);
  for (std::size_t e = 0; e < cfg.epochs; ++e) {
    opt.zero_grad();
    ad::Tape<float> t;
    t.backward(ad::bce_with_logits(mlp_forward(t, head, t.constant(x)), y));
    opt.step();
  }
  const double direct = reference_bce(head, std::vector<float>(ds.d, 1.0f), x, y);
  EXPECT_LT(std::abs(masked - direct) / direct, 0.02) << masked << " vs " << direct;
}

TEST(TrainMask, StableDimsOutweighNoise) {
  const Dataset tr = planted(11), va = planted(12, 100);
  const auto res = train_mask(tr, &va, 2, quick_irm(), MaskMode::Float, MaskRegularizer::L2, 5);
  const auto m = res.mask.effective();
  EXPECT_GT((m[0] + m[1]) / 2, (m[4] + m[5]) / 2);
  EXPECT_GT((m[0] + m[1]) / 2, (m[2] + m[3]) / 2);
}

TEST(TrainMask, DoublingBetaNeverGrowsMask) {
  const Dataset tr = planted(21, 150), va = planted(22, 60);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    IrmConfig c = quick_irm();
    c.epochs = 60;
    auto norm = [&](double beta) {
      c.beta = beta;
      double s = 0.0;
      for (float v : train_mask(tr, &va, 2, c, MaskMode::Float, MaskRegularizer::L2, seed).mask.effective())
        s += v * v;
      return s;
    };
    EXPECT_LE(norm(0.6), norm(0.3) + 1e-9) << "seed " << seed;
  }
}

TEST(TrainMask, SeededRunsAreIdentical) {
  const Dataset tr = planted(31, 80), va = planted(32, 40);
  IrmConfig c = quick_irm();
  c.epochs = 20;
  const auto a = train_mask(tr, &va, 2, c, MaskMode::Binary, MaskRegularizer::L0, 9);
  const auto b = train_mask(tr, &va, 2, c, MaskMode::Binary, MaskRegularizer::L0, 9);
  EXPECT_EQ(a.mask, b.mask);
  EXPECT_EQ(a.head, b.head);
  EXPECT_EQ(a.val_history, b.val_history);
}

TEST(TrainMask, ParseNames) {
  EXPECT_EQ(parse_mask_mode("binary"), MaskMode::Binary);
  EXPECT_EQ(parse_mask_regularizer("l0"), MaskRegularizer::L0);
  EXPECT_EQ(parse_irm_penalty("full_linear"), IrmPenalty::FullLinear);
  EXPECT_THROW(parse_mask_mode("soft"), ConfigError);
  EXPECT_THROW(parse_mask_regularizer("L1"), ConfigError);
}

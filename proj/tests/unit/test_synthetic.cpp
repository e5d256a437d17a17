#include <gtest/gtest.h>

#include <cmath>

#include "causalbait/errors.hpp"
#include "causalbait/synthetic.hpp"
#include "helpers.hpp"

using namespace causalbait;

namespace {

std::vector<double> label_correlations(const Dataset& ds) {
  const std::size_t n = ds.size();
  std::vector<double> out(ds.d);
  double my = 0.0;
  for (const auto& r : ds.records) my += r.y;
  my /= static_cast<double>(n);
  for (std::size_t j = 0; j < ds.d; ++j) {
    double mx = 0.0;
    for (const auto& r : ds.records) mx += r.x[j];
    mx /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (const auto& r : ds.records) {
      const double a = r.x[j] - mx, b = r.y - my;
      sxy += a * b;
      sxx += a * a;
      syy += b * b;
    }
    out[j] = sxy / std::sqrt(sxx * syy);
  }
  return out;
}

double mean_abs_corr(const std::vector<double>& c, const GroundTruth& gt, DimRole role) {
  double s = 0.0;
  int k = 0;
  for (std::size_t j = 0; j < c.size(); ++j)
    if (gt.roles[j] == role) {
      s += std::abs(c[j]);
      ++k;
    }
  return s / k;
}

}  // namespace

TEST(Generate, LayoutAndSizes) {
  SyntheticSpec spec;
  spec.seed = 1;
  const auto data = generate(spec);
  EXPECT_EQ(data.train.d, 40u);
  EXPECT_EQ(data.train.size(), 2000u);
  EXPECT_EQ(data.val.size(), 500u);
  EXPECT_EQ(data.test_id.size(), 1000u);
  EXPECT_EQ(data.test_ood.size(), 1000u);
  EXPECT_EQ(std::count(data.truth.roles.begin(), data.truth.roles.end(), DimRole::Invariant), 8);
  EXPECT_EQ(std::count(data.truth.roles.begin(), data.truth.roles.end(), DimRole::Spurious), 12);
  EXPECT_EQ(data.truth.patterns.size(), 4u);
  EXPECT_EQ(data.truth.train_scenarios.size(), 2000u);
  EXPECT_NO_THROW(data.train.validate());
}

TEST(Generate, SeededBytesAreIdentical) {
  cbtest::TempDir dir;
  SyntheticSpec spec;
  spec.seed = 5;
  spec.n_per_scenario = 50;
  write_dataset(generate(spec).train, dir / "a.cbfv", dir / "a.jsonl");
  write_dataset(generate(spec).train, dir / "b.cbfv", dir / "b.jsonl");
  EXPECT_EQ(cbtest::read_bytes(dir / "a.cbfv"), cbtest::read_bytes(dir / "b.cbfv"));
  EXPECT_EQ(cbtest::read_bytes(dir / "a.jsonl"), cbtest::read_bytes(dir / "b.jsonl"));
  const Dataset five = generate(spec).train;
  spec.seed = 6;
  EXPECT_FALSE(generate(spec).train == five);
}

TEST(Generate, BalancedRhoRemovesSpuriousCorrelation) {
  SyntheticSpec spec;
  spec.seed = 3;
  spec.rho_train = spec.rho_test = 0.5;
  const auto data = generate(spec);
  const auto c = label_correlations(data.train);
  for (std::size_t j = 0; j < c.size(); ++j)
    if (data.truth.roles[j] == DimRole::Spurious) {
      EXPECT_GT(c[j], -0.15) << j;
      EXPECT_LT(c[j], 0.15) << j;
    }
}

TEST(Generate, CorrelationScanFindsPlantedStructure) {
  SyntheticSpec spec;
  spec.seed = 2;
  const auto data = generate(spec);
  const auto tr = label_correlations(data.train);
  const auto ood = label_correlations(data.test_ood);
  for (std::size_t j = 0; j < tr.size(); ++j) {
    switch (data.truth.roles[j]) {
      case DimRole::Spurious:
        // Disguised cue: carried by non-bait in training, by bait under shift.
        EXPECT_LT(tr[j], -0.2) << j;
        EXPECT_GT(ood[j], 0.2) << j;
        break;
      case DimRole::Invariant:
        EXPECT_GT(tr[j], 0.1) << j;
        EXPECT_GT(ood[j], 0.1) << j;
        break;
      case DimRole::Noise:
        EXPECT_LT(std::abs(tr[j]), 0.08) << j;
        break;
      case DimRole::ScenarioCausal:
        break;
    }
  }
  EXPECT_GT(mean_abs_corr(tr, data.truth, DimRole::Spurious), mean_abs_corr(tr, data.truth, DimRole::Invariant));
}

TEST(Generate, ScenarioCausalSignFollowsPattern) {
  SyntheticSpec spec;
  spec.seed = 4;
  const auto data = generate(spec);
  std::vector<std::size_t> sc;
  for (std::size_t j = 0; j < data.truth.roles.size(); ++j)
    if (data.truth.roles[j] == DimRole::ScenarioCausal) sc.push_back(j);
  for (std::size_t s = 0; s < spec.num_scenarios; ++s) {
    Dataset part;
    part.d = data.train.d;
    for (const auto& r : data.train.records)
      if (*r.scenario == static_cast<int>(s)) part.records.push_back(r);
    const auto c = label_correlations(part);
    for (std::size_t k = 0; k < sc.size(); ++k) EXPECT_EQ(c[sc[k]] > 0, data.truth.patterns[s][k] > 0) << s << "/" << k;
  }
}

TEST(Generate, InvalidSpecIsConfigError) {
  SyntheticSpec spec;
  spec.rho_train = 1.5;
  EXPECT_THROW(generate(spec), ConfigError);
  spec = SyntheticSpec{};
  spec.n_inv = spec.n_sc = spec.n_spur = spec.n_noise = 0;
  EXPECT_THROW(generate(spec), ConfigError);
  EXPECT_THROW(parse_spurious_coding("mirror"), ConfigError);
}

TEST(Truth, JsonRoundTrip) {
  cbtest::TempDir dir;
  SyntheticSpec spec;
  spec.seed = 9;
  spec.n_per_scenario = 20;
  const auto data = generate(spec);
  write_truth(data.truth, dir / "truth.json");
  EXPECT_EQ(load_truth(dir / "truth.json"), data.truth);
}

TEST(MaskAuc, IndicatorConstantAndInverted) {
  GroundTruth gt;
  gt.roles = {DimRole::Invariant, DimRole::Spurious, DimRole::Invariant, DimRole::Noise, DimRole::ScenarioCausal};
  EXPECT_EQ(mask_recovery_auc({1, 0, 1, 0, 1}, gt), 1.0);
  EXPECT_EQ(mask_recovery_auc({0.3f, 0.3f, 0.3f, 0.3f, 0.9f}, gt), 0.5);
  EXPECT_EQ(mask_recovery_auc({0, 1, 0, 1, 0}, gt), 0.0);
  EXPECT_EQ(mask_recovery_auc({0.9f, 0.5f, 0.4f, 0.2f, 0.0f}, gt), 0.75);
  EXPECT_THROW(mask_recovery_auc({1, 0}, gt), ShapeError);
}

TEST(ErmBaseline, ZeroEpochsIsChance) {
  SyntheticSpec spec;
  spec.seed = 1;
  const auto data = generate(spec);
  ClassifierConfig c;
  c.epochs = 0;
  const Metrics m = erm_baseline(data.train, data.test_ood, c, 1);
  EXPECT_NEAR(m.acc, 0.5, 0.05);
}

TEST(ErmBaseline, MultiTestMatchesSingle) {
  SyntheticSpec spec;
  spec.seed = 2;
  spec.n_per_scenario = 100;
  const auto data = generate(spec);
  ClassifierConfig c;
  c.hidden = 32;
  c.epochs = 2;
  c.lr = 1e-3;
  const auto both = erm_baseline(data.train, {&data.test_id, &data.test_ood}, c, 3, &data.val);
  EXPECT_EQ(both[1], erm_baseline(data.train, data.test_ood, c, 3, &data.val));
  EXPECT_THROW(erm_baseline(data.train, cbtest::random_dataset(4, 3, 1), c, 3), ShapeError);
}

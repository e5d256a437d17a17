#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "causalbait/errors.hpp"
#include "causalbait/eval.hpp"
#include "helpers.hpp"

using namespace causalbait;

namespace {

std::size_t count_fields(const std::string& line) { return static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1; }

}  // namespace

TEST(Metrics, AllCorrect) {
  const Metrics m = metrics_from_scores({0.9f, 0.1f, 0.7f, 0.2f}, std::vector<int>{1, 0, 1, 0});
  EXPECT_EQ(m.acc, 1.0);
  EXPECT_EQ(m.pre, 1.0);
  EXPECT_EQ(m.rec, 1.0);
  EXPECT_EQ(m.f1, 1.0);
}

TEST(Metrics, DirectFormulas) {
  const Metrics m = metrics_from_confusion({2, 1, 6, 1});
  EXPECT_DOUBLE_EQ(m.pre, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(m.rec, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(m.f1, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(m.acc, 0.8);
}

TEST(Metrics, NothingPredictedPositive) {
  const Metrics m = metrics_from_scores({0.1f, 0.2f, 0.3f}, std::vector<int>{1, 0, 1});
  EXPECT_EQ(m.pre, 0.0);
  EXPECT_EQ(m.rec, 0.0);
  EXPECT_EQ(m.f1, 0.0);
  EXPECT_DOUBLE_EQ(m.acc, 1.0 / 3.0);
}

TEST(Metrics, ThresholdIsInclusive) {
  const Metrics m = metrics_from_scores({0.5f}, std::vector<int>{1});
  EXPECT_EQ(m.confusion.tp, 1u);
}

TEST(Metrics, EvaluateRejectsEmptyAndMismatched) {
  const ModelBundle b = cbtest::toy_bundle(4, 1);
  Dataset empty;
  empty.d = 4;
  EXPECT_THROW(evaluate(b, empty), ConfigError);
  EXPECT_THROW(evaluate(b, cbtest::random_dataset(3, 5, 1)), ShapeError);
}

TEST(Metrics, EvaluateMatchesPredict) {
  const ModelBundle b = cbtest::toy_bundle(4, 2);
  const Dataset ds = cbtest::random_dataset(12, 4, 3);
  Confusion c;
  for (const auto& r : ds.records) {
    const int p = predict(b, r.x).label;
    if (p && r.y) ++c.tp;
    else if (p) ++c.fp;
    else if (r.y) ++c.fn;
    else ++c.tn;
  }
  EXPECT_EQ(evaluate(b, ds).confusion, c);
}

TEST(PrCurve, PerfectSeparationReachesCorner) {
  const auto c = pr_curve({0.9, 0.8, 0.2, 0.1}, {1, 1, 0, 0});
  bool corner = false;
  for (const auto& p : c.points) corner = corner || (p.recall == 1.0 && p.precision == 1.0);
  EXPECT_TRUE(corner);
}

TEST(PrCurve, AllEqualScoresGiveOneInteriorPoint) {
  const auto c = pr_curve({0.4, 0.4, 0.4, 0.4, 0.4}, {1, 0, 0, 1, 0});
  ASSERT_EQ(c.points.size(), 2u);
  EXPECT_EQ(c.points[1].recall, 1.0);
  EXPECT_DOUBLE_EQ(c.points[1].precision, 0.4);
}

TEST(PrCurve, FourSampleHandCase) {
  const auto c = pr_curve({0.9, 0.8, 0.4, 0.2}, {1, 0, 1, 0});
  // Thresholds enumerated by hand: >= 0.9, 0.8, 0.4, 0.2.
  const std::vector<PrPoint> expected{{0.0, 1.0, std::numeric_limits<double>::infinity()},
                                      {0.5, 1.0, 0.9},
                                      {0.5, 0.5, 0.8},
                                      {1.0, 2.0 / 3.0, 0.4},
                                      {1.0, 0.5, 0.2}};
  ASSERT_EQ(c.points.size(), expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) {
    EXPECT_DOUBLE_EQ(c.points[i].recall, expected[i].recall) << i;
    EXPECT_DOUBLE_EQ(c.points[i].precision, expected[i].precision) << i;
    EXPECT_EQ(c.points[i].threshold, expected[i].threshold) << i;
  }
}

TEST(PrCurve, NoPositivesIsCurveError) {
  EXPECT_THROW(pr_curve({0.3, 0.2}, {0, 0}), CurveError);
  EXPECT_THROW(pr_curve({0.3}, {0, 1}), ShapeError);
}

TEST(PrCurve, CsvAndJsonOutputs) {
  cbtest::TempDir dir;
  write_pr_csv(pr_curve({0.9, 0.4}, {1, 0}), dir / "pr.csv");
  EXPECT_EQ(cbtest::read_bytes(dir / "pr.csv"), "threshold,recall,precision\ninf,0,1\n0.9,1,1\n0.4,1,0.5\n");
  const std::string j = metrics_to_json(metrics_from_confusion({2, 1, 6, 1}));
  EXPECT_LT(j.find("\"acc\""), j.find("\"pre\""));
  EXPECT_LT(j.find("\"pre\""), j.find("\"rec\""));
  EXPECT_LT(j.find("\"rec\""), j.find("\"f1\""));
}

TEST(DumpFactors, RowsColumnsAndDeterminism) {
  cbtest::TempDir dir;
  const std::size_t d = 5;
  const ModelBundle b = cbtest::toy_bundle(d, 4);
  const Dataset ds = cbtest::random_dataset(7, d, 8);
  dump_factors(b, ds, dir / "a.csv");
  dump_factors(b, ds, dir / "b.csv");
  const std::string text = cbtest::read_bytes(dir / "a.csv");
  EXPECT_EQ(text, cbtest::read_bytes(dir / "b.csv"));
  std::istringstream in(text);
  std::string line;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    EXPECT_EQ(count_fields(line), 3 + 3 * d);
    ++rows;
  }
  EXPECT_EQ(rows, 1 + ds.size());
}

TEST(DumpFactors, FactorsRecomposeInput) {
  const std::size_t d = 4;
  const ModelBundle b = cbtest::toy_bundle(d, 6);
  const Dataset ds = cbtest::random_dataset(3, d, 2);
  const Matrix f = classifier_inputs(b, ds.features());
  const auto m = b.mask.effective();
  for (std::size_t i = 0; i < ds.size(); ++i)
    for (std::size_t j = 0; j < d; ++j) {
      EXPECT_FLOAT_EQ(f(i, j), m[j] * ds.records[i].x[j]);
      const float vc = ds.records[i].x[j] - f(i, j);
      EXPECT_TRUE(f(i, d + j) == 0.0f || f(i, d + j) == vc);
    }
}

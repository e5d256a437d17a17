#include <gtest/gtest.h>

#include <map>

#include "causalbait/errors.hpp"
#include "causalbait/pseudo_label.hpp"

using namespace causalbait;

namespace {

PostRecord post(const std::string& id, std::uint64_t fph, double view, std::uint64_t likes) {
  PostRecord r;
  r.id = id;
  r.x = {0.0f};
  r.meta = SocialMetadata{fph, view, likes};
  return r;
}

std::vector<PostRecord> fixture() {
  std::size_t d = 0;
  auto records = load_unlabeled_jsonl(CAUSALBAIT_TEST_DATA "/pseudo_fixture.jsonl", d);
  EXPECT_EQ(d, 2u);
  return records;
}

}  // namespace

TEST(SelectHot, MuIsStrict) {
  const PseudoLabelRules rules;
  EXPECT_TRUE(select_hot({post("a", 100000, 1, 1)}, rules).empty());
  EXPECT_EQ(select_hot({post("a", 150000, 1, 1)}, rules).size(), 1u);
  EXPECT_TRUE(select_hot({}, rules).empty());
}

TEST(SelectHot, MissingMetadataListsIds) {
  PostRecord bare;
  bare.id = "no-meta";
  try {
    select_hot({post("a", 150000, 1, 1), bare}, PseudoLabelRules{});
    FAIL() << "expected a data error";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("no-meta"), std::string::npos);
  }
}

TEST(Label, Rules) {
  const PseudoLabelRules rules;
  EXPECT_EQ(label(post("a", 200000, 8, 500), rules), 1);
  EXPECT_EQ(label(post("a", 200000, 30, 0), rules), 1);
  EXPECT_EQ(label(post("a", 200000, 30, 500), rules), 0);
  EXPECT_EQ(label(post("a", 200000, 10.0, 500), rules), 0);
}

TEST(Label, LikesRuleCanBeDisabled) {
  PseudoLabelRules rules;
  rules.likes_zero_rule = false;
  EXPECT_EQ(label(post("a", 200000, 30, 0), rules), 0);
}

TEST(Label, MonotoneInViewingTime) {
  const PseudoLabelRules rules;
  for (std::uint64_t likes : {0u, 3u})
    for (double v = 20.0; v > 0.0; v -= 0.5)
      EXPECT_GE(label(post("a", 200000, v - 0.5, likes), rules), label(post("a", 200000, v, likes), rules));
}

TEST(RunPseudoLabel, AllBelowMu) {
  const auto res = run_pseudo_label({post("a", 10, 1, 0), post("b", 100000, 1, 0)}, 1, FeatureManifest::single(1),
                                    PseudoLabelRules{});
  EXPECT_TRUE(res.dataset.empty());
  PseudoLabelStats expected;
  expected.input = 2;
  EXPECT_EQ(res.stats, expected);
}

TEST(RunPseudoLabel, HandEnumeratedFixture) {
  const auto res = run_pseudo_label(fixture(), 2, FeatureManifest::single(2), PseudoLabelRules{});
  const std::map<std::string, int> expected{
      {"short-view", 1}, {"zero-likes", 1}, {"both-rules", 1}, {"neither", 0}, {"at-nu", 0}};
  std::map<std::string, int> got;
  for (const auto& r : res.dataset.records) got[r.id] = r.y;
  EXPECT_EQ(got, expected);
  EXPECT_EQ(res.stats.input, 6u);
  EXPECT_EQ(res.stats.hot, 5u);
  EXPECT_EQ(res.stats.viewing_rule, 2u);
  EXPECT_EQ(res.stats.likes_rule, 2u);
  EXPECT_EQ(res.stats.both, 1u);
  EXPECT_EQ(res.stats.clickbait, 3u);
  EXPECT_EQ(res.stats.nonbait, 2u);
  EXPECT_EQ(res.stats.clickbait + res.stats.nonbait, res.dataset.size());
}

TEST(RunPseudoLabel, InvalidRulesAreConfigErrors) {
  PseudoLabelRules rules;
  rules.nu = 0.0;
  EXPECT_THROW(run_pseudo_label({}, 1, FeatureManifest::single(1), rules), ConfigError);
  rules = PseudoLabelRules{};
  rules.mu = 0;
  EXPECT_THROW(run_pseudo_label({}, 1, FeatureManifest::single(1), rules), ConfigError);
}

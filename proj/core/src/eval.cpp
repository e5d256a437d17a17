#include "causalbait/eval.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <numeric>
#include <unordered_map>

#include "causalbait/errors.hpp"
#include "format.hpp"

namespace causalbait {

Metrics metrics_from_confusion(const Confusion& c) {
  Metrics m;
  m.confusion = c;
  const auto n = static_cast<double>(c.total());
  m.acc = n > 0 ? static_cast<double>(c.tp + c.tn) / n : 0.0;
  m.pre = c.tp + c.fp > 0 ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp) : 0.0;
  m.rec = c.tp + c.fn > 0 ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn) : 0.0;
  m.f1 = m.pre + m.rec > 0 ? 2.0 * m.pre * m.rec / (m.pre + m.rec) : 0.0;
  return m;
}

Metrics metrics_from_scores(const std::vector<float>& scores, const std::vector<int>& labels, double threshold) {
  if (scores.size() != labels.size()) throw ShapeError("scores and labels misaligned");
  std::size_t tp = 0, predicted = 0, positives = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const std::size_t pred = scores[i] >= threshold;
    const std::size_t pos = labels[i] == 1;
    tp += pred & pos;
    predicted += pred;
    positives += pos;
  }
  Confusion c;
  c.tp = tp;
  c.fp = predicted - tp;
  c.fn = positives - tp;
  c.tn = scores.size() - predicted - positives + tp;
  return metrics_from_confusion(c);
}

Metrics metrics_from_scores(const std::vector<float>& scores, const std::vector<float>& labels, double threshold) {
  std::vector<int> l(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) l[i] = labels[i] > 0.5f ? 1 : 0;
  return metrics_from_scores(scores, l, threshold);
}

Metrics evaluate(const ModelBundle& bundle, const Dataset& test) {
  if (test.empty()) throw ConfigError("evaluation set is empty");
  if (test.d != bundle.dim()) throw ShapeError("evaluation data dimension differs from the model");
  const auto scores = predict_scores(bundle, test.features());
  std::vector<int> labels;
  for (const auto& r : test.records) labels.push_back(r.y);
  return metrics_from_scores(scores, labels, 0.5);
}

PrCurve pr_curve(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size()) throw ShapeError("scores and labels misaligned");
  // One entry per distinct score, in descending order. Heavily tied scores
  // are grouped by a linear scan into a fixed table; more distinct values
  // than the table holds fall back to a full sort.
  struct Group {
    double score;
    std::uint64_t tp, n;
  };
  constexpr std::size_t kTable = 8;
  std::array<Group, kTable> table;
  std::size_t used = 0;
  std::uint64_t positives = 0;
  bool overflow = false;
  std::size_t last = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const int pos = labels[i] == 1;
    positives += pos;
    if (overflow) continue;
    // Runs of equal scores are common, so try the previous group first.
    std::size_t g = last;
    if (g >= used || table[g].score != scores[i]) {
      g = 0;
      while (g < used && table[g].score != scores[i]) ++g;
    }
    last = g;
    if (g == used) {
      if (used == kTable) {
        overflow = true;
        continue;
      }
      table[used++] = {scores[i], 0, 0};
    }
    table[g].tp += pos;
    ++table[g].n;
  }
  if (positives == 0) throw CurveError("precision-recall curve needs at least one positive");

  std::vector<Group> sorted;
  if (overflow) {
    std::vector<std::pair<double, int>> ranked(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) ranked[i] = {scores[i], labels[i]};
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    for (const auto& [s, y] : ranked) {
      if (sorted.empty() || sorted.back().score != s) sorted.push_back({s, 0, 0});
      sorted.back().tp += y == 1;
      ++sorted.back().n;
    }
  }
  const auto by_score = [](const Group& a, const Group& b) { return a.score > b.score; };
  std::sort(table.begin(), table.begin() + static_cast<std::ptrdiff_t>(used), by_score);
  const Group* first = overflow ? sorted.data() : table.data();
  const std::size_t count = overflow ? sorted.size() : used;

  PrCurve curve;
  curve.points.reserve(count + 1);
  curve.points.push_back({0.0, 1.0, std::numeric_limits<double>::infinity()});
  std::uint64_t tp = 0;
  std::uint64_t taken = 0;
  for (const Group* g = first; g != first + count; ++g) {
    tp += g->tp;
    taken += g->n;
    curve.points.push_back({static_cast<double>(tp) / static_cast<double>(positives),
                            static_cast<double>(tp) / static_cast<double>(taken), g->score});
  }
  return curve;
}

std::string metrics_to_json(const Metrics& m) {
  nlohmann::ordered_json j;
  j["acc"] = m.acc;
  j["pre"] = m.pre;
  j["rec"] = m.rec;
  j["f1"] = m.f1;
  j["confusion"] = {{"tp", m.confusion.tp}, {"fp", m.confusion.fp}, {"tn", m.confusion.tn}, {"fn", m.confusion.fn}};
  return j.dump(2);
}

void write_metrics_json(const Metrics& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FileError("cannot write " + path.string());
  out << metrics_to_json(m) << '\n';
}

void write_pr_csv(const PrCurve& curve, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FileError("cannot write " + path.string());
  out << "threshold,recall,precision\n";
  for (const auto& p : curve.points)
    out << (std::isinf(p.threshold) ? std::string("inf") : detail::shortest(p.threshold)) << ','
        << detail::shortest(p.recall) << ',' << detail::shortest(p.precision) << '\n';
}

void dump_factors(const ModelBundle& bundle, const Dataset& ds, const std::filesystem::path& path) {
  if (ds.d != bundle.dim()) throw ShapeError("factor dump data dimension differs from the model");
  const std::size_t d = ds.d;
  const Matrix feats = classifier_inputs(bundle, ds.features());
  Matrix x = ds.features();
  const auto keep = feature_keep_mask(bundle.manifest, d, bundle.config.ablations.feature_subset);

  std::unordered_map<std::string, int> trained;
  for (std::size_t i = 0; i < bundle.scenario_ids.size() && i < bundle.scenario.assignment.size(); ++i)
    trained.emplace(bundle.scenario_ids[i], bundle.scenario.assignment[i]);

  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FileError("cannot write " + path.string());
  out << "id,y,scenario";
  for (const char* part : {"ic", "sc", "nf"})
    for (std::size_t j = 0; j < d; ++j) out << ',' << part << '_' << j;
  out << '\n';
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto& r = ds.records[i];
    int scenario = -1;
    if (r.scenario) scenario = *r.scenario;
    else if (auto it = trained.find(r.id); it != trained.end()) scenario = it->second;
    out << r.id << ',' << r.y << ',' << scenario;
    for (std::size_t j = 0; j < 2 * d; ++j) out << ',' << detail::shortest(feats(i, j));
    // nf = vc - sc, with vc = x - ic on the kept features.
    for (std::size_t j = 0; j < d; ++j) {
      const float xv = x(i, j) * keep[j];
      const float vc = xv - feats(i, j);
      out << ',' << detail::shortest(vc - feats(i, d + j));
    }
    out << '\n';
  }
  if (!out) throw FileError("write failed for " + path.string());
}

}  // namespace causalbait

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "causalbait/data_io.hpp"
#include "causalbait/trainer.hpp"

namespace causalbait {

struct Confusion {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fn = 0;

  std::uint64_t total() const { return tp + fp + tn + fn; }
  bool operator==(const Confusion&) const = default;
};

// pre = 0 when nothing is predicted positive, rec = 0 when there are no
// positives, f1 = 0 when pre + rec = 0.
struct Metrics {
  double acc = 0.0;
  double pre = 0.0;
  double rec = 0.0;
  double f1 = 0.0;
  Confusion confusion;

  bool operator==(const Metrics&) const = default;
};

Metrics metrics_from_confusion(const Confusion& c);
// Label 1 iff score >= threshold.
Metrics metrics_from_scores(const std::vector<float>& scores, const std::vector<int>& labels, double threshold = 0.5);
Metrics metrics_from_scores(const std::vector<float>& scores, const std::vector<float>& labels, double threshold = 0.5);

// Predicts every record of `test` at threshold 0.5.
Metrics evaluate(const ModelBundle& bundle, const Dataset& test);

struct PrPoint {
  double recall = 0.0;
  double precision = 0.0;
  double threshold = 0.0;  // samples with score >= threshold are positive

  bool operator==(const PrPoint&) const = default;
};

// Starts at the (recall 0, precision 1) endpoint, then one point per
// distinct score in descending order; tied scores enter together, and the
// last point (lowest score) is the all-positive endpoint.
struct PrCurve {
  std::vector<PrPoint> points;
};

PrCurve pr_curve(const std::vector<double>& scores, const std::vector<int>& labels);

std::string metrics_to_json(const Metrics& m);
void write_metrics_json(const Metrics& m, const std::filesystem::path& path);
void write_pr_csv(const PrCurve& curve, const std::filesystem::path& path);

// CSV: id, y, scenario, ic_0..ic_{d-1}, sc_0..., nf_0...
void dump_factors(const ModelBundle& bundle, const Dataset& ds, const std::filesystem::path& path);

}  // namespace causalbait

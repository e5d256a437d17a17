#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "causalbait/data_io.hpp"

namespace causalbait {

struct PseudoLabelRules {
  std::uint64_t mu = 100000;  // hot when forwards_per_hour > mu
  double nu = 10.0;           // clickbait when viewing_seconds < nu
  bool likes_zero_rule = true;

  // Throws ConfigError unless mu > 0 and nu > 0.
  void validate() const;
  bool operator==(const PseudoLabelRules&) const = default;
};

// Keeps records with forwards_per_hour > mu. Every record needs metadata;
// otherwise DataError lists the offending ids.
std::vector<PostRecord> select_hot(const std::vector<PostRecord>& records, const PseudoLabelRules& rules);

// 1 iff viewing_seconds < nu, or likes == 0 when that rule is enabled.
int label(const PostRecord& record, const PseudoLabelRules& rules);

struct PseudoLabelStats {
  std::size_t input = 0;
  std::size_t hot = 0;
  std::size_t viewing_rule = 0;  // fired the viewing-time rule
  std::size_t likes_rule = 0;    // fired the zero-likes rule
  std::size_t both = 0;
  std::size_t clickbait = 0;
  std::size_t nonbait = 0;

  bool operator==(const PseudoLabelStats&) const = default;
};

struct PseudoLabelResult {
  Dataset dataset;
  PseudoLabelStats stats;
};

// Hot filter then labelling. d and manifest are taken from the arguments.
PseudoLabelResult run_pseudo_label(const std::vector<PostRecord>& records, std::size_t d,
                                   const FeatureManifest& manifest, const PseudoLabelRules& rules);

std::string stats_to_json(const PseudoLabelStats& s);

// One JSON object per line: {"id", "x": [...], "meta": {...}}; any "y" is
// ignored. Returns the records and the common feature length.
std::vector<PostRecord> load_unlabeled_jsonl(const std::filesystem::path& path, std::size_t& d);

}  // namespace causalbait

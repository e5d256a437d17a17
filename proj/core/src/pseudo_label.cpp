#include "causalbait/pseudo_label.hpp"

#include <cmath>
#include <fstream>
#include <json.hpp>

#include "causalbait/errors.hpp"

namespace causalbait {

void PseudoLabelRules::validate() const {
  if (mu == 0) throw ConfigError("mu must be positive");
  if (!(nu > 0.0)) throw ConfigError("nu must be positive");
}

std::vector<PostRecord> select_hot(const std::vector<PostRecord>& records, const PseudoLabelRules& rules) {
  std::string missing;
  std::size_t n_missing = 0;
  for (const auto& r : records) {
    if (r.meta) continue;
    if (n_missing++ < 20) missing += (missing.empty() ? "" : ", ") + r.id;
  }
  if (n_missing > 0)
    throw DataError(std::to_string(n_missing) + " record(s) without metadata: " + missing + (n_missing > 20 ? ", ..." : ""));
  std::vector<PostRecord> out;
  for (const auto& r : records)
    if (r.meta->forwards_per_hour > rules.mu) out.push_back(r);
  return out;
}

int label(const PostRecord& record, const PseudoLabelRules& rules) {
  if (!record.meta) throw DataError("record " + record.id + " has no metadata");
  const bool viewing = record.meta->viewing_seconds < rules.nu;
  const bool likes = rules.likes_zero_rule && record.meta->likes == 0;
  return viewing || likes ? 1 : 0;
}

PseudoLabelResult run_pseudo_label(const std::vector<PostRecord>& records, std::size_t d,
                                   const FeatureManifest& manifest, const PseudoLabelRules& rules) {
  rules.validate();
  PseudoLabelResult res;
  res.dataset.d = d;
  res.dataset.manifest = manifest;
  res.stats.input = records.size();
  for (auto& r : select_hot(records, rules)) {
    const bool viewing = r.meta->viewing_seconds < rules.nu;
    const bool likes = rules.likes_zero_rule && r.meta->likes == 0;
    res.stats.viewing_rule += viewing;
    res.stats.likes_rule += likes;
    res.stats.both += viewing && likes;
    r.y = label(r, rules);
    (r.y == 1 ? res.stats.clickbait : res.stats.nonbait)++;
    res.dataset.records.push_back(std::move(r));
  }
  res.stats.hot = res.dataset.size();
  res.dataset.validate();
  return res;
}

std::string stats_to_json(const PseudoLabelStats& s) {
  nlohmann::ordered_json j;
  j["input"] = s.input;
  j["hot"] = s.hot;
  j["viewing_rule"] = s.viewing_rule;
  j["likes_rule"] = s.likes_rule;
  j["both"] = s.both;
  j["clickbait"] = s.clickbait;
  j["nonbait"] = s.nonbait;
  return j.dump(2);
}

std::vector<PostRecord> load_unlabeled_jsonl(const std::filesystem::path& path, std::size_t& d) {
  std::ifstream in(path);
  if (!in) throw FileError("cannot open " + path.string());
  std::vector<PostRecord> out;
  std::string line;
  std::size_t lineno = 0;
  bool have_d = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    PostRecord r;
    try {
      const auto j = nlohmann::json::parse(line);
      r.id = j.at("id").get<std::string>();
      r.x = j.at("x").get<std::vector<float>>();
      if (j.contains("meta") && !j["meta"].is_null()) {
        const auto& m = j["meta"];
        SocialMetadata meta;
        const auto fwd = m.at("forwards_per_hour").get<long long>();
        const auto likes = m.at("likes").get<long long>();
        meta.viewing_seconds = m.at("viewing_seconds").get<double>();
        if (fwd < 0 || likes < 0 || meta.viewing_seconds < 0.0 || !std::isfinite(meta.viewing_seconds))
          throw DataError("metadata of " + r.id + " must be non-negative");
        meta.forwards_per_hour = static_cast<std::uint64_t>(fwd);
        meta.likes = static_cast<std::uint64_t>(likes);
        r.meta = meta;
      }
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
    if (!have_d) {
      d = r.x.size();
      have_d = true;
    } else if (r.x.size() != d) {
      throw DataError("record " + r.id + " has " + std::to_string(r.x.size()) + " features, expected " + std::to_string(d));
    }
    out.push_back(std::move(r));
  }
  if (!have_d) d = 0;
  return out;
}

}  // namespace causalbait

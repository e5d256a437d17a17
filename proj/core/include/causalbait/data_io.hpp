#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "causalbait/matrix.hpp"

namespace causalbait {

struct SocialMetadata {
  std::uint64_t forwards_per_hour = 0;
  double viewing_seconds = 0.0;
  std::uint64_t likes = 0;

  bool operator==(const SocialMetadata&) const = default;
};

struct PostRecord {
  std::string id;
  std::vector<float> x;
  int y = 0;
  std::optional<int> scenario;
  std::optional<SocialMetadata> meta;

  bool operator==(const PostRecord&) const = default;
};

struct FamilySpan {
  std::string name;
  std::size_t start = 0;
  std::size_t length = 0;

  bool operator==(const FamilySpan&) const = default;
};

struct FeatureManifest {
  std::vector<FamilySpan> family_spans;
  std::uint32_t version = 1;

  // Single family covering [0, d).
  static FeatureManifest single(std::size_t d, const std::string& name = "features");
  // Throws FormatError unless spans are disjoint, contiguous and cover [0, d).
  void validate(std::size_t d) const;
  const FamilySpan* find(const std::string& name) const;

  bool operator==(const FeatureManifest&) const = default;
};

struct Dataset {
  std::size_t d = 0;
  std::vector<PostRecord> records;
  FeatureManifest manifest;

  std::size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }

  Matrix features() const;
  std::vector<float> labels() const;
  // Throws DataError on wrong lengths, non-finite values, bad labels, duplicate ids.
  void validate() const;

  bool operator==(const Dataset&) const = default;
};

inline constexpr std::uint32_t kFeatureFormatVersion = 1;

void write_dataset(const Dataset& ds, const std::filesystem::path& features_path,
                   const std::filesystem::path& labels_path);
Dataset load_dataset(const std::filesystem::path& features_path, const std::filesystem::path& labels_path);

std::string manifest_to_json(const FeatureManifest& m);
FeatureManifest manifest_from_json(const std::string& text);

struct SplitRatios {
  double train = 0.8;
  double val = 0.1;
  double test = 0.1;

  bool operator==(const SplitRatios&) const = default;
};

// Seeded shuffle, floor allocation per part, remainder rows to train.
std::tuple<Dataset, Dataset, Dataset> split_dataset(const Dataset& ds, SplitRatios ratios, std::uint64_t seed);

// Duplicates minority-class records (sampled with replacement) until the
// classes balance. Duplicates are appended with ids "<id>#dup<k>".
Dataset oversample(const Dataset& ds, std::uint64_t seed);

}  // namespace causalbait

#pragma once

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>

#include "causalbait/data_io.hpp"
#include "causalbait/rng.hpp"

namespace cbtest {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    std::string name = std::string("causalbait_") + info->test_suite_name() + "_" + info->name();
    for (auto& c : name)
      if (c == '/') c = '_';
    path_ = std::filesystem::temp_directory_path() / name;
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_text(const std::filesystem::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  out << s;
}

// n records of dimension d with uniform features and the given labels
// (alternating 0/1 when empty).
inline causalbait::Dataset random_dataset(std::size_t n, std::size_t d, std::uint64_t seed,
                                          std::vector<int> labels = {}) {
  causalbait::Rng rng(seed);
  causalbait::Dataset ds;
  ds.d = d;
  ds.manifest = causalbait::FeatureManifest::single(d);
  for (std::size_t i = 0; i < n; ++i) {
    causalbait::PostRecord r;
    r.id = "r" + std::to_string(i);
    for (std::size_t j = 0; j < d; ++j) r.x.push_back(static_cast<float>(rng.uniform(-1.0, 1.0)));
    r.y = labels.empty() ? static_cast<int>(i % 2) : labels[i];
    ds.records.push_back(r);
  }
  return ds;
}

}  // namespace cbtest

#include "causalbait/trainer.hpp"

namespace cbtest {

// Untrained but structurally valid bundle for a d-dimensional input.
inline causalbait::ModelBundle toy_bundle(std::size_t d, std::uint64_t seed, bool zero_classifier = false) {
  using namespace causalbait;
  ModelBundle b;
  b.mask = InvarianceMask::uniform(d, MaskMode::Float, MaskRegularizer::L2, 0.5f);
  b.gate = init_gate(d, GateConfig{}, seed);
  b.classifier = zero_classifier ? zero_mlp<float>({2 * d, 8, 1}) : init_mlp<float>({2 * d, 8, 1}, seed + 1);
  b.manifest = FeatureManifest::single(d);
  b.scenario.num_scenarios = 1;
  b.config.seed = seed;
  return b;
}

}  // namespace cbtest

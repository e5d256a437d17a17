#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "causalbait/data_io.hpp"
#include "causalbait/pseudo_label.hpp"
#include "causalbait/synthetic.hpp"
#include "causalbait/trainer.hpp"

namespace causalbait {

// Everything a CLI command needs besides paths given as flags. Parsing is
// strict: unknown keys at any level are a ConfigError. Omitted fields keep
// the defaults of the underlying structs.
struct RunConfig {
  std::optional<std::uint64_t> seed;
  // Seeds for commands that repeat runs (ablate, sweep-scenarios); defaults
  // to {seed}.
  std::vector<std::uint64_t> seeds;
  SplitRatios split;
  bool oversample = true;
  SyntheticSpec synthetic;
  TrainConfig train;
  PseudoLabelRules pseudo_label;
  std::vector<std::size_t> sweep_scenarios;  // defaults to 1..25
  // Families kept by the text-only ablation; skipped when none exist.
  std::vector<std::string> text_families = {"textual"};
  std::string data_dir;
  std::string out_dir;

  // Throws ConfigError naming the command when no seed is set.
  std::uint64_t require_seed(const std::string& command) const;
  std::vector<std::uint64_t> seed_list() const;
  // Copies the seed into the train and synthetic sections.
  void apply_seed(std::uint64_t s);

  bool operator==(const RunConfig&) const = default;
};

RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::filesystem::path& path);
// Fully resolved document, every field present.
std::string run_config_to_json(const RunConfig& cfg);

std::string train_config_to_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(const std::string& json_text);

}  // namespace causalbait

#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace causalbait::cli {

struct GenArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
};

struct TrainArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string data;
  std::string out;
};

struct EvalArgs {
  std::string bundle;
  std::string data;
  std::string split = "test_ood";
  std::string out;
  bool dump_factors = false;
};

struct StudyArgs {
  std::string config;
  std::optional<std::uint64_t> seed;  // replaces the config's seed list
  std::string data;                   // synthetic data when empty
  std::string out;
  bool mask_configs = false;
};

struct PseudoLabelArgs {
  std::string config;
  std::string input;
  std::string out;
};

struct CheckGradArgs {
  std::string out;
  std::uint64_t seed = 0;
};

// Each returns the process exit code; library errors propagate.
int run_gen(const GenArgs& a);
int run_train(const TrainArgs& a);
int run_eval(const EvalArgs& a);
int run_ablate(const StudyArgs& a);
int run_sweep(const StudyArgs& a);
int run_pseudo_label(const PseudoLabelArgs& a);
int run_check_grad(const CheckGradArgs& a);

}  // namespace causalbait::cli

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace causalbait {

struct GradCheckConfig {
  std::size_t instances = 100;
  double h = 1e-3;
  double tolerance = 1e-4;        // norm-wise relative error
  double cosine_threshold = 0.99;  // straight-through gate check
  // Instances whose rectifier inputs come closer than this to zero are
  // redrawn, since central differences straddling the kink are meaningless.
  double kink_margin = 1e-2;
  // Instances whose gradient norm falls below this are redrawn as well:
  // near a stationary point the relative error measures only the O(h^2)
  // truncation of the central difference.
  double flat_floor = 1e-3;
  std::uint64_t seed = 0;
};

struct KernelReport {
  std::string kernel;
  std::string metric;  // "rel_err" or "cosine"
  std::size_t instances = 0;
  std::size_t redrawn = 0;
  double worst = 0.0;  // largest rel_err, or smallest cosine
  bool passed = false;
};

// Analytic gradients on a float64 shadow path against central differences
// with inputs drawn from [-1, 1].
std::vector<KernelReport> run_gradcheck(const GradCheckConfig& cfg);

std::string gradcheck_report_json(const std::vector<KernelReport>& reports);

}  // namespace causalbait

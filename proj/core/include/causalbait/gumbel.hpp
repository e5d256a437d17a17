#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "causalbait/matrix.hpp"

namespace causalbait {

// round(k_fraction * d); throws GateError when that keeps 0 or all d dims.
std::size_t retained_count(std::size_t d, double k_fraction);

// Standard Gumbel samples, deterministic in seed.
Matrix gumbel_noise(std::size_t rows, std::size_t cols, std::uint64_t seed);

// Single-vector gate: adds seeded Gumbel noise (skipped when with_noise is
// false), divides by temperature, then returns either the hard top-k
// indicator or k * softmax.
std::vector<float> gumbel_topk_gate(const std::vector<float>& scores, double k_fraction, double temperature,
                                    std::uint64_t seed, bool hard, bool with_noise = true);

}  // namespace causalbait

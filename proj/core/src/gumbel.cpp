#include "causalbait/gumbel.hpp"

#include <cmath>
#include <string>

#include "causalbait/autodiff.hpp"
#include "causalbait/errors.hpp"
#include "causalbait/rng.hpp"

namespace causalbait {

std::size_t retained_count(std::size_t d, double k_fraction) {
  if (!(k_fraction > 0.0 && k_fraction < 1.0)) throw GateError("k_fraction must lie in (0,1)");
  const auto k = static_cast<std::size_t>(std::llround(k_fraction * static_cast<double>(d)));
  if (k == 0 || k >= d)
    throw GateError("round(" + std::to_string(k_fraction) + " * " + std::to_string(d) + ") = " +
                    std::to_string(k) + " leaves a degenerate gate");
  return k;
}

Matrix gumbel_noise(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Rng rng(seed);
  Matrix g(rows, cols);
  for (auto& v : g.storage()) v = static_cast<float>(rng.gumbel());
  return g;
}

std::vector<float> gumbel_topk_gate(const std::vector<float>& scores, double k_fraction, double temperature,
                                    std::uint64_t seed, bool hard, bool with_noise) {
  if (!(temperature > 0.0)) throw GateError("temperature must be positive");
  const std::size_t d = scores.size();
  const std::size_t k = retained_count(d, k_fraction);
  Matrix noise = with_noise ? gumbel_noise(1, d, seed) : Matrix(1, d);
  ad::Tape<float> tape;
  auto s = tape.constant(Matrix::row_vector(scores));
  auto g = hard ? ad::st_topk_gate(s, noise, k, static_cast<float>(temperature))
                : ad::soft_topk_gate(s, noise, k, static_cast<float>(temperature));
  return tape.value(g).storage();
}

}  // namespace causalbait

#include "causalbait/mlp.hpp"

#include <cmath>
#include <string>

#include "causalbait/errors.hpp"
#include "causalbait/rng.hpp"

namespace causalbait {

template <class T>
std::vector<ad::Param<T>*> BasicMlp<T>::params() {
  std::vector<ad::Param<T>*> out;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    out.push_back(&weights[l]);
    out.push_back(&biases[l]);
  }
  return out;
}

template <class T>
void BasicMlp<T>::zero_grad() {
  for (auto* p : params()) p->zero_grad();
}

template <class T>
bool BasicMlp<T>::operator==(const BasicMlp& o) const {
  if (sizes != o.sizes) return false;
  for (std::size_t l = 0; l < weights.size(); ++l)
    if (!(weights[l].value == o.weights[l].value) || !(biases[l].value == o.biases[l].value)) return false;
  return true;
}

template <class T>
BasicMlp<T> zero_mlp(const std::vector<std::size_t>& sizes) {
  if (sizes.size() < 2) throw ConfigError("network needs at least an input and an output size");
  BasicMlp<T> net;
  net.sizes = sizes;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    if (sizes[l] == 0 || sizes[l + 1] == 0) throw ConfigError("network layer size must be positive");
    net.weights.emplace_back("W" + std::to_string(l), BasicMatrix<T>(sizes[l], sizes[l + 1]));
    net.biases.emplace_back("b" + std::to_string(l), BasicMatrix<T>(1, sizes[l + 1]));
  }
  return net;
}

template <class T>
BasicMlp<T> init_mlp(const std::vector<std::size_t>& sizes, std::uint64_t seed) {
  BasicMlp<T> net = zero_mlp<T>(sizes);
  Rng rng(seed);
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(sizes[l]));
    for (auto& w : net.weights[l].value.storage()) w = static_cast<T>(rng.uniform(-bound, bound));
    for (auto& b : net.biases[l].value.storage()) b = static_cast<T>(rng.uniform(-bound, bound));
  }
  return net;
}

template <class T>
ad::Var<T> mlp_forward(ad::Tape<T>& tape, BasicMlp<T>& net, ad::Var<T> x) {
  if (tape.value(x).cols() != net.input_size())
    throw ShapeError("network expects " + std::to_string(net.input_size()) + " inputs, got " +
                     std::to_string(tape.value(x).cols()));
  ad::Var<T> h = x;
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    h = ad::add_bias(ad::matmul(h, tape.param(net.weights[l])), tape.param(net.biases[l]));
    if (l + 1 < net.weights.size()) h = ad::relu(h);
  }
  return h;
}

template <class T>
ad::Var<T> mlp_forward_frozen(ad::Tape<T>& tape, const BasicMlp<T>& net, ad::Var<T> x) {
  if (tape.value(x).cols() != net.input_size())
    throw ShapeError("network expects " + std::to_string(net.input_size()) + " inputs, got " +
                     std::to_string(tape.value(x).cols()));
  ad::Var<T> h = x;
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    h = ad::add_bias(ad::matmul(h, tape.constant(net.weights[l].value)), tape.constant(net.biases[l].value));
    if (l + 1 < net.weights.size()) h = ad::relu(h);
  }
  return h;
}

template <class T>
BasicMatrix<T> mlp_forward(const BasicMlp<T>& net, const BasicMatrix<T>& x) {
  if (x.cols() != net.input_size())
    throw ShapeError("network expects " + std::to_string(net.input_size()) + " inputs, got " +
                     std::to_string(x.cols()));
  BasicMatrix<T> h = x;
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    h = matmul(h, net.weights[l].value);
    const auto& b = net.biases[l].value;
    const bool hidden = l + 1 < net.weights.size();
    for (std::size_t r = 0; r < h.rows(); ++r) {
      T* row = h.row(r);
      for (std::size_t c = 0; c < h.cols(); ++c) {
        row[c] += b[c];
        if (hidden && row[c] < T(0)) row[c] = T(0);
      }
    }
  }
  return h;
}

#define INSTANTIATE(T)                                                                    \
  template struct BasicMlp<T>;                                                            \
  template BasicMlp<T> init_mlp<T>(const std::vector<std::size_t>&, std::uint64_t);       \
  template BasicMlp<T> zero_mlp<T>(const std::vector<std::size_t>&);                      \
  template ad::Var<T> mlp_forward<T>(ad::Tape<T>&, BasicMlp<T>&, ad::Var<T>);             \
  template ad::Var<T> mlp_forward_frozen<T>(ad::Tape<T>&, const BasicMlp<T>&, ad::Var<T>); \
  template BasicMatrix<T> mlp_forward<T>(const BasicMlp<T>&, const BasicMatrix<T>&);

INSTANTIATE(float)
INSTANTIATE(double)

#undef INSTANTIATE

}  // namespace causalbait

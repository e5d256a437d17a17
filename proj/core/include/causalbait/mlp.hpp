#pragma once

#include <cstdint>
#include <vector>

#include "causalbait/autodiff.hpp"
#include "causalbait/matrix.hpp"

namespace causalbait {

// Fully connected network: rectifier on hidden layers, linear output.
// sizes = {in, h1, ..., out}; layer l maps sizes[l] -> sizes[l+1] with
// weight (sizes[l] x sizes[l+1]) and bias (1 x sizes[l+1]).
template <class T>
struct BasicMlp {
  std::vector<std::size_t> sizes;
  std::vector<ad::Param<T>> weights;
  std::vector<ad::Param<T>> biases;

  std::size_t input_size() const { return sizes.front(); }
  std::size_t output_size() const { return sizes.back(); }
  std::size_t num_layers() const { return weights.size(); }

  std::vector<ad::Param<T>*> params();
  void zero_grad();

  template <class U>
  BasicMlp<U> cast() const {
    BasicMlp<U> out;
    out.sizes = sizes;
    for (const auto& w : weights) out.weights.emplace_back(w.name, w.value.template cast<U>());
    for (const auto& b : biases) out.biases.emplace_back(b.name, b.value.template cast<U>());
    return out;
  }

  bool operator==(const BasicMlp& o) const;
};

using MlpParams = BasicMlp<float>;

// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for weights and biases.
template <class T>
BasicMlp<T> init_mlp(const std::vector<std::size_t>& sizes, std::uint64_t seed);

// All-zero parameters of the given architecture.
template <class T>
BasicMlp<T> zero_mlp(const std::vector<std::size_t>& sizes);

// Records the forward pass on `tape`; x must have sizes.front() columns.
template <class T>
ad::Var<T> mlp_forward(ad::Tape<T>& tape, BasicMlp<T>& net, ad::Var<T> x);

// Same as above but the weights enter the tape as constants, so gradients
// flow to x only.
template <class T>
ad::Var<T> mlp_forward_frozen(ad::Tape<T>& tape, const BasicMlp<T>& net, ad::Var<T> x);

// Inference-only forward pass (no tape).
template <class T>
BasicMatrix<T> mlp_forward(const BasicMlp<T>& net, const BasicMatrix<T>& x);

}  // namespace causalbait

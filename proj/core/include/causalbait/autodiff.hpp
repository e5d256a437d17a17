#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "causalbait/matrix.hpp"

// Reverse-mode differentiation over dense matrices.
//
// A Tape records every operation of one forward pass. Parameters are held
// outside the tape in Param objects; calling backward() accumulates into
// Param::grad. Tapes are single-use: build, backward once, discard.
namespace causalbait::ad {

template <class T>
struct Param {
  std::string name;
  BasicMatrix<T> value;
  BasicMatrix<T> grad;

  Param() = default;
  Param(std::string n, BasicMatrix<T> v)
      : name(std::move(n)), value(std::move(v)), grad(value.rows(), value.cols()) {}

  void zero_grad() { grad = BasicMatrix<T>(value.rows(), value.cols()); }
};

template <class T>
class Tape;

template <class T>
struct Var {
  Tape<T>* tape = nullptr;
  std::size_t id = 0;
};

template <class T>
class Tape {
 public:
  using M = BasicMatrix<T>;
  using BackwardFn = std::function<void(Tape&, const M& out_grad)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var<T> constant(M value);
  // Leaf whose gradient is accumulated into p.grad by backward().
  Var<T> param(Param<T>& p);
  // Leaf that tracks a gradient readable through grad() but is not a Param.
  Var<T> leaf(M value);

  const M& value(Var<T> v) const;
  T scalar(Var<T> v) const;
  // Gradient of the last backward() loss with respect to v.
  const M& grad(Var<T> v) const;

  void backward(Var<T> loss);

  std::size_t size() const { return nodes_.size(); }
  bool needs_grad(std::size_t id) const { return nodes_[id].needs_grad; }

  // Smallest |pre-activation| seen by any rectifier on this tape. Gradient
  // checks resample instances that sit too close to the kink.
  double relu_margin() const { return relu_margin_; }
  void note_relu_margin(double m) { relu_margin_ = std::min(relu_margin_, m); }

  // Op construction.
  Var<T> push(M value, const std::vector<Var<T>>& inputs, BackwardFn fn);
  void accumulate(std::size_t id, const M& g);
  void check_owned(Var<T> v, const char* op) const;

 private:
  struct Node {
    M value;
    M grad;
    BackwardFn backward;
    Param<T>* param = nullptr;
    bool needs_grad = false;
  };
  std::vector<Node> nodes_;
  bool backward_done_ = false;
  double relu_margin_ = std::numeric_limits<double>::infinity();
};

template <class T> Var<T> matmul(Var<T> a, Var<T> b);
// a (n x c) + b (1 x c) broadcast over rows.
template <class T> Var<T> add_bias(Var<T> a, Var<T> b);
template <class T> Var<T> add(Var<T> a, Var<T> b);
template <class T> Var<T> mul(Var<T> a, Var<T> b);
// a (n x c) * r (1 x c) broadcast over rows.
template <class T> Var<T> mul_row(Var<T> a, Var<T> r);
template <class T> Var<T> scale(Var<T> a, T c);
template <class T> Var<T> add_scalar(Var<T> a, T c);
template <class T> Var<T> one_minus(Var<T> a);
template <class T> Var<T> relu(Var<T> a);
template <class T> Var<T> sigmoid(Var<T> a);
template <class T> Var<T> concat_cols(Var<T> a, Var<T> b);
template <class T> Var<T> sum(Var<T> a);
template <class T> Var<T> sum_squares(Var<T> a);

// Mean binary cross-entropy of logits z (n x 1) against targets in {0,1}.
template <class T> Var<T> bce_with_logits(Var<T> z, const std::vector<T>& targets);

// Squared derivative of the mean cross-entropy with respect to a scalar
// multiplier w on the logits, evaluated at w = 1.
template <class T> Var<T> irm_dummy_penalty(Var<T> z, const std::vector<T>& targets);

// Squared norm of the gradient of the mean cross-entropy with respect to
// the weights and bias of the linear head that produced z = ic W + b.
template <class T> Var<T> irm_linear_penalty(Var<T> ic, Var<T> z, const std::vector<T>& targets);

// Forward: indicator of a >= threshold. Backward: identity.
template <class T> Var<T> st_threshold(Var<T> a, T threshold = T(0.5));

// Per-row gate over scores + noise. Hard forward is the top-k indicator;
// backward is the gradient of k * softmax((scores + noise) / tau).
template <class T> Var<T> st_topk_gate(Var<T> scores, const BasicMatrix<T>& noise, std::size_t k, T tau);
// k * softmax((scores + noise) / tau), differentiable.
template <class T> Var<T> soft_topk_gate(Var<T> scores, const BasicMatrix<T>& noise, std::size_t k, T tau);

// Top-k indicator per row; ties resolve to the lower column index.
template <class T>
BasicMatrix<T> topk_indicator(const BasicMatrix<T>& s, std::size_t k);

template <class T>
T sigmoid_scalar(T z);
// Per-sample cross-entropy of one logit, numerically stable.
template <class T>
T bce_scalar(T z, T y);

}  // namespace causalbait::ad

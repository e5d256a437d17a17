#include "causalbait/autodiff.hpp"

#include <cmath>
#include <numeric>

#include "causalbait/errors.hpp"

namespace causalbait::ad {

namespace {

std::string shape_str(std::size_t r, std::size_t c) {
  return std::to_string(r) + "x" + std::to_string(c);
}

template <class T>
void check_targets(const std::vector<T>& y, std::size_t n, const char* op) {
  if (y.size() != n)
    throw ShapeError(std::string(op) + ": " + std::to_string(y.size()) + " targets for " +
                     std::to_string(n) + " logits");
  for (T v : y)
    if (v != T(0) && v != T(1)) throw LabelError(std::string(op) + ": target outside {0,1}");
}

template <class T>
void check_column(const BasicMatrix<T>& z, const char* op) {
  if (z.cols() != 1) throw ShapeError(std::string(op) + ": logits must be n x 1, got " + shape_str(z.rows(), z.cols()));
  if (z.rows() == 0) throw ShapeError(std::string(op) + ": empty batch");
}

template <class T>
Tape<T>& same_tape(Var<T> a, Var<T> b, const char* op) {
  if (a.tape == nullptr || a.tape != b.tape)
    throw GraphError(std::string(op) + ": operands recorded on different tapes");
  a.tape->check_owned(a, op);
  a.tape->check_owned(b, op);
  return *a.tape;
}

template <class T>
Tape<T>& owner(Var<T> a, const char* op) {
  if (a.tape == nullptr) throw GraphError(std::string(op) + ": operand has no tape");
  a.tape->check_owned(a, op);
  return *a.tape;
}

// Shared soft relaxation: returns p = softmax((s + g) / tau) per row.
template <class T>
BasicMatrix<T> row_softmax(const BasicMatrix<T>& s, const BasicMatrix<T>& noise, T tau) {
  BasicMatrix<T> p(s.rows(), s.cols());
  for (std::size_t r = 0; r < s.rows(); ++r) {
    T mx = -std::numeric_limits<T>::infinity();
    for (std::size_t c = 0; c < s.cols(); ++c) mx = std::max(mx, (s(r, c) + noise(r, c)) / tau);
    T tot = 0;
    for (std::size_t c = 0; c < s.cols(); ++c) {
      p(r, c) = std::exp((s(r, c) + noise(r, c)) / tau - mx);
      tot += p(r, c);
    }
    for (std::size_t c = 0; c < s.cols(); ++c) p(r, c) /= tot;
  }
  return p;
}

template <class T>
void check_gate_args(const BasicMatrix<T>& s, const BasicMatrix<T>& noise, std::size_t k, T tau) {
  if (!s.same_shape(noise)) throw ShapeError("gate noise shape does not match scores");
  if (k == 0 || k >= s.cols())
    throw GateError("gate keeps " + std::to_string(k) + " of " + std::to_string(s.cols()) + " dims");
  if (!(tau > T(0))) throw GateError("gate temperature must be positive");
}

template <class T>
typename Tape<T>::BackwardFn softmax_backward(std::size_t in, BasicMatrix<T> p, std::size_t k, T tau) {
  return [in, p = std::move(p), k, tau](Tape<T>& t, const BasicMatrix<T>& g) {
    BasicMatrix<T> gs(p.rows(), p.cols());
    const T kk = static_cast<T>(k);
    for (std::size_t r = 0; r < p.rows(); ++r) {
      T dot = 0;
      for (std::size_t c = 0; c < p.cols(); ++c) dot += g(r, c) * p(r, c);
      for (std::size_t c = 0; c < p.cols(); ++c) gs(r, c) = kk / tau * p(r, c) * (g(r, c) - dot);
    }
    t.accumulate(in, gs);
  };
}

}  // namespace

template <class T>
T sigmoid_scalar(T z) {
  if (z >= 0) {
    T e = std::exp(-z);
    return T(1) / (T(1) + e);
  }
  T e = std::exp(z);
  return e / (T(1) + e);
}

template <class T>
T bce_scalar(T z, T y) {
  return std::max(z, T(0)) - z * y + std::log1p(std::exp(-std::abs(z)));
}

// ---- Tape -------------------------------------------------------------------

template <class T>
void Tape<T>::check_owned(Var<T> v, const char* op) const {
  if (v.tape != this || v.id >= nodes_.size())
    throw GraphError(std::string(op) + ": tensor is not part of this graph");
}

template <class T>
Var<T> Tape<T>::constant(M value) {
  nodes_.push_back(Node{std::move(value), {}, {}, nullptr, false});
  return {this, nodes_.size() - 1};
}

template <class T>
Var<T> Tape<T>::param(Param<T>& p) {
  nodes_.push_back(Node{p.value, {}, {}, &p, true});
  return {this, nodes_.size() - 1};
}

template <class T>
Var<T> Tape<T>::leaf(M value) {
  nodes_.push_back(Node{std::move(value), {}, {}, nullptr, true});
  return {this, nodes_.size() - 1};
}

template <class T>
const BasicMatrix<T>& Tape<T>::value(Var<T> v) const {
  check_owned(v, "value");
  return nodes_[v.id].value;
}

template <class T>
T Tape<T>::scalar(Var<T> v) const {
  const M& m = value(v);
  if (m.size() != 1) throw ShapeError("scalar() on " + shape_str(m.rows(), m.cols()) + " tensor");
  return m[0];
}

template <class T>
const BasicMatrix<T>& Tape<T>::grad(Var<T> v) const {
  check_owned(v, "grad");
  if (!backward_done_) throw GraphError("grad requested before backward");
  const Node& n = nodes_[v.id];
  if (!n.needs_grad) throw GraphError("grad requested for a tensor that does not require gradients");
  return n.grad;
}

template <class T>
Var<T> Tape<T>::push(M value, const std::vector<Var<T>>& inputs, BackwardFn fn) {
  bool needs = false;
  for (const auto& in : inputs) {
    check_owned(in, "push");
    needs = needs || nodes_[in.id].needs_grad;
  }
  nodes_.push_back(Node{std::move(value), {}, needs ? std::move(fn) : BackwardFn{}, nullptr, needs});
  return {this, nodes_.size() - 1};
}

template <class T>
void Tape<T>::accumulate(std::size_t id, const M& g) {
  Node& n = nodes_[id];
  if (!n.needs_grad) return;
  if (!g.same_shape(n.value)) throw ShapeError("gradient shape mismatch in backward");
  for (std::size_t i = 0; i < g.size(); ++i) n.grad[i] += g[i];
}

template <class T>
void Tape<T>::backward(Var<T> loss) {
  check_owned(loss, "backward");
  if (backward_done_) throw GraphError("backward called twice on one tape");
  if (nodes_[loss.id].value.size() != 1) throw ShapeError("backward needs a scalar loss");
  for (std::size_t i = 0; i <= loss.id; ++i)
    if (nodes_[i].needs_grad) nodes_[i].grad = M(nodes_[i].value.rows(), nodes_[i].value.cols());
  backward_done_ = true;
  if (!nodes_[loss.id].needs_grad) return;
  nodes_[loss.id].grad[0] = T(1);
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.needs_grad) continue;
    if (n.backward) n.backward(*this, n.grad);
    if (n.param != nullptr) {
      for (std::size_t j = 0; j < n.grad.size(); ++j) n.param->grad[j] += n.grad[j];
    }
  }
}

// ---- Ops ----------------------------------------------------------------

template <class T>
Var<T> matmul(Var<T> a, Var<T> b) {
  Tape<T>& t = same_tape(a, b, "matmul");
  auto out = causalbait::matmul(t.value(a), t.value(b));
  return t.push(std::move(out), {a, b}, [a, b](Tape<T>& tp, const BasicMatrix<T>& g) {
    if (tp.needs_grad(a.id)) tp.accumulate(a.id, matmul_nt(g, tp.value(b)));
    if (tp.needs_grad(b.id)) tp.accumulate(b.id, matmul_tn(tp.value(a), g));
  });
}

template <class T>
Var<T> add_bias(Var<T> a, Var<T> b) {
  Tape<T>& t = same_tape(a, b, "add_bias");
  const auto& av = t.value(a);
  const auto& bv = t.value(b);
  if (bv.rows() != 1 || bv.cols() != av.cols())
    throw ShapeError("add_bias " + shape_str(av.rows(), av.cols()) + " + " + shape_str(bv.rows(), bv.cols()));
  BasicMatrix<T> out = av;
  for (std::size_t r = 0; r < out.rows(); ++r)
    for (std::size_t c = 0; c < out.cols(); ++c) out(r, c) += bv[c];
  return t.push(std::move(out), {a, b}, [a, b](Tape<T>& tp, const BasicMatrix<T>& g) {
    tp.accumulate(a.id, g);
    if (tp.needs_grad(b.id)) {
      BasicMatrix<T> gb(1, g.cols());
      for (std::size_t r = 0; r < g.rows(); ++r)
        for (std::size_t c = 0; c < g.cols(); ++c) gb[c] += g(r, c);
      tp.accumulate(b.id, gb);
    }
  });
}

template <class T>
Var<T> add(Var<T> a, Var<T> b) {
  Tape<T>& t = same_tape(a, b, "add");
  const auto& av = t.value(a);
  const auto& bv = t.value(b);
  if (!av.same_shape(bv)) throw ShapeError("add " + shape_str(av.rows(), av.cols()) + " + " + shape_str(bv.rows(), bv.cols()));
  BasicMatrix<T> out = av;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  return t.push(std::move(out), {a, b}, [a, b](Tape<T>& tp, const BasicMatrix<T>& g) {
    tp.accumulate(a.id, g);
    tp.accumulate(b.id, g);
  });
}

template <class T>
Var<T> mul(Var<T> a, Var<T> b) {
  Tape<T>& t = same_tape(a, b, "mul");
  const auto& av = t.value(a);
  const auto& bv = t.value(b);
  if (!av.same_shape(bv)) throw ShapeError("mul " + shape_str(av.rows(), av.cols()) + " * " + shape_str(bv.rows(), bv.cols()));
  BasicMatrix<T> out = av;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= bv[i];
  return t.push(std::move(out), {a, b}, [a, b](Tape<T>& tp, const BasicMatrix<T>& g) {
    if (tp.needs_grad(a.id)) {
      BasicMatrix<T> ga = g;
      const auto& bv2 = tp.value(b);
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] *= bv2[i];
      tp.accumulate(a.id, ga);
    }
    if (tp.needs_grad(b.id)) {
      BasicMatrix<T> gb = g;
      const auto& av2 = tp.value(a);
      for (std::size_t i = 0; i < gb.size(); ++i) gb[i] *= av2[i];
      tp.accumulate(b.id, gb);
    }
  });
}

template <class T>
Var<T> mul_row(Var<T> a, Var<T> r) {
  Tape<T>& t = same_tape(a, r, "mul_row");
  const auto& av = t.value(a);
  const auto& rv = t.value(r);
  if (rv.rows() != 1 || rv.cols() != av.cols())
    throw ShapeError("mul_row " + shape_str(av.rows(), av.cols()) + " * " + shape_str(rv.rows(), rv.cols()));
  BasicMatrix<T> out = av;
  for (std::size_t i = 0; i < out.rows(); ++i)
    for (std::size_t c = 0; c < out.cols(); ++c) out(i, c) *= rv[c];
  return t.push(std::move(out), {a, r}, [a, r](Tape<T>& tp, const BasicMatrix<T>& g) {
    const auto& av2 = tp.value(a);
    const auto& rv2 = tp.value(r);
    if (tp.needs_grad(a.id)) {
      BasicMatrix<T> ga = g;
      for (std::size_t i = 0; i < ga.rows(); ++i)
        for (std::size_t c = 0; c < ga.cols(); ++c) ga(i, c) *= rv2[c];
      tp.accumulate(a.id, ga);
    }
    if (tp.needs_grad(r.id)) {
      BasicMatrix<T> gr(1, g.cols());
      for (std::size_t i = 0; i < g.rows(); ++i)
        for (std::size_t c = 0; c < g.cols(); ++c) gr[c] += g(i, c) * av2(i, c);
      tp.accumulate(r.id, gr);
    }
  });
}

template <class T>
Var<T> scale(Var<T> a, T c) {
  Tape<T>& t = owner(a, "scale");
  BasicMatrix<T> out = t.value(a);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= c;
  return t.push(std::move(out), {a}, [a, c](Tape<T>& tp, const BasicMatrix<T>& g) {
    BasicMatrix<T> ga = g;
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] *= c;
    tp.accumulate(a.id, ga);
  });
}

template <class T>
Var<T> add_scalar(Var<T> a, T c) {
  Tape<T>& t = owner(a, "add_scalar");
  BasicMatrix<T> out = t.value(a);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += c;
  return t.push(std::move(out), {a}, [a](Tape<T>& tp, const BasicMatrix<T>& g) { tp.accumulate(a.id, g); });
}

template <class T>
Var<T> one_minus(Var<T> a) {
  Tape<T>& t = owner(a, "one_minus");
  BasicMatrix<T> out = t.value(a);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = T(1) - out[i];
  return t.push(std::move(out), {a}, [a](Tape<T>& tp, const BasicMatrix<T>& g) {
    BasicMatrix<T> ga = g;
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] = -ga[i];
    tp.accumulate(a.id, ga);
  });
}

template <class T>
Var<T> relu(Var<T> a) {
  Tape<T>& t = owner(a, "relu");
  BasicMatrix<T> out = t.value(a);
  double margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < out.size(); ++i) {
    margin = std::min(margin, static_cast<double>(std::abs(out[i])));
    if (out[i] < T(0)) out[i] = T(0);
  }
  t.note_relu_margin(margin);
  return t.push(std::move(out), {a}, [a](Tape<T>& tp, const BasicMatrix<T>& g) {
    const auto& av = tp.value(a);
    BasicMatrix<T> ga = g;
    for (std::size_t i = 0; i < ga.size(); ++i)
      if (!(av[i] > T(0))) ga[i] = T(0);
    tp.accumulate(a.id, ga);
  });
}

template <class T>
Var<T> sigmoid(Var<T> a) {
  Tape<T>& t = owner(a, "sigmoid");
  BasicMatrix<T> out = t.value(a);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = sigmoid_scalar(out[i]);
  BasicMatrix<T> s = out;
  return t.push(std::move(out), {a}, [a, s = std::move(s)](Tape<T>& tp, const BasicMatrix<T>& g) {
    BasicMatrix<T> ga = g;
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] *= s[i] * (T(1) - s[i]);
    tp.accumulate(a.id, ga);
  });
}

template <class T>
Var<T> concat_cols(Var<T> a, Var<T> b) {
  Tape<T>& t = same_tape(a, b, "concat_cols");
  auto out = hconcat(t.value(a), t.value(b));
  const std::size_t ca = t.value(a).cols();
  return t.push(std::move(out), {a, b}, [a, b, ca](Tape<T>& tp, const BasicMatrix<T>& g) {
    const std::size_t cb = g.cols() - ca;
    if (tp.needs_grad(a.id)) {
      BasicMatrix<T> ga(g.rows(), ca);
      for (std::size_t r = 0; r < g.rows(); ++r) std::copy(g.row(r), g.row(r) + ca, ga.row(r));
      tp.accumulate(a.id, ga);
    }
    if (tp.needs_grad(b.id)) {
      BasicMatrix<T> gb(g.rows(), cb);
      for (std::size_t r = 0; r < g.rows(); ++r) std::copy(g.row(r) + ca, g.row(r) + ca + cb, gb.row(r));
      tp.accumulate(b.id, gb);
    }
  });
}

template <class T>
Var<T> sum(Var<T> a) {
  Tape<T>& t = owner(a, "sum");
  const auto& av = t.value(a);
  T s = std::accumulate(av.storage().begin(), av.storage().end(), T(0));
  return t.push(BasicMatrix<T>(1, 1, s), {a}, [a](Tape<T>& tp, const BasicMatrix<T>& g) {
    const auto& av2 = tp.value(a);
    tp.accumulate(a.id, BasicMatrix<T>(av2.rows(), av2.cols(), g[0]));
  });
}

template <class T>
Var<T> sum_squares(Var<T> a) {
  Tape<T>& t = owner(a, "sum_squares");
  const auto& av = t.value(a);
  T s = 0;
  for (T v : av.storage()) s += v * v;
  return t.push(BasicMatrix<T>(1, 1, s), {a}, [a](Tape<T>& tp, const BasicMatrix<T>& g) {
    BasicMatrix<T> ga = tp.value(a);
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] *= T(2) * g[0];
    tp.accumulate(a.id, ga);
  });
}

template <class T>
Var<T> bce_with_logits(Var<T> z, const std::vector<T>& targets) {
  Tape<T>& t = owner(z, "bce_with_logits");
  const auto& zv = t.value(z);
  check_column(zv, "bce_with_logits");
  check_targets(targets, zv.rows(), "bce_with_logits");
  const T n = static_cast<T>(zv.rows());
  T loss = 0;
  for (std::size_t i = 0; i < zv.rows(); ++i) loss += bce_scalar(zv[i], targets[i]);
  return t.push(BasicMatrix<T>(1, 1, loss / n), {z}, [z, targets, n](Tape<T>& tp, const BasicMatrix<T>& g) {
    const auto& zv2 = tp.value(z);
    BasicMatrix<T> gz(zv2.rows(), 1);
    for (std::size_t i = 0; i < zv2.rows(); ++i) gz[i] = g[0] * (sigmoid_scalar(zv2[i]) - targets[i]) / n;
    tp.accumulate(z.id, gz);
  });
}

template <class T>
Var<T> irm_dummy_penalty(Var<T> z, const std::vector<T>& targets) {
  Tape<T>& t = owner(z, "irm_dummy_penalty");
  const auto& zv = t.value(z);
  check_column(zv, "irm_dummy_penalty");
  check_targets(targets, zv.rows(), "irm_dummy_penalty");
  const T n = static_cast<T>(zv.rows());
  T gw = 0;
  for (std::size_t i = 0; i < zv.rows(); ++i) gw += (sigmoid_scalar(zv[i]) - targets[i]) * zv[i];
  gw /= n;
  return t.push(BasicMatrix<T>(1, 1, gw * gw), {z}, [z, targets, n, gw](Tape<T>& tp, const BasicMatrix<T>& g) {
    const auto& zv2 = tp.value(z);
    BasicMatrix<T> gz(zv2.rows(), 1);
    for (std::size_t i = 0; i < zv2.rows(); ++i) {
      const T s = sigmoid_scalar(zv2[i]);
      gz[i] = g[0] * T(2) * gw / n * ((s - targets[i]) + zv2[i] * s * (T(1) - s));
    }
    tp.accumulate(z.id, gz);
  });
}

template <class T>
Var<T> irm_linear_penalty(Var<T> ic, Var<T> z, const std::vector<T>& targets) {
  Tape<T>& t = same_tape(ic, z, "irm_linear_penalty");
  const auto& xv = t.value(ic);
  const auto& zv = t.value(z);
  check_column(zv, "irm_linear_penalty");
  check_targets(targets, zv.rows(), "irm_linear_penalty");
  if (xv.rows() != zv.rows()) throw ShapeError("irm_linear_penalty: features and logits misaligned");
  const std::size_t n = xv.rows();
  const std::size_t d = xv.cols();
  const T nn = static_cast<T>(n);
  // G = mean_i r_i [ic_i ; 1], with r_i = sigmoid(z_i) - y_i.
  std::vector<T> grad_head(d + 1, T(0));
  for (std::size_t i = 0; i < n; ++i) {
    const T r = sigmoid_scalar(zv[i]) - targets[i];
    for (std::size_t j = 0; j < d; ++j) grad_head[j] += r * xv(i, j);
    grad_head[d] += r;
  }
  T pen = 0;
  for (T& gj : grad_head) {
    gj /= nn;
    pen += gj * gj;
  }
  return t.push(BasicMatrix<T>(1, 1, pen), {ic, z},
                [ic, z, targets, grad_head, nn, d](Tape<T>& tp, const BasicMatrix<T>& g) {
    const auto& xv2 = tp.value(ic);
    const auto& zv2 = tp.value(z);
    const std::size_t rows = xv2.rows();
    if (tp.needs_grad(z.id)) {
      BasicMatrix<T> gz(rows, 1);
      for (std::size_t i = 0; i < rows; ++i) {
        T dot = grad_head[d];
        for (std::size_t j = 0; j < d; ++j) dot += grad_head[j] * xv2(i, j);
        const T s = sigmoid_scalar(zv2[i]);
        gz[i] = g[0] * T(2) / nn * dot * s * (T(1) - s);
      }
      tp.accumulate(z.id, gz);
    }
    if (tp.needs_grad(ic.id)) {
      BasicMatrix<T> gx(rows, d);
      for (std::size_t i = 0; i < rows; ++i) {
        const T r = sigmoid_scalar(zv2[i]) - targets[i];
        for (std::size_t j = 0; j < d; ++j) gx(i, j) = g[0] * T(2) / nn * grad_head[j] * r;
      }
      tp.accumulate(ic.id, gx);
    }
  });
}

template <class T>
Var<T> st_threshold(Var<T> a, T threshold) {
  Tape<T>& t = owner(a, "st_threshold");
  BasicMatrix<T> out = t.value(a);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = out[i] >= threshold ? T(1) : T(0);
  return t.push(std::move(out), {a}, [a](Tape<T>& tp, const BasicMatrix<T>& g) { tp.accumulate(a.id, g); });
}

template <class T>
BasicMatrix<T> topk_indicator(const BasicMatrix<T>& s, std::size_t k) {
  BasicMatrix<T> out(s.rows(), s.cols());
  std::vector<std::size_t> idx(s.cols());
  for (std::size_t r = 0; r < s.rows(); ++r) {
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    const T* row = s.row(r);
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                      [row](std::size_t i, std::size_t j) { return row[i] > row[j] || (row[i] == row[j] && i < j); });
    for (std::size_t q = 0; q < k; ++q) out(r, idx[q]) = T(1);
  }
  return out;
}

template <class T>
Var<T> st_topk_gate(Var<T> scores, const BasicMatrix<T>& noise, std::size_t k, T tau) {
  Tape<T>& t = owner(scores, "st_topk_gate");
  const auto& sv = t.value(scores);
  check_gate_args(sv, noise, k, tau);
  BasicMatrix<T> perturbed = sv;
  for (std::size_t i = 0; i < perturbed.size(); ++i) perturbed[i] += noise[i];
  auto hard = topk_indicator(perturbed, k);
  auto p = row_softmax(sv, noise, tau);
  return t.push(std::move(hard), {scores}, softmax_backward<T>(scores.id, std::move(p), k, tau));
}

template <class T>
Var<T> soft_topk_gate(Var<T> scores, const BasicMatrix<T>& noise, std::size_t k, T tau) {
  Tape<T>& t = owner(scores, "soft_topk_gate");
  const auto& sv = t.value(scores);
  check_gate_args(sv, noise, k, tau);
  auto p = row_softmax(sv, noise, tau);
  BasicMatrix<T> out = p;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= static_cast<T>(k);
  return t.push(std::move(out), {scores}, softmax_backward<T>(scores.id, std::move(p), k, tau));
}

#define INSTANTIATE(T)                                                                        \
  template class Tape<T>;                                                                     \
  template T sigmoid_scalar<T>(T);                                                            \
  template T bce_scalar<T>(T, T);                                                             \
  template Var<T> matmul<T>(Var<T>, Var<T>);                                                  \
  template Var<T> add_bias<T>(Var<T>, Var<T>);                                                \
  template Var<T> add<T>(Var<T>, Var<T>);                                                     \
  template Var<T> mul<T>(Var<T>, Var<T>);                                                     \
  template Var<T> mul_row<T>(Var<T>, Var<T>);                                                 \
  template Var<T> scale<T>(Var<T>, T);                                                        \
  template Var<T> add_scalar<T>(Var<T>, T);                                                   \
  template Var<T> one_minus<T>(Var<T>);                                                       \
  template Var<T> relu<T>(Var<T>);                                                            \
  template Var<T> sigmoid<T>(Var<T>);                                                         \
  template Var<T> concat_cols<T>(Var<T>, Var<T>);                                             \
  template Var<T> sum<T>(Var<T>);                                                             \
  template Var<T> sum_squares<T>(Var<T>);                                                     \
  template Var<T> bce_with_logits<T>(Var<T>, const std::vector<T>&);                          \
  template Var<T> irm_dummy_penalty<T>(Var<T>, const std::vector<T>&);                        \
  template Var<T> irm_linear_penalty<T>(Var<T>, Var<T>, const std::vector<T>&);               \
  template Var<T> st_threshold<T>(Var<T>, T);                                                 \
  template BasicMatrix<T> topk_indicator<T>(const BasicMatrix<T>&, std::size_t);              \
  template Var<T> st_topk_gate<T>(Var<T>, const BasicMatrix<T>&, std::size_t, T);             \
  template Var<T> soft_topk_gate<T>(Var<T>, const BasicMatrix<T>&, std::size_t, T);

INSTANTIATE(float)
INSTANTIATE(double)

#undef INSTANTIATE

}  // namespace causalbait::ad

#include "causalbait/optim.hpp"

#include <cmath>

#include "causalbait/errors.hpp"

namespace causalbait {

Adam::Adam(std::vector<ad::Param<float>*> params, AdamConfig cfg) : params_(std::move(params)), cfg_(cfg) {
  if (!(cfg_.lr > 0.0)) throw ConfigError("learning rate must be positive");
  for (auto* p : params_) {
    state_.m.emplace_back(p->value.rows(), p->value.cols());
    state_.v.emplace_back(p->value.rows(), p->value.cols());
  }
}

double grad_norm(const std::vector<ad::Param<float>*>& params) {
  double sq = 0.0;
  for (const auto* p : params)
    for (float g : p->grad.storage()) sq += static_cast<double>(g) * g;
  return std::sqrt(sq);
}

void clip_global_norm(const std::vector<ad::Param<float>*>& params, double max_norm) {
  if (max_norm <= 0.0) return;
  const double norm = grad_norm(params);
  if (!(norm > max_norm)) return;
  const auto s = static_cast<float>(max_norm / norm);
  for (auto* p : params)
    for (float& g : p->grad.storage()) g *= s;
}

void Adam::zero_grad() {
  for (auto* p : params_) p->zero_grad();
}

void Adam::step() {
  for (auto* p : params_) {
    if (!p->grad.same_shape(p->value)) throw ShapeError("gradient shape differs from parameter " + p->name);
    if (!p->grad.all_finite()) throw NumericError("non-finite gradient for parameter " + p->name);
  }
  float clip_scale = 1.0f;
  if (cfg_.clip_norm > 0.0) {
    const double norm = grad_norm(params_);
    if (norm > cfg_.clip_norm) clip_scale = static_cast<float>(cfg_.clip_norm / norm);
  }
  ++state_.step;
  const double t = static_cast<double>(state_.step);
  const float b1 = static_cast<float>(cfg_.beta1);
  const float b2 = static_cast<float>(cfg_.beta2);
  // Rounded from the double complement so the step-1 bias correction cancels.
  const float a1 = static_cast<float>(1.0 - cfg_.beta1);
  const float a2 = static_cast<float>(1.0 - cfg_.beta2);
  const float c1 = static_cast<float>(1.0 - std::pow(cfg_.beta1, t));
  const float c2 = static_cast<float>(1.0 - std::pow(cfg_.beta2, t));
  const float lr = static_cast<float>(cfg_.lr);
  const float eps = static_cast<float>(cfg_.eps);
  for (std::size_t k = 0; k < params_.size(); ++k) {
    auto& val = params_[k]->value;
    const auto& grad = params_[k]->grad;
    auto& m = state_.m[k];
    auto& v = state_.v[k];
    for (std::size_t i = 0; i < val.size(); ++i) {
      const float g = grad[i] * clip_scale;
      m[i] = b1 * m[i] + a1 * g;
      v[i] = b2 * v[i] + a2 * g * g;
      const float mhat = m[i] / c1;
      const float vhat = v[i] / c2;
      val[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
  }
}

}  // namespace causalbait

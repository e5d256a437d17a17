#include "causalbait/gradcheck.hpp"

#include <cmath>
#include <functional>
#include <json.hpp>
#include <memory>

#include "causalbait/autodiff.hpp"
#include "causalbait/causal_gate.hpp"
#include "causalbait/errors.hpp"
#include "causalbait/gumbel.hpp"
#include "causalbait/invariant_mask.hpp"
#include "causalbait/mlp.hpp"
#include "causalbait/rng.hpp"

namespace causalbait {

namespace {

using P = ad::Param<double>;
using V = ad::Var<double>;
using Tape = ad::Tape<double>;
using LossFn = std::function<V(Tape&)>;

struct Instance {
  std::vector<std::shared_ptr<P>> owned;
  std::vector<std::shared_ptr<BasicMlp<double>>> nets;
  std::vector<P*> params;  // differentiated
  LossFn loss;
  // When set, finite differences are taken of this function instead of loss.
  LossFn fd_loss;

  P& add(const std::string& name, MatrixD value) {
    owned.push_back(std::make_shared<P>(name, std::move(value)));
    params.push_back(owned.back().get());
    return *owned.back();
  }
  BasicMlp<double>& net(const std::vector<std::size_t>& sizes, Rng& rng, bool trainable) {
    auto n = std::make_shared<BasicMlp<double>>(zero_mlp<double>(sizes));
    for (auto* p : n->params())
      for (auto& v : p->value.storage()) v = rng.uniform(-1.0, 1.0);
    if (trainable)
      for (auto* p : n->params()) params.push_back(p);
    nets.push_back(n);
    return *n;
  }
};

MatrixD random(Rng& rng, std::size_t r, std::size_t c) {
  MatrixD m(r, c);
  for (auto& v : m.storage()) v = rng.uniform(-1.0, 1.0);
  return m;
}

std::vector<double> labels(Rng& rng, std::size_t n) {
  std::vector<double> y(n);
  for (auto& v : y) v = rng.bernoulli(0.5) ? 1.0 : 0.0;
  return y;
}

struct Kernel {
  std::string name;
  bool cosine = false;
  std::function<Instance(Rng&)> build;
};

std::vector<BasicScenarioBatch<double>> irm_batches(Rng& rng, std::size_t d) {
  std::vector<BasicScenarioBatch<double>> out;
  for (std::size_t n : {3u, 4u, 2u}) out.push_back({random(rng, n, d), labels(rng, n)});
  return out;
}

Instance irm_instance(Rng& rng, MaskRegularizer reg, IrmPenalty pen) {
  Instance in;
  const std::size_t d = 4;
  auto& raw = in.add("raw", random(rng, 1, d));
  auto& head = in.net({d, 1}, rng, true);
  auto batches = std::make_shared<std::vector<BasicScenarioBatch<double>>>(irm_batches(rng, d));
  in.loss = [&raw, &head, batches, reg, pen](Tape& t) {
    return irm_objective(t, raw, MaskMode::Float, reg, head, *batches, 1.5, 0.2, pen);
  };
  return in;
}

std::vector<Kernel> kernels() {
  std::vector<Kernel> ks;
  ks.push_back({"mlp", false, [](Rng& rng) {
                  Instance in;
                  auto& net = in.net({5, 6, 6, 1}, rng, true);
                  auto& x = in.add("x", random(rng, 3, 5));
                  auto y = labels(rng, 3);
                  in.loss = [&net, &x, y](Tape& t) { return ad::bce_with_logits(mlp_forward(t, net, t.param(x)), y); };
                  return in;
                }});
  ks.push_back({"bce", false, [](Rng& rng) {
                  Instance in;
                  auto& z = in.add("z", random(rng, 6, 1));
                  for (auto& v : z.value.storage()) v *= 4.0;
                  auto y = labels(rng, 6);
                  in.loss = [&z, y](Tape& t) { return ad::bce_with_logits(t.param(z), y); };
                  return in;
                }});
  ks.push_back({"irm_dummy_penalty", false, [](Rng& rng) {
                  Instance in;
                  auto& z = in.add("z", random(rng, 6, 1));
                  auto y = labels(rng, 6);
                  in.loss = [&z, y](Tape& t) { return ad::irm_dummy_penalty(t.param(z), y); };
                  return in;
                }});
  ks.push_back({"irm_linear_penalty", false, [](Rng& rng) {
                  Instance in;
                  auto& ic = in.add("ic", random(rng, 6, 4));
                  auto& z = in.add("z", random(rng, 6, 1));
                  auto y = labels(rng, 6);
                  in.loss = [&ic, &z, y](Tape& t) { return ad::irm_linear_penalty(t.param(ic), t.param(z), y); };
                  return in;
                }});
  ks.push_back({"elementwise", false, [](Rng& rng) {
                  Instance in;
                  auto& a = in.add("a", random(rng, 3, 4));
                  auto& b = in.add("b", random(rng, 3, 4));
                  auto& r = in.add("r", random(rng, 1, 4));
                  auto& w = in.add("w", random(rng, 4, 2));
                  auto& c = in.add("c", random(rng, 1, 2));
                  in.loss = [&](Tape& t) {
                    auto av = t.param(a);
                    auto left = ad::add(ad::mul(ad::sigmoid(av), ad::one_minus(t.param(b))),
                                        ad::scale(ad::add_scalar(ad::mul_row(av, t.param(r)), 0.3), 1.7));
                    auto right = ad::add_bias(ad::matmul(av, t.param(w)), t.param(c));
                    return ad::add(ad::sum_squares(ad::concat_cols(left, right)), ad::sum(right));
                  };
                  return in;
                }});
  ks.push_back({"irm_objective_l2", false,
                [](Rng& rng) { return irm_instance(rng, MaskRegularizer::L2, IrmPenalty::Dummy); }});
  ks.push_back({"irm_objective_l0", false,
                [](Rng& rng) { return irm_instance(rng, MaskRegularizer::L0, IrmPenalty::Dummy); }});
  ks.push_back({"irm_objective_full_linear", false,
                [](Rng& rng) { return irm_instance(rng, MaskRegularizer::L2, IrmPenalty::FullLinear); }});
  ks.push_back({"contrastive", false, [](Rng& rng) {
                  Instance in;
                  auto& clf = in.net({8, 5, 1}, rng, false);
                  auto& ic = in.add("ic", random(rng, 4, 4));
                  auto& nf = in.add("nf", random(rng, 4, 4));
                  in.loss = [&](Tape& t) { return contrastive_objective(t, clf, t.param(ic), t.param(nf)); };
                  return in;
                }});
  ks.push_back({"soft_topk_gate", false, [](Rng& rng) {
                  Instance in;
                  auto& s = in.add("scores", random(rng, 3, 6));
                  const MatrixD noise = random(rng, 3, 6);
                  const MatrixD target = random(rng, 3, 6);
                  in.loss = [&s, noise, target](Tape& t) {
                    return ad::sum_squares(ad::mul(ad::soft_topk_gate(t.param(s), noise, 3, 0.7), t.constant(target)));
                  };
                  return in;
                }});
  // The straight-through estimator is the exact gradient of the soft
  // relaxation shifted so that its value at the current parameters equals
  // the hard gate. Differences are taken of that anchored function.
  ks.push_back({"gate_straight_through", true, [](Rng& rng) {
                  Instance in;
                  const std::size_t d = 6, n = 4, k = 3;
                  const double tau = 0.5;
                  auto& xi = in.net({d, 5, d}, rng, true);
                  auto& clf = in.net({2 * d, 7, 1}, rng, false);
                  const MatrixD vc = random(rng, n, d);
                  const MatrixD ic = random(rng, n, d);
                  const MatrixD noise = gumbel_noise(n, d, rng.engine()()).cast<double>();
                  MatrixD scores = mlp_forward(xi, vc);
                  for (std::size_t i = 0; i < scores.size(); ++i) scores[i] += noise[i];
                  MatrixD anchor = ad::topk_indicator(scores, k);
                  {
                    Tape t;
                    const MatrixD soft0 = t.value(ad::soft_topk_gate(t.constant(mlp_forward(xi, vc)), noise, k, tau));
                    for (std::size_t i = 0; i < anchor.size(); ++i) anchor[i] -= soft0[i];
                  }
                  auto tail = [&clf, vc, ic](Tape& t, V gamma) {
                    auto vcv = t.constant(vc);
                    auto nf = ad::mul(ad::one_minus(gamma), vcv);
                    return contrastive_objective(t, clf, t.constant(ic), nf);
                  };
                  in.loss = [&xi, vc, noise, tail, k, tau](Tape& t) {
                    return tail(t, gate_forward(t, xi, t.constant(vc), noise, k, tau));
                  };
                  in.fd_loss = [&xi, vc, noise, anchor, tail, k, tau](Tape& t) {
                    auto soft = ad::soft_topk_gate(mlp_forward(t, xi, t.constant(vc)), noise, k, tau);
                    return tail(t, ad::add(soft, t.constant(anchor)));
                  };
                  return in;
                }});
  return ks;
}

double evaluate(const LossFn& f) {
  Tape t;
  return t.scalar(f(t));
}

}  // namespace

std::vector<KernelReport> run_gradcheck(const GradCheckConfig& cfg) {
  std::vector<KernelReport> reports;
  const auto ks = kernels();
  for (std::size_t ki = 0; ki < ks.size(); ++ki) {
    const auto& k = ks[ki];
    KernelReport rep;
    rep.kernel = k.name;
    rep.metric = k.cosine ? "cosine" : "rel_err";
    rep.worst = k.cosine ? 1.0 : 0.0;
    std::size_t attempt = 0;
    while (rep.instances < cfg.instances) {
      if (attempt > 50 * cfg.instances + 100) throw NumericError("gradient check for " + k.name + " kept hitting kinks");
      Rng rng = Rng::derive(cfg.seed, Stream::GradCheck, {ki, attempt++});
      Instance in = k.build(rng);

      for (auto* p : in.params) p->zero_grad();
      {
        Tape t;
        auto loss = in.loss(t);
        if (t.relu_margin() < cfg.kink_margin) {
          ++rep.redrawn;
          continue;
        }
        t.backward(loss);
      }
      const LossFn& fd = in.fd_loss ? in.fd_loss : in.loss;
      {
        Tape t;
        fd(t);
        if (t.relu_margin() < cfg.kink_margin) {
          ++rep.redrawn;
          continue;
        }
      }
      double diff2 = 0.0, a2 = 0.0, n2 = 0.0, dot = 0.0;
      for (auto* p : in.params) {
        for (std::size_t i = 0; i < p->value.size(); ++i) {
          const double orig = p->value[i];
          p->value[i] = orig + cfg.h;
          const double up = evaluate(fd);
          p->value[i] = orig - cfg.h;
          const double down = evaluate(fd);
          p->value[i] = orig;
          const double num = (up - down) / (2.0 * cfg.h);
          const double ana = p->grad[i];
          diff2 += (ana - num) * (ana - num);
          a2 += ana * ana;
          n2 += num * num;
          dot += ana * num;
        }
      }
      if (std::sqrt(a2) < cfg.flat_floor && std::sqrt(n2) < cfg.flat_floor) {
        ++rep.redrawn;
        continue;
      }
      if (k.cosine) {
        const double cos = (a2 > 0.0 && n2 > 0.0) ? dot / std::sqrt(a2 * n2) : (a2 == n2 ? 1.0 : 0.0);
        rep.worst = std::min(rep.worst, cos);
      } else {
        const double scale = std::max({std::sqrt(a2), std::sqrt(n2), 1e-8});
        rep.worst = std::max(rep.worst, std::sqrt(diff2) / scale);
      }
      ++rep.instances;
    }
    rep.passed = k.cosine ? rep.worst > cfg.cosine_threshold : rep.worst < cfg.tolerance;
    reports.push_back(rep);
  }
  return reports;
}

std::string gradcheck_report_json(const std::vector<KernelReport>& reports) {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const auto& r : reports)
    j.push_back({{"kernel", r.kernel},
                 {"metric", r.metric},
                 {"instances", r.instances},
                 {"redrawn", r.redrawn},
                 {"worst", r.worst},
                 {"passed", r.passed}});
  return j.dump(2);
}

}  // namespace causalbait

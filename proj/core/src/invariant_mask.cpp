#include "causalbait/invariant_mask.hpp"

#include <cmath>
#include <limits>

#include "causalbait/errors.hpp"
#include "causalbait/optim.hpp"
#include "causalbait/rng.hpp"

namespace causalbait {

const char* to_string(MaskMode m) { return m == MaskMode::Float ? "float" : "binary"; }
const char* to_string(MaskRegularizer r) { return r == MaskRegularizer::L0 ? "l0" : "l2"; }
const char* to_string(IrmPenalty p) { return p == IrmPenalty::Dummy ? "dummy" : "full_linear"; }

MaskMode parse_mask_mode(const std::string& s) {
  if (s == "float") return MaskMode::Float;
  if (s == "binary") return MaskMode::Binary;
  throw ConfigError("mask mode must be 'float' or 'binary', got '" + s + "'");
}

MaskRegularizer parse_mask_regularizer(const std::string& s) {
  if (s == "l0") return MaskRegularizer::L0;
  if (s == "l2") return MaskRegularizer::L2;
  throw ConfigError("mask regularizer must be 'l0' or 'l2', got '" + s + "'");
}

IrmPenalty parse_irm_penalty(const std::string& s) {
  if (s == "dummy") return IrmPenalty::Dummy;
  if (s == "full_linear") return IrmPenalty::FullLinear;
  throw ConfigError("irm penalty must be 'dummy' or 'full_linear', got '" + s + "'");
}

InvarianceMask InvarianceMask::uniform(std::size_t d, MaskMode mode, MaskRegularizer reg, float raw_value) {
  return InvarianceMask{std::vector<float>(d, raw_value), mode, reg};
}

std::vector<float> InvarianceMask::effective() const {
  std::vector<float> m(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const float s = ad::sigmoid_scalar(raw[i]);
    m[i] = mode == MaskMode::Float ? s : (s >= 0.5f ? 1.0f : 0.0f);
  }
  return m;
}

MaskSplit apply_mask(const InvarianceMask& m, const std::vector<float>& x) {
  if (m.size() != x.size())
    throw ShapeError("mask has " + std::to_string(m.size()) + " dims, vector has " + std::to_string(x.size()));
  const auto eff = m.effective();
  MaskSplit out{std::vector<float>(x.size()), std::vector<float>(x.size())};
  for (std::size_t i = 0; i < x.size(); ++i) {
    out.ic[i] = eff[i] * x[i];
    out.vc[i] = x[i] - out.ic[i];
  }
  return out;
}

void apply_mask(const std::vector<float>& m, const Matrix& x, Matrix& ic, Matrix& vc) {
  if (m.size() != x.cols())
    throw ShapeError("mask has " + std::to_string(m.size()) + " dims, data has " + std::to_string(x.cols()));
  ic = Matrix(x.rows(), x.cols());
  vc = Matrix(x.rows(), x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t c = 0; c < x.cols(); ++c) {
      ic(r, c) = m[c] * x(r, c);
      vc(r, c) = x(r, c) - ic(r, c);
    }
}

template <class T>
ad::Var<T> irm_objective(ad::Tape<T>& tape, ad::Param<T>& raw, MaskMode mode, MaskRegularizer reg,
                         BasicMlp<T>& head, const std::vector<BasicScenarioBatch<T>>& batches, double alpha,
                         double beta, IrmPenalty penalty, IrmTerms* terms) {
  if (batches.empty()) throw ScenarioError("IRM objective needs at least one scenario");
  if (alpha < 0.0 || beta < 0.0) throw ConfigError("alpha and beta must be non-negative");
  if (head.output_size() != 1 || head.input_size() != raw.value.cols())
    throw ShapeError("IRM head must map the masked input to one logit");
  if (penalty == IrmPenalty::FullLinear && head.num_layers() != 1)
    throw ConfigError("full-gradient IRM penalty is only available for a linear head");

  auto raw_v = tape.param(raw);
  auto m = ad::sigmoid(raw_v);
  if (mode == MaskMode::Binary) m = ad::st_threshold(m, T(0.5));

  ad::Var<T> total{};
  double risk = 0.0;
  double pen = 0.0;
  for (std::size_t s = 0; s < batches.size(); ++s) {
    const auto& b = batches[s];
    if (b.x.rows() == 0) throw ScenarioError("scenario " + std::to_string(s) + " has no samples");
    auto ic = ad::mul_row(tape.constant(b.x), m);
    auto z = mlp_forward(tape, head, ic);
    auto ls = ad::bce_with_logits(z, b.y);
    auto ps = penalty == IrmPenalty::Dummy ? ad::irm_dummy_penalty(z, b.y) : ad::irm_linear_penalty(ic, z, b.y);
    risk += tape.scalar(ls);
    pen += tape.scalar(ps);
    auto term = ad::add(ls, ad::scale(ps, static_cast<T>(alpha)));
    total = s == 0 ? term : ad::add(total, term);
  }
  const double inv_s = 1.0 / static_cast<double>(batches.size());
  total = ad::scale(total, static_cast<T>(inv_s));

  ad::Var<T> r;
  if (reg == MaskRegularizer::L2) {
    r = ad::sum_squares(m);
  } else {
    const double shift = -kHardConcreteBeta * std::log(-kHardConcreteGamma / kHardConcreteZeta);
    r = ad::sum(ad::sigmoid(ad::add_scalar(raw_v, static_cast<T>(shift))));
  }
  if (terms != nullptr) {
    terms->risk = risk * inv_s;
    terms->penalty = pen * inv_s;
    terms->regularizer = static_cast<double>(tape.scalar(r));
  }
  total = ad::add(total, ad::scale(r, static_cast<T>(beta)));
  if (terms != nullptr) terms->total = static_cast<double>(tape.scalar(total));
  return total;
}

double irm_loss(const InvarianceMask& m, const MlpParams& head, const std::vector<ScenarioBatch>& subsets,
                const IrmConfig& cfg, IrmTerms* terms) {
  ad::Param<float> raw("mask", Matrix::row_vector(m.raw));
  MlpParams h = head;
  ad::Tape<float> tape;
  auto loss = irm_objective(tape, raw, m.mode, m.regularizer, h, subsets, cfg.alpha, cfg.beta, cfg.penalty, terms);
  return static_cast<double>(tape.scalar(loss));
}

std::vector<ScenarioBatch> scenario_batches(const Matrix& x, const std::vector<float>& y,
                                            const std::vector<int>& assignment, std::size_t num_scenarios) {
  if (assignment.size() != x.rows() || y.size() != x.rows()) throw ShapeError("scenario assignment misaligned with data");
  std::vector<std::vector<std::size_t>> members(num_scenarios);
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    const int s = assignment[i];
    if (s < 0 || static_cast<std::size_t>(s) >= num_scenarios)
      throw ScenarioError("sample " + std::to_string(i) + " has scenario " + std::to_string(s));
    members[static_cast<std::size_t>(s)].push_back(i);
  }
  std::vector<ScenarioBatch> out(num_scenarios);
  for (std::size_t s = 0; s < num_scenarios; ++s) {
    out[s].x = gather_rows(x, members[s]);
    for (std::size_t i : members[s]) out[s].y.push_back(y[i]);
  }
  return out;
}

MlpParams init_irm_head(std::size_t d, std::uint64_t seed) {
  return init_mlp<float>({d, 1}, Rng::derive(seed, Stream::MaskInit).engine()());
}

namespace {

double validation_objective(const MaskTrainInput& in, const IrmConfig& cfg, const InvarianceMask& mask,
                            const MlpParams& head) {
  std::vector<ScenarioBatch> batches;
  if (in.val_x != nullptr && in.val_x->rows() > 0) {
    for (auto& b : scenario_batches(*in.val_x, *in.val_y, *in.val_assignment, in.num_scenarios))
      if (b.x.rows() > 0) batches.push_back(std::move(b));
  } else {
    batches = scenario_batches(*in.x, *in.y, *in.assignment, in.num_scenarios);
  }
  return irm_loss(mask, head, batches, cfg);
}

MaskTrainResult train_mask_single(const MaskTrainInput& in, const IrmConfig& cfg, double mask_lr,
                                  const InvarianceMask& init_mask, const MlpParams& init_head, std::uint64_t seed) {
  const std::size_t S = in.num_scenarios;
  std::vector<std::vector<std::size_t>> members(S);
  for (std::size_t i = 0; i < in.assignment->size(); ++i) {
    const int s = (*in.assignment)[i];
    if (s < 0 || static_cast<std::size_t>(s) >= S) throw ScenarioError("sample " + std::to_string(i) + " has no valid scenario");
    members[static_cast<std::size_t>(s)].push_back(i);
  }
  for (std::size_t s = 0; s < S; ++s)
    if (members[s].empty()) throw ScenarioError("scenario " + std::to_string(s) + " has zero samples");
  if (cfg.batch_size == 0) throw ConfigError("IRM batch size must be positive");

  ad::Param<float> raw("mask", Matrix::row_vector(init_mask.raw));
  MlpParams head = init_head;
  AdamConfig mcfg;
  mcfg.lr = mask_lr;
  mcfg.clip_norm = 0.0;
  AdamConfig hcfg = mcfg;
  hcfg.lr = cfg.head_lr;
  Adam mask_opt({&raw}, mcfg);
  Adam head_opt(head.params(), hcfg);
  std::vector<ad::Param<float>*> all = {&raw};
  for (auto* p : head.params()) all.push_back(p);

  MaskTrainResult best;
  best.mask = init_mask;
  best.head = init_head;
  best.mask_lr = mask_lr;
  best.best_val_loss = validation_objective(in, cfg, init_mask, init_head);
  best.val_history.push_back(best.best_val_loss);

  InvarianceMask current = init_mask;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::vector<std::vector<std::size_t>> order(S);
    std::size_t steps = 0;
    for (std::size_t s = 0; s < S; ++s) {
      order[s] = members[s];
      Rng::derive(seed, Stream::MaskBatches, {epoch, s}).shuffle(order[s].begin(), order[s].end());
      steps = std::max(steps, (order[s].size() + cfg.batch_size - 1) / cfg.batch_size);
    }
    for (std::size_t step = 0; step < steps; ++step) {
      std::vector<ScenarioBatch> batches(S);
      for (std::size_t s = 0; s < S; ++s) {
        const std::size_t chunks = (order[s].size() + cfg.batch_size - 1) / cfg.batch_size;
        const std::size_t c = step % chunks;
        const std::size_t lo = c * cfg.batch_size;
        const std::size_t hi = std::min(order[s].size(), lo + cfg.batch_size);
        std::vector<std::size_t> idx(order[s].begin() + static_cast<std::ptrdiff_t>(lo),
                                     order[s].begin() + static_cast<std::ptrdiff_t>(hi));
        batches[s].x = gather_rows(*in.x, idx);
        for (std::size_t i : idx) batches[s].y.push_back((*in.y)[i]);
      }
      raw.zero_grad();
      head.zero_grad();
      ad::Tape<float> tape;
      auto loss = irm_objective(tape, raw, current.mode, current.regularizer, head, batches, cfg.alpha, cfg.beta,
                                cfg.penalty);
      if (!std::isfinite(tape.scalar(loss))) throw NumericError("IRM objective became non-finite");
      tape.backward(loss);
      clip_global_norm(all, 5.0);
      mask_opt.step();
      head_opt.step();
    }
    current.raw = raw.value.storage();
    const double v = validation_objective(in, cfg, current, head);
    best.val_history.push_back(v);
    if (v < best.best_val_loss) {
      best.best_val_loss = v;
      best.best_epoch = epoch + 1;
      best.mask = current;
      best.head = head;
    }
  }
  return best;
}

}  // namespace

MaskTrainResult train_mask(const MaskTrainInput& in, const IrmConfig& cfg, const InvarianceMask& init_mask,
                           const MlpParams& init_head, std::uint64_t seed) {
  if (in.x == nullptr || in.y == nullptr || in.assignment == nullptr) throw ConfigError("train_mask needs data");
  if (init_mask.size() != in.x->cols()) throw ShapeError("mask length differs from feature dimension");
  if (cfg.mask_lr_grid.empty()) return train_mask_single(in, cfg, cfg.mask_lr, init_mask, init_head, seed);
  MaskTrainResult best;
  best.best_val_loss = std::numeric_limits<double>::infinity();
  for (double lr : cfg.mask_lr_grid) {
    auto r = train_mask_single(in, cfg, lr, init_mask, init_head, seed);
    if (r.best_val_loss < best.best_val_loss) best = std::move(r);
  }
  return best;
}

MaskTrainResult train_mask(const Dataset& train, const Dataset* val, std::size_t num_scenarios, const IrmConfig& cfg,
                           MaskMode mode, MaskRegularizer reg, std::uint64_t seed) {
  auto scen = [](const Dataset& ds) {
    std::vector<int> a;
    for (const auto& r : ds.records) {
      if (!r.scenario) throw ScenarioError("record " + r.id + " has no scenario id");
      a.push_back(*r.scenario);
    }
    return a;
  };
  const Matrix x = train.features();
  const auto y = train.labels();
  const auto a = scen(train);
  MaskTrainInput in{&x, &y, &a, nullptr, nullptr, nullptr, num_scenarios};
  Matrix vx;
  std::vector<float> vy;
  std::vector<int> va;
  if (val != nullptr && !val->empty()) {
    vx = val->features();
    vy = val->labels();
    va = scen(*val);
    in.val_x = &vx;
    in.val_y = &vy;
    in.val_assignment = &va;
  }
  return train_mask(in, cfg, InvarianceMask::uniform(train.d, mode, reg, cfg.raw_init), init_irm_head(train.d, seed),
                    seed);
}

template ad::Var<float> irm_objective<float>(ad::Tape<float>&, ad::Param<float>&, MaskMode, MaskRegularizer,
                                             BasicMlp<float>&, const std::vector<BasicScenarioBatch<float>>&, double,
                                             double, IrmPenalty, IrmTerms*);
template ad::Var<double> irm_objective<double>(ad::Tape<double>&, ad::Param<double>&, MaskMode, MaskRegularizer,
                                               BasicMlp<double>&, const std::vector<BasicScenarioBatch<double>>&,
                                               double, double, IrmPenalty, IrmTerms*);

}  // namespace causalbait

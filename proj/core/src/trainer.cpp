#include "causalbait/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "causalbait/errors.hpp"
#include "causalbait/eval.hpp"
#include "causalbait/gumbel.hpp"
#include "causalbait/optim.hpp"
#include "causalbait/rng.hpp"
#include "format.hpp"

namespace causalbait {

namespace {

std::uint64_t sub_seed(std::uint64_t seed, Stream stream, std::initializer_list<std::uint64_t> path = {}) {
  return Rng::derive(seed, stream, path).engine()();
}

void validate_config(const TrainConfig& cfg) {
  if (cfg.rounds == 0) throw ConfigError("rounds must be at least 1");
  if (cfg.classifier.layers < 1 || cfg.classifier.hidden == 0) throw ConfigError("classifier architecture is empty");
  if (cfg.classifier.epochs == 0 || cfg.classifier.batch_size == 0)
    throw ConfigError("classifier epochs and batch size must be positive");
  if (!(cfg.classifier.lr > 0.0)) throw ConfigError("classifier learning rate must be positive");
  if (cfg.em.num_scenarios == 0) throw ConfigError("number of scenarios must be at least 1");
  if (cfg.gate.batch_size == 0) throw ConfigError("gate batch size must be positive");
  if (!(cfg.gate.temperature > 0.0)) throw GateError("gate temperature must be positive");
  if (cfg.irm.alpha < 0.0 || cfg.irm.beta < 0.0) throw ConfigError("IRM weights must be non-negative");
}

Matrix apply_keep(const Matrix& x, const std::vector<float>& keep) {
  Matrix out = x;
  for (std::size_t i = 0; i < out.rows(); ++i)
    for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) *= keep[j];
  return out;
}

std::vector<std::vector<std::size_t>> batches_of(std::size_t n, std::size_t batch, Rng rng) {
  auto order = rng.permutation(n);
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t lo = 0; lo < n; lo += batch)
    out.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(lo),
                     order.begin() + static_cast<std::ptrdiff_t>(std::min(n, lo + batch)));
  return out;
}

std::vector<float> gather(const std::vector<float>& v, const std::vector<std::size_t>& idx) {
  std::vector<float> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(v[i]);
  return out;
}

double f1_of(const MlpParams& net, const Matrix& x, const std::vector<float>& y) {
  const Matrix z = mlp_forward(net, x);
  std::vector<float> scores(z.rows());
  for (std::size_t i = 0; i < z.rows(); ++i) scores[i] = ad::sigmoid_scalar(z(i, 0));
  return metrics_from_scores(scores, y, 0.5).f1;
}

// One epoch of the gate stage. Each batch first updates the round classifier
// on [ic ; gamma * vc] with the true labels, then updates the gate so that
// [ic ; (1 - gamma) * vc] is pushed towards the negative class.
double gate_epoch(GateNet& gate, MlpParams& clf, Adam& gate_opt, Adam& clf_opt, const Matrix& ic, const Matrix& vc,
                  const std::vector<float>& y, const TrainConfig& cfg, std::size_t round, std::size_t epoch) {
  const std::size_t k = gate.retained();
  const auto tau = static_cast<float>(gate.temperature);
  double total = 0.0;
  std::size_t count = 0;
  const auto batches = batches_of(ic.rows(), cfg.gate.batch_size, Rng::derive(cfg.seed, Stream::GateBatches, {round, epoch}));
  for (std::size_t b = 0; b < batches.size(); ++b) {
    const auto& idx = batches[b];
    const Matrix ic_b = gather_rows(ic, idx);
    const Matrix vc_b = gather_rows(vc, idx);
    const auto y_b = gather(y, idx);

    {
      const auto split = gate_split(gate, vc_b, sub_seed(cfg.seed, Stream::GateNoise, {round, epoch, b, 0}), true);
      clf_opt.zero_grad();
      ad::Tape<float> tape;
      auto z = mlp_forward(tape, clf, tape.constant(hconcat(ic_b, split.sc)));
      auto loss = ad::bce_with_logits(z, y_b);
      if (!std::isfinite(tape.scalar(loss))) throw NumericError("classifier loss became non-finite in the gate stage");
      tape.backward(loss);
      clf_opt.step();
    }
    {
      const Matrix noise = gumbel_noise(vc_b.rows(), vc_b.cols(), sub_seed(cfg.seed, Stream::GateNoise, {round, epoch, b, 1}));
      gate_opt.zero_grad();
      ad::Tape<float> tape;
      auto vcv = tape.constant(vc_b);
      auto gamma = gate_forward(tape, gate.params, vcv, noise, k, tau);
      auto nf = ad::mul(ad::one_minus(gamma), vcv);
      auto loss = contrastive_objective(tape, clf, tape.constant(ic_b), nf);
      const double v = tape.scalar(loss);
      if (!std::isfinite(v)) throw NumericError("contrastive loss became non-finite");
      tape.backward(loss);
      gate_opt.step();
      total += v * static_cast<double>(idx.size());
      count += idx.size();
    }
  }
  return count > 0 ? total / static_cast<double>(count) : 0.0;
}

}  // namespace

std::vector<std::size_t> classifier_sizes(std::size_t input, const ClassifierConfig& cfg) {
  std::vector<std::size_t> sizes{input};
  for (std::size_t l = 1; l < cfg.layers; ++l) sizes.push_back(cfg.hidden);
  sizes.push_back(1);
  return sizes;
}

std::vector<float> feature_keep_mask(const FeatureManifest& manifest, std::size_t d,
                                     const std::vector<std::string>& families) {
  if (families.empty()) return std::vector<float>(d, 1.0f);
  std::vector<float> keep(d, 0.0f);
  for (const auto& name : families) {
    const auto* span = manifest.find(name);
    if (span == nullptr) throw ConfigError("unknown feature family '" + name + "'");
    if (span->start + span->length > d) throw ShapeError("feature family '" + name + "' exceeds the data dimension");
    std::fill(keep.begin() + static_cast<std::ptrdiff_t>(span->start),
              keep.begin() + static_cast<std::ptrdiff_t>(span->start + span->length), 1.0f);
  }
  return keep;
}

ClassifierFit fit_classifier(const Matrix& x, const std::vector<float>& y, const Matrix* val_x,
                             const std::vector<float>* val_y, const ClassifierConfig& cfg, std::uint64_t seed) {
  if (x.rows() != y.size()) throw ShapeError("classifier inputs and labels misaligned");
  if (x.rows() == 0) throw DataError("classifier training set is empty");
  const bool has_val = val_x != nullptr && val_y != nullptr && val_x->rows() > 0;

  ClassifierFit fit;
  MlpParams net = init_mlp<float>(classifier_sizes(x.cols(), cfg), sub_seed(seed, Stream::ClassifierInit));
  AdamConfig acfg;
  acfg.lr = cfg.lr;
  Adam opt(net.params(), acfg);
  fit.params = net;
  fit.best_val_f1 = -1.0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (const auto& idx : batches_of(x.rows(), cfg.batch_size, Rng::derive(seed, Stream::ClassifierBatches, {epoch}))) {
      opt.zero_grad();
      ad::Tape<float> tape;
      auto z = mlp_forward(tape, net, tape.constant(gather_rows(x, idx)));
      auto loss = ad::bce_with_logits(z, gather(y, idx));
      if (!std::isfinite(tape.scalar(loss))) throw NumericError("classifier loss became non-finite");
      tape.backward(loss);
      opt.step();
    }
    if (has_val) {
      const double f1 = f1_of(net, *val_x, *val_y);
      fit.val_f1.push_back(f1);
      if (f1 > fit.best_val_f1) {
        fit.best_val_f1 = f1;
        fit.best_epoch = epoch + 1;
        fit.params = net;
      }
    }
  }
  if (!has_val) {
    fit.params = net;
    fit.best_epoch = cfg.epochs;
    fit.best_val_f1 = 0.0;
  }
  return fit;
}

TrainResult train(const Dataset& train_set, const Dataset& val_set, const TrainConfig& cfg, const TrainLog& log) {
  validate_config(cfg);
  train_set.validate();
  if (train_set.empty()) throw DataError("training set is empty");
  if (val_set.empty()) throw ConfigError("validation set is empty");
  if (val_set.d != train_set.d) throw ShapeError("validation dimension differs from training");
  auto say = [&](const std::string& s) {
    if (log) log(s);
  };

  const std::size_t d = train_set.d;
  const std::size_t S = cfg.em.num_scenarios;
  const auto keep = feature_keep_mask(train_set.manifest, d, cfg.ablations.feature_subset);
  const Matrix x = apply_keep(train_set.features(), keep);
  const auto y = train_set.labels();
  const Matrix vx = apply_keep(val_set.features(), keep);
  const auto vy = val_set.labels();

  EmConfig em = cfg.em;
  em.seed = cfg.seed;
  IrmConfig irm = cfg.irm;
  if (cfg.ablations.no_eicf) irm.alpha = 0.0;

  TrainResult result;
  ModelBundle& bundle = result.bundle;
  bundle.config = cfg;
  bundle.config.em.seed = cfg.seed;
  bundle.manifest = train_set.manifest;
  bundle.gate_enabled = !cfg.ablations.no_escf;
  bundle.mask = InvarianceMask::uniform(d, cfg.mask_mode, cfg.mask_regularizer, cfg.irm.raw_init);
  bundle.gate = init_gate(d, cfg.gate, cfg.seed);
  for (const auto& r : train_set.records) bundle.scenario_ids.push_back(r.id);
  MlpParams head = init_irm_head(d, cfg.seed);

  // The round classifier the gate is contrasted against persists across rounds.
  MlpParams round_clf = init_mlp<float>(classifier_sizes(2 * d, cfg.classifier), sub_seed(cfg.seed, Stream::ClassifierInit, {1}));
  AdamConfig clf_acfg;
  clf_acfg.lr = cfg.classifier.lr;
  Adam clf_opt(round_clf.params(), clf_acfg);
  AdamConfig gate_acfg;
  gate_acfg.lr = cfg.gate.lr;
  Adam gate_opt(bundle.gate.params.params(), gate_acfg);

  ScenarioState& state = bundle.scenario;
  state = init_scenario_state(train_set.size(), d, em);

  double best_val = std::numeric_limits<double>::infinity();
  std::size_t stall = 0;
  Matrix ic, vc, vic, vvc;
  for (std::size_t t = 0; t < cfg.rounds; ++t) {
    RoundSummary summary;
    apply_mask(bundle.mask.effective(), x, ic, vc);

    if (!cfg.ablations.no_enf) {
      const std::size_t before = state.moved_rate_history.size();
      try {
        run_em(state, vc, y, em);
      } catch (...) {
        rethrow_with_stage("scenario inference, round " + std::to_string(t + 1));
      }
      summary.em_rounds = state.moved_rate_history.size() - before;
      summary.final_moved_rate = state.moved_rate_history.empty() ? 0.0 : state.moved_rate_history.back();
    }

    std::vector<int> val_assignment;
    if (cfg.ablations.no_enf) {
      Rng rng = Rng::derive(cfg.seed, Stream::ValAssignment);
      for (std::size_t i = 0; i < vx.rows(); ++i) val_assignment.push_back(static_cast<int>(rng.below(S)));
    } else {
      apply_mask(bundle.mask.effective(), vx, vic, vvc);
      val_assignment = assign_by_membership(state, vvc, vy);
    }
    MaskTrainInput in{&x, &y, &state.assignment, &vx, &vy, &val_assignment, S};

    MaskTrainResult mr;
    try {
      mr = train_mask(in, irm, bundle.mask, head, sub_seed(cfg.seed, Stream::MaskBatches, {t}));
    } catch (...) {
      rethrow_with_stage("invariance mask, round " + std::to_string(t + 1));
    }
    bundle.mask = mr.mask;
    head = mr.head;
    summary.val_irm = mr.best_val_loss;
    summary.mask_best_epoch = mr.best_epoch;
    summary.mask_lr = mr.mask_lr;

    if (bundle.gate_enabled) {
      apply_mask(bundle.mask.effective(), x, ic, vc);
      try {
        for (std::size_t e = 0; e < cfg.gate.epochs; ++e)
          summary.contrastive = gate_epoch(bundle.gate, round_clf, gate_opt, clf_opt, ic, vc, y, cfg, t, e);
      } catch (...) {
        rethrow_with_stage("causal gate, round " + std::to_string(t + 1));
      }
    }

    say("round " + std::to_string(t + 1) + ": em_rounds=" + std::to_string(summary.em_rounds) +
        " moved_rate=" + detail::shortest(summary.final_moved_rate) + " val_irm=" + detail::shortest(summary.val_irm) +
        " contrastive=" + detail::shortest(summary.contrastive));
    result.report.rounds.push_back(summary);

    if (cfg.early_stop_patience > 0) {
      if (best_val - summary.val_irm > cfg.early_stop_tol) {
        best_val = summary.val_irm;
        stall = 0;
      } else if (++stall >= cfg.early_stop_patience) {
        say("early stop after round " + std::to_string(t + 1));
        break;
      }
    }
  }

  const Matrix feats = classifier_inputs(bundle, train_set.features());
  const Matrix vfeats = classifier_inputs(bundle, val_set.features());
  ClassifierFit fit;
  try {
    fit = fit_classifier(feats, y, &vfeats, &vy, cfg.classifier, cfg.seed);
  } catch (...) {
    rethrow_with_stage("classifier");
  }
  bundle.classifier = std::move(fit.params);
  result.report.classifier_best_epoch = fit.best_epoch;
  result.report.classifier_best_val_f1 = fit.best_val_f1;
  result.report.classifier_val_f1 = std::move(fit.val_f1);
  say("classifier: best_epoch=" + std::to_string(result.report.classifier_best_epoch) +
      " val_f1=" + detail::shortest(result.report.classifier_best_val_f1));
  return result;
}

Matrix classifier_inputs(const ModelBundle& bundle, const Matrix& x) {
  const std::size_t d = bundle.dim();
  if (x.cols() != d) throw ShapeError("expected " + std::to_string(d) + " features, got " + std::to_string(x.cols()));
  const auto keep = feature_keep_mask(bundle.manifest, d, bundle.config.ablations.feature_subset);
  Matrix ic, vc;
  apply_mask(bundle.mask.effective(), apply_keep(x, keep), ic, vc);
  if (!bundle.gate_enabled) return hconcat(ic, vc);
  return hconcat(ic, gate_split(bundle.gate, vc, 0, false).sc);
}

std::vector<float> predict_scores(const ModelBundle& bundle, const Matrix& x) {
  const Matrix z = mlp_forward(bundle.classifier, classifier_inputs(bundle, x));
  std::vector<float> out(z.rows());
  for (std::size_t i = 0; i < z.rows(); ++i) out[i] = ad::sigmoid_scalar(z(i, 0));
  return out;
}

Prediction predict(const ModelBundle& bundle, const std::vector<float>& x) {
  const float s = predict_scores(bundle, Matrix::row_vector(x)).front();
  return {s, s >= 0.5f ? 1 : 0};
}

}  // namespace causalbait

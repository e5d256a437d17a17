#include "causalbait/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <json.hpp>
#include <sstream>

#include "causalbait/errors.hpp"
#include "format.hpp"

namespace causalbait {

namespace {

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

std::string fixed(double v, int digits) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

ExperimentData synthetic_experiment(SyntheticSpec spec, std::uint64_t seed) {
  spec.seed = seed;
  auto gen = generate(spec);
  ExperimentData out;
  out.train = std::move(gen.train);
  out.val = std::move(gen.val);
  out.tests.push_back({"test_ood", std::move(gen.test_ood)});
  out.tests.push_back({"test_id", std::move(gen.test_id)});
  out.truth = std::move(gen.truth);
  return out;
}

std::vector<Variant> ablation_variants(const FeatureManifest& manifest, const std::vector<std::string>& text_families,
                                       std::vector<std::string>& notes) {
  std::vector<Variant> v;
  v.push_back({"full", [](TrainConfig&) {}});
  v.push_back({"no_eicf", [](TrainConfig& c) { c.ablations.no_eicf = true; }});
  v.push_back({"no_escf", [](TrainConfig& c) { c.ablations.no_escf = true; }});
  v.push_back({"no_enf", [](TrainConfig& c) { c.ablations.no_enf = true; }});
  std::vector<std::string> present;
  for (const auto& f : text_families)
    if (manifest.find(f) != nullptr) present.push_back(f);
  if (!present.empty() && present.size() < manifest.family_spans.size()) {
    v.push_back({"text_only", [present](TrainConfig& c) { c.ablations.feature_subset = present; }});
  } else {
    notes.push_back("text_only skipped: the manifest has no separate text family");
  }
  return v;
}

std::vector<Variant> mask_config_variants() {
  auto set = [](MaskMode m, MaskRegularizer r) {
    return [m, r](TrainConfig& c) {
      c.mask_mode = m;
      c.mask_regularizer = r;
    };
  };
  return {{"float_l2", set(MaskMode::Float, MaskRegularizer::L2)},
          {"float_l0", set(MaskMode::Float, MaskRegularizer::L0)},
          {"binary_l2", set(MaskMode::Binary, MaskRegularizer::L2)},
          {"binary_l0", set(MaskMode::Binary, MaskRegularizer::L0)}};
}

std::vector<Variant> scenario_sweep_variants(const std::vector<std::size_t>& sizes) {
  std::vector<Variant> v;
  for (std::size_t s : sizes)
    v.push_back({"S=" + std::to_string(s), [s](TrainConfig& c) { c.em.num_scenarios = s; }});
  return v;
}

Variant erm_variant() { return {"erm", {}, true}; }

const VariantSummary* StudyReport::find(const std::string& variant) const {
  for (const auto& s : summary)
    if (s.variant == variant) return &s;
  return nullptr;
}

StudyReport run_study(const std::vector<Variant>& variants, const std::vector<std::uint64_t>& seeds,
                      const DataForSeed& data, const TrainConfig& base, const TrainLog& log) {
  if (variants.empty() || seeds.empty()) throw ConfigError("a study needs at least one variant and one seed");
  StudyReport rep;
  for (std::uint64_t seed : seeds) {
    const ExperimentData d = data(seed);
    if (d.tests.empty()) throw ConfigError("a study needs a test split");
    if (rep.test_names.empty())
      for (const auto& t : d.tests) rep.test_names.push_back(t.name);
    for (const auto& v : variants) {
      VariantRun run;
      run.variant = v.name;
      run.seed = seed;
      TrainConfig cfg = base;
      cfg.seed = seed;
      if (v.erm) {
        std::vector<const Dataset*> tests;
        for (const auto& t : d.tests) tests.push_back(&t.data);
        run.metrics = erm_baseline(d.train, tests, cfg.classifier, seed, &d.val);
      } else {
        if (v.apply) v.apply(cfg);
        auto res = train(d.train, d.val, cfg);
        for (const auto& t : d.tests) run.metrics.push_back(evaluate(res.bundle, t.data));
        if (d.truth) run.mask_auc = mask_recovery_auc(res.bundle.mask.effective(), *d.truth);
        run.moved_rate_history = res.bundle.scenario.moved_rate_history;
        run.rounds_run = res.report.rounds.size();
      }
      if (log)
        log(v.name + " seed " + std::to_string(seed) + ": " + rep.test_names.front() +
            " acc=" + fixed(run.metrics.front().acc, 4) + " f1=" + fixed(run.metrics.front().f1, 4));
      rep.runs.push_back(std::move(run));
    }
  }
  for (const auto& v : variants) {
    VariantSummary s;
    s.variant = v.name;
    std::vector<double> acc, pre, rec, f1, auc;
    for (const auto& r : rep.runs) {
      if (r.variant != v.name) continue;
      const auto& m = r.metrics.front();
      acc.push_back(m.acc);
      pre.push_back(m.pre);
      rec.push_back(m.rec);
      f1.push_back(m.f1);
      if (r.mask_auc >= 0.0) auc.push_back(r.mask_auc);
      s.mean.confusion.tp += m.confusion.tp;
      s.mean.confusion.fp += m.confusion.fp;
      s.mean.confusion.tn += m.confusion.tn;
      s.mean.confusion.fn += m.confusion.fn;
    }
    s.seeds = acc.size();
    s.mean.acc = mean_of(acc);
    s.mean.pre = mean_of(pre);
    s.mean.rec = mean_of(rec);
    s.mean.f1 = mean_of(f1);
    s.std_acc = std_of(acc);
    s.std_f1 = std_of(f1);
    if (!auc.empty()) s.mean_mask_auc = mean_of(auc);
    rep.summary.push_back(s);
  }
  for (auto& s : rep.summary) {
    s.delta_acc = 100.0 * (s.mean.acc - rep.summary.front().mean.acc);
    s.delta_f1 = 100.0 * (s.mean.f1 - rep.summary.front().mean.f1);
  }
  return rep;
}

std::string study_to_json(const StudyReport& r) {
  nlohmann::ordered_json j;
  j["scored_split"] = r.test_names.empty() ? "" : r.test_names.front();
  j["summary"] = nlohmann::ordered_json::array();
  for (const auto& s : r.summary) {
    nlohmann::ordered_json e;
    e["variant"] = s.variant;
    e["seeds"] = s.seeds;
    e["acc"] = s.mean.acc;
    e["pre"] = s.mean.pre;
    e["rec"] = s.mean.rec;
    e["f1"] = s.mean.f1;
    e["std_acc"] = s.std_acc;
    e["std_f1"] = s.std_f1;
    e["delta_acc_points"] = s.delta_acc;
    e["delta_f1_points"] = s.delta_f1;
    if (s.mean_mask_auc >= 0.0) e["mask_auc"] = s.mean_mask_auc;
    j["summary"].push_back(e);
  }
  j["runs"] = nlohmann::ordered_json::array();
  for (const auto& run : r.runs) {
    nlohmann::ordered_json e;
    e["variant"] = run.variant;
    e["seed"] = run.seed;
    for (std::size_t t = 0; t < run.metrics.size(); ++t)
      e[r.test_names[t]] = {{"acc", run.metrics[t].acc},
                            {"pre", run.metrics[t].pre},
                            {"rec", run.metrics[t].rec},
                            {"f1", run.metrics[t].f1}};
    if (run.mask_auc >= 0.0) e["mask_auc"] = run.mask_auc;
    e["rounds"] = run.rounds_run;
    e["moved_rate_history"] = run.moved_rate_history;
    j["runs"].push_back(e);
  }
  j["notes"] = r.notes;
  return j.dump(2);
}

std::string study_to_csv(const StudyReport& r) {
  std::ostringstream out;
  out << "variant,seed,split,acc,pre,rec,f1,mask_auc\n";
  for (const auto& run : r.runs)
    for (std::size_t t = 0; t < run.metrics.size(); ++t) {
      const auto& m = run.metrics[t];
      out << run.variant << ',' << run.seed << ',' << r.test_names[t] << ',' << detail::shortest(m.acc) << ','
          << detail::shortest(m.pre) << ',' << detail::shortest(m.rec) << ',' << detail::shortest(m.f1) << ','
          << (run.mask_auc >= 0.0 ? detail::shortest(run.mask_auc) : std::string()) << '\n';
    }
  return out.str();
}

std::string study_table(const StudyReport& r) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-12s %6s %6s %6s %6s %8s %8s\n", "variant", "ACC", "PRE", "REC", "F1", "dACC", "dF1");
  out << line;
  for (const auto& s : r.summary) {
    std::snprintf(line, sizeof line, "%-12s %6.2f %6.2f %6.2f %6.2f %+8.2f %+8.2f\n", s.variant.c_str(),
                  100.0 * s.mean.acc, 100.0 * s.mean.pre, 100.0 * s.mean.rec, 100.0 * s.mean.f1, s.delta_acc,
                  s.delta_f1);
    out << line;
  }
  for (const auto& n : r.notes) out << "note: " << n << '\n';
  return out.str();
}

}  // namespace causalbait

#include "commands.hpp"

#include <filesystem>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "causalbait/errors.hpp"
#include "causalbait/eval.hpp"
#include "causalbait/experiment.hpp"
#include "causalbait/gradcheck.hpp"
#include "causalbait/pseudo_label.hpp"
#include "causalbait/run_config.hpp"
#include "causalbait/synthetic.hpp"
#include "causalbait/trainer.hpp"
#include "output_dir.hpp"

namespace causalbait::cli {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

void log_line(std::string_view s) { std::cerr << s << '\n'; }

RunConfig config_for(const std::string& path, std::optional<std::uint64_t> seed, const std::string& command) {
  RunConfig cfg = path.empty() ? RunConfig{} : load_run_config(path);
  if (seed) cfg.seed = *seed;
  cfg.apply_seed(cfg.require_seed(command));
  return cfg;
}

bool has_split(const fs::path& dir, const std::string& name) {
  return fs::exists(dir / (name + ".cbfv")) && fs::exists(dir / (name + ".jsonl"));
}

Dataset load_split(const fs::path& dir, const std::string& name) {
  if (!has_split(dir, name)) throw FileError("no split '" + name + "' in " + dir.string());
  return load_dataset(dir / (name + ".cbfv"), dir / (name + ".jsonl"));
}

void write_split(OutputDir& out, const std::string& name, const Dataset& ds) {
  write_dataset(ds, out.file(name + ".cbfv"), out.file(name + ".jsonl"));
}

// train/val from the directory when present, else a seeded split of data.
std::pair<Dataset, Dataset> train_val_from(const fs::path& dir, const RunConfig& cfg) {
  if (has_split(dir, "train") && has_split(dir, "val")) return {load_split(dir, "train"), load_split(dir, "val")};
  auto [tr, va, te] = split_dataset(load_split(dir, "data"), cfg.split, cfg.train.seed);
  return {std::move(tr), std::move(va)};
}

ExperimentData experiment_from_dir(const fs::path& dir, const RunConfig& base, std::uint64_t seed) {
  RunConfig cfg = base;
  cfg.apply_seed(seed);
  ExperimentData d;
  if (has_split(dir, "train") && has_split(dir, "val")) {
    d.train = load_split(dir, "train");
    d.val = load_split(dir, "val");
    for (const char* name : {"test_ood", "test_id", "test"})
      if (has_split(dir, name)) d.tests.push_back({name, load_split(dir, name)});
  } else {
    auto [tr, va, te] = split_dataset(load_split(dir, "data"), cfg.split, seed);
    d.train = std::move(tr);
    d.val = std::move(va);
    d.tests.push_back({"test", std::move(te)});
  }
  if (d.tests.empty()) throw FileError("no test split in " + dir.string());
  if (fs::exists(dir / "truth.json")) d.truth = load_truth(dir / "truth.json");
  return d;
}

std::string moved_rate_csv(const TrainResult& r) {
  std::ostringstream out;
  out << "round,em_iteration,moved_rate\n";
  const auto& h = r.bundle.scenario.moved_rate_history;
  std::size_t k = 0;
  for (std::size_t t = 0; t < r.report.rounds.size(); ++t)
    for (std::size_t i = 0; i < r.report.rounds[t].em_rounds && k < h.size(); ++i, ++k)
      out << t + 1 << ',' << i + 1 << ',' << ojson(h[k]).dump() << '\n';
  return out.str();
}

std::string train_report_json(const TrainResult& r, std::size_t n_train, std::size_t n_val) {
  ojson j;
  j["train_size"] = n_train;
  j["val_size"] = n_val;
  j["rounds"] = ojson::array();
  for (const auto& s : r.report.rounds)
    j["rounds"].push_back({{"em_rounds", s.em_rounds},
                           {"final_moved_rate", s.final_moved_rate},
                           {"val_irm", s.val_irm},
                           {"mask_best_epoch", s.mask_best_epoch},
                           {"mask_lr", s.mask_lr},
                           {"contrastive", s.contrastive}});
  j["classifier"] = {{"best_epoch", r.report.classifier_best_epoch},
                     {"best_val_f1", r.report.classifier_best_val_f1},
                     {"val_f1", r.report.classifier_val_f1}};
  j["mask"] = r.bundle.mask.effective();
  return j.dump(2);
}

void write_study(OutputDir& out, const std::string& stem, const StudyReport& rep) {
  out.write_text(stem + ".json", study_to_json(rep));
  out.write_text(stem + ".csv", study_to_csv(rep));
  out.write_text(stem + ".txt", study_table(rep));
  std::cout << study_table(rep);
}

DataForSeed study_data(const StudyArgs& a, const RunConfig& cfg) {
  if (a.data.empty()) return [spec = cfg.synthetic](std::uint64_t s) { return synthetic_experiment(spec, s); };
  return [dir = fs::path(a.data), cfg](std::uint64_t s) { return experiment_from_dir(dir, cfg, s); };
}

std::vector<std::uint64_t> study_seeds(const StudyArgs& a, const RunConfig& cfg) {
  if (a.seed) return {*a.seed};
  return cfg.seed_list();
}

}  // namespace

int run_gen(const GenArgs& a) {
  const RunConfig cfg = config_for(a.config, a.seed, "gen");
  const auto data = generate(cfg.synthetic);
  OutputDir out(a.out);
  write_split(out, "train", data.train);
  write_split(out, "val", data.val);
  write_split(out, "test_id", data.test_id);
  write_split(out, "test_ood", data.test_ood);
  write_truth(data.truth, out.file("truth.json"));
  out.write_text("config.json", run_config_to_json(cfg));
  out.finish();
  return 0;
}

int run_train(const TrainArgs& a) {
  const RunConfig cfg = config_for(a.config, a.seed, "train");
  auto [tr, va] = train_val_from(a.data, cfg);
  if (cfg.oversample) tr = oversample(tr, cfg.train.seed);
  const auto result = train(tr, va, cfg.train, log_line);
  OutputDir out(a.out);
  save_bundle(result.bundle, out.file("bundle.cbmb"));
  out.write_text("moved_rate.csv", moved_rate_csv(result));
  out.write_text("train_report.json", train_report_json(result, tr.size(), va.size()));
  out.write_text("config.json", run_config_to_json(cfg));
  out.finish();
  return 0;
}

int run_eval(const EvalArgs& a) {
  const ModelBundle bundle = load_bundle(a.bundle);
  const Dataset test = load_split(a.data, a.split);
  const Metrics m = evaluate(bundle, test);
  const auto scores = predict_scores(bundle, test.features());
  std::vector<double> s(scores.begin(), scores.end());
  std::vector<int> y;
  for (const auto& r : test.records) y.push_back(r.y);
  OutputDir out(a.out);
  write_metrics_json(m, out.file("metrics.json"));
  write_pr_csv(pr_curve(s, y), out.file("pr_curve.csv"));
  if (a.dump_factors) dump_factors(bundle, test, out.file("factors.csv"));
  out.finish();
  std::cout << metrics_to_json(m) << '\n';
  return 0;
}

int run_ablate(const StudyArgs& a) {
  RunConfig cfg = config_for(a.config, a.seed, "ablate");
  const auto seeds = study_seeds(a, cfg);
  const auto data = study_data(a, cfg);
  std::vector<std::string> notes;
  std::vector<Variant> variants;
  if (a.mask_configs) {
    variants = mask_config_variants();
  } else {
    const ExperimentData probe = data(seeds.front());
    variants = ablation_variants(probe.train.manifest, cfg.text_families, notes);
    variants.push_back(erm_variant());
  }
  StudyReport rep = run_study(variants, seeds, data, cfg.train, log_line);
  rep.notes.insert(rep.notes.end(), notes.begin(), notes.end());
  OutputDir out(a.out);
  write_study(out, a.mask_configs ? "mask_configs" : "ablation", rep);
  out.finish();
  return 0;
}

int run_sweep(const StudyArgs& a) {
  RunConfig cfg = config_for(a.config, a.seed, "sweep-scenarios");
  const auto seeds = study_seeds(a, cfg);
  const StudyReport rep =
      run_study(scenario_sweep_variants(cfg.sweep_scenarios), seeds, study_data(a, cfg), cfg.train, log_line);
  OutputDir out(a.out);
  write_study(out, "sweep", rep);
  out.finish();
  return 0;
}

int run_pseudo_label(const PseudoLabelArgs& a) {
  const RunConfig cfg = a.config.empty() ? RunConfig{} : load_run_config(a.config);
  std::size_t d = 0;
  const auto records = load_unlabeled_jsonl(a.input, d);
  const auto result = causalbait::run_pseudo_label(records, d, FeatureManifest::single(d), cfg.pseudo_label);
  OutputDir out(a.out);
  write_split(out, "pseudo", result.dataset);
  const std::string stats = stats_to_json(result.stats);
  out.write_text("stats.json", stats);
  out.finish();
  std::cout << stats << '\n';
  return 0;
}

int run_check_grad(const CheckGradArgs& a) {
  GradCheckConfig gc;
  gc.seed = a.seed;
  const auto reports = run_gradcheck(gc);
  bool ok = true;
  for (const auto& r : reports) {
    std::cout << (r.passed ? "ok   " : "FAIL ") << r.kernel << ' ' << r.metric << '=' << r.worst
              << " instances=" << r.instances << " redrawn=" << r.redrawn << '\n';
    ok = ok && r.passed;
  }
  if (!a.out.empty()) {
    OutputDir out(a.out);
    out.write_text("gradcheck.json", gradcheck_report_json(reports));
    out.finish();
  }
  return ok ? 0 : 4;
}

}  // namespace causalbait::cli

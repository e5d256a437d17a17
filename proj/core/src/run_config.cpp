#include "causalbait/run_config.hpp"

#include <fstream>
#include <iterator>
#include <numeric>
#include <set>

#include "causalbait/errors.hpp"
#include "config_json.hpp"

namespace causalbait {

namespace {

using ojson = nlohmann::ordered_json;

// Reads fields of one JSON object and reports keys nobody asked for.
class ObjectReader {
 public:
  ObjectReader(const ojson& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(where_ + " must be an object");
  }

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    const auto& v = j_.at(key);
    check_type(v, out, key);
    try {
      out = v.get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(name(key) + ": " + e.what());
    }
  }

  const ojson* child(const char* key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  std::string name(const char* key) const { return where_.empty() ? key : where_ + "." + key; }

  void finish() const {
    for (const auto& item : j_.items())
      if (!seen_.count(item.key())) throw ConfigError("unknown key '" + name(item.key().c_str()) + "'");
  }

 private:
  template <class T>
  void check_type(const ojson& v, const T&, const char* key) const {
    bool ok = true;
    if constexpr (std::is_same_v<T, bool>) ok = v.is_boolean();
    else if constexpr (std::is_integral_v<T>) ok = v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0);
    else if constexpr (std::is_floating_point_v<T>) ok = v.is_number();
    else if constexpr (std::is_same_v<T, std::string>) ok = v.is_string();
    else ok = v.is_array();
    if (!ok) throw ConfigError(name(key) + " has the wrong type");
  }

  const ojson& j_;
  std::string where_;
  std::set<std::string> seen_;
};

template <class Fn>
void with_child(ObjectReader& r, const char* key, Fn fn) {
  if (const auto* c = r.child(key)) fn(*c, r.name(key));
}

template <class Enum, class Parse>
void get_enum(ObjectReader& r, const char* key, Enum& out, Parse parse) {
  std::string s;
  bool present = false;
  with_child(r, key, [&](const ojson& v, const std::string& where) {
    if (!v.is_string()) throw ConfigError(where + " must be a string");
    s = v.get<std::string>();
    present = true;
  });
  if (present) out = parse(s);
}

ojson classifier_json(const ClassifierConfig& c) {
  return {{"hidden", c.hidden}, {"layers", c.layers}, {"lr", c.lr}, {"epochs", c.epochs}, {"batch_size", c.batch_size}};
}

ojson irm_json(const IrmConfig& c) {
  return {{"alpha", c.alpha},     {"beta", c.beta},          {"mask_lr", c.mask_lr},
          {"mask_lr_grid", c.mask_lr_grid}, {"head_lr", c.head_lr}, {"epochs", c.epochs},
          {"batch_size", c.batch_size}, {"penalty", to_string(c.penalty)}, {"raw_init", c.raw_init}};
}

ojson em_json(const EmConfig& c) {
  return {{"num_scenarios", c.num_scenarios}, {"inner_epochs", c.inner_epochs},
          {"max_rounds", c.max_rounds},       {"moved_rate_threshold", c.moved_rate_threshold},
          {"lr", c.lr},                       {"hidden", c.hidden},
          {"batch_size", c.batch_size}};
}

ojson gate_json(const GateConfig& c) {
  return {{"k_fraction", c.k_fraction}, {"temperature", c.temperature}, {"hidden", c.hidden},
          {"lr", c.lr},                 {"epochs", c.epochs},           {"batch_size", c.batch_size}};
}

ojson ablations_json(const Ablations& a) {
  return {{"no_eicf", a.no_eicf}, {"no_escf", a.no_escf}, {"no_enf", a.no_enf}, {"feature_subset", a.feature_subset}};
}

ojson synthetic_json(const SyntheticSpec& s) {
  return {{"n_inv", s.n_inv},
          {"n_sc", s.n_sc},
          {"n_spur", s.n_spur},
          {"n_noise", s.n_noise},
          {"num_scenarios", s.num_scenarios},
          {"n_per_scenario", s.n_per_scenario},
          {"n_val_per_scenario", s.n_val_per_scenario},
          {"n_test_per_scenario", s.n_test_per_scenario},
          {"rho_train", s.rho_train},
          {"rho_test", s.rho_test},
          {"signal_noise_sigma", s.signal_noise_sigma},
          {"amp_inv", s.amp_inv},
          {"amp_sc", s.amp_sc},
          {"amp_spur", s.amp_spur},
          {"coding", to_string(s.coding)}};
}

void read_synthetic(const ojson& j, SyntheticSpec& s, const std::string& where) {
  ObjectReader r(j, where);
  r.get("n_inv", s.n_inv);
  r.get("n_sc", s.n_sc);
  r.get("n_spur", s.n_spur);
  r.get("n_noise", s.n_noise);
  r.get("num_scenarios", s.num_scenarios);
  r.get("n_per_scenario", s.n_per_scenario);
  r.get("n_val_per_scenario", s.n_val_per_scenario);
  r.get("n_test_per_scenario", s.n_test_per_scenario);
  r.get("rho_train", s.rho_train);
  r.get("rho_test", s.rho_test);
  r.get("signal_noise_sigma", s.signal_noise_sigma);
  r.get("amp_inv", s.amp_inv);
  r.get("amp_sc", s.amp_sc);
  r.get("amp_spur", s.amp_spur);
  get_enum(r, "coding", s.coding, parse_spurious_coding);
  r.finish();
}

}  // namespace

namespace detail {

ojson train_config_json(const TrainConfig& c) {
  ojson j;
  j["rounds"] = c.rounds;
  j["classifier"] = classifier_json(c.classifier);
  j["irm"] = irm_json(c.irm);
  j["mask_mode"] = to_string(c.mask_mode);
  j["mask_regularizer"] = to_string(c.mask_regularizer);
  j["em"] = em_json(c.em);
  j["gate"] = gate_json(c.gate);
  j["ablations"] = ablations_json(c.ablations);
  j["early_stop_tol"] = c.early_stop_tol;
  j["early_stop_patience"] = c.early_stop_patience;
  j["seed"] = c.seed;
  return j;
}

void read_train_config(const ojson& j, TrainConfig& c, const std::string& where) {
  ObjectReader r(j, where);
  r.get("rounds", c.rounds);
  with_child(r, "classifier", [&](const ojson& v, const std::string& w) {
    ObjectReader cr(v, w);
    cr.get("hidden", c.classifier.hidden);
    cr.get("layers", c.classifier.layers);
    cr.get("lr", c.classifier.lr);
    cr.get("epochs", c.classifier.epochs);
    cr.get("batch_size", c.classifier.batch_size);
    cr.finish();
  });
  with_child(r, "irm", [&](const ojson& v, const std::string& w) {
    ObjectReader ir(v, w);
    ir.get("alpha", c.irm.alpha);
    ir.get("beta", c.irm.beta);
    ir.get("mask_lr", c.irm.mask_lr);
    ir.get("mask_lr_grid", c.irm.mask_lr_grid);
    ir.get("head_lr", c.irm.head_lr);
    ir.get("epochs", c.irm.epochs);
    ir.get("batch_size", c.irm.batch_size);
    get_enum(ir, "penalty", c.irm.penalty, parse_irm_penalty);
    ir.get("raw_init", c.irm.raw_init);
    ir.finish();
  });
  get_enum(r, "mask_mode", c.mask_mode, parse_mask_mode);
  get_enum(r, "mask_regularizer", c.mask_regularizer, parse_mask_regularizer);
  with_child(r, "em", [&](const ojson& v, const std::string& w) {
    ObjectReader er(v, w);
    er.get("num_scenarios", c.em.num_scenarios);
    er.get("inner_epochs", c.em.inner_epochs);
    er.get("max_rounds", c.em.max_rounds);
    er.get("moved_rate_threshold", c.em.moved_rate_threshold);
    er.get("lr", c.em.lr);
    er.get("hidden", c.em.hidden);
    er.get("batch_size", c.em.batch_size);
    er.finish();
  });
  with_child(r, "gate", [&](const ojson& v, const std::string& w) {
    ObjectReader gr(v, w);
    gr.get("k_fraction", c.gate.k_fraction);
    gr.get("temperature", c.gate.temperature);
    gr.get("hidden", c.gate.hidden);
    gr.get("lr", c.gate.lr);
    gr.get("epochs", c.gate.epochs);
    gr.get("batch_size", c.gate.batch_size);
    gr.finish();
  });
  with_child(r, "ablations", [&](const ojson& v, const std::string& w) {
    ObjectReader ar(v, w);
    ar.get("no_eicf", c.ablations.no_eicf);
    ar.get("no_escf", c.ablations.no_escf);
    ar.get("no_enf", c.ablations.no_enf);
    ar.get("feature_subset", c.ablations.feature_subset);
    ar.finish();
  });
  r.get("early_stop_tol", c.early_stop_tol);
  r.get("early_stop_patience", c.early_stop_patience);
  r.get("seed", c.seed);
  r.finish();
  // Scenario inference always runs on the training seed.
  c.em.seed = c.seed;
  if (c.irm.alpha < 0.0 || c.irm.beta < 0.0) throw ConfigError(where + ": IRM weights must be non-negative");
  if (!(c.em.moved_rate_threshold > 0.0 && c.em.moved_rate_threshold < 1.0))
    throw ConfigError(where + ": moved-rate threshold must lie in (0, 1)");
}

}  // namespace detail

std::uint64_t RunConfig::require_seed(const std::string& command) const {
  if (!seed) throw ConfigError(command + " needs a seed (config \"seed\" or --seed)");
  return *seed;
}

std::vector<std::uint64_t> RunConfig::seed_list() const {
  if (!seeds.empty()) return seeds;
  if (seed) return {*seed};
  return {};
}

void RunConfig::apply_seed(std::uint64_t s) {
  seed = s;
  train.seed = s;
  train.em.seed = s;
  synthetic.seed = s;
}

RunConfig parse_run_config(const std::string& json_text) {
  ojson j;
  try {
    j = ojson::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig cfg;
  ObjectReader r(j, "");
  std::uint64_t seed = 0;
  if (j.is_object() && j.contains("seed")) {
    r.get("seed", seed);
    cfg.seed = seed;
  } else {
    r.child("seed");
  }
  r.get("seeds", cfg.seeds);
  with_child(r, "split", [&](const ojson& v, const std::string& w) {
    ObjectReader sr(v, w);
    sr.get("train", cfg.split.train);
    sr.get("val", cfg.split.val);
    sr.get("test", cfg.split.test);
    sr.finish();
  });
  r.get("oversample", cfg.oversample);
  with_child(r, "synthetic", [&](const ojson& v, const std::string& w) { read_synthetic(v, cfg.synthetic, w); });
  with_child(r, "train", [&](const ojson& v, const std::string& w) {
    if (v.is_object() && v.contains("seed")) throw ConfigError(w + ".seed is not allowed; use the top-level seed");
    detail::read_train_config(v, cfg.train, w);
  });
  with_child(r, "pseudo_label", [&](const ojson& v, const std::string& w) {
    ObjectReader pr(v, w);
    pr.get("mu", cfg.pseudo_label.mu);
    pr.get("nu", cfg.pseudo_label.nu);
    pr.get("likes_zero_rule", cfg.pseudo_label.likes_zero_rule);
    pr.finish();
  });
  with_child(r, "sweep", [&](const ojson& v, const std::string& w) {
    ObjectReader sr(v, w);
    sr.get("scenarios", cfg.sweep_scenarios);
    sr.finish();
  });
  with_child(r, "ablate", [&](const ojson& v, const std::string& w) {
    ObjectReader ar(v, w);
    ar.get("text_families", cfg.text_families);
    ar.finish();
  });
  with_child(r, "paths", [&](const ojson& v, const std::string& w) {
    ObjectReader pr(v, w);
    pr.get("data", cfg.data_dir);
    pr.get("out", cfg.out_dir);
    pr.finish();
  });
  r.finish();
  if (cfg.sweep_scenarios.empty()) {
    cfg.sweep_scenarios.resize(25);
    std::iota(cfg.sweep_scenarios.begin(), cfg.sweep_scenarios.end(), std::size_t{1});
  }
  if (cfg.seed) cfg.apply_seed(*cfg.seed);
  cfg.synthetic.validate();
  cfg.pseudo_label.validate();
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  return parse_run_config(std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()));
}

std::string run_config_to_json(const RunConfig& cfg) {
  ojson j;
  if (cfg.seed) j["seed"] = *cfg.seed;
  j["seeds"] = cfg.seeds;
  j["split"] = {{"train", cfg.split.train}, {"val", cfg.split.val}, {"test", cfg.split.test}};
  j["oversample"] = cfg.oversample;
  j["synthetic"] = synthetic_json(cfg.synthetic);
  auto train = detail::train_config_json(cfg.train);
  train.erase("seed");
  j["train"] = train;
  j["pseudo_label"] = {{"mu", cfg.pseudo_label.mu},
                       {"nu", cfg.pseudo_label.nu},
                       {"likes_zero_rule", cfg.pseudo_label.likes_zero_rule}};
  j["sweep"] = {{"scenarios", cfg.sweep_scenarios}};
  j["ablate"] = {{"text_families", cfg.text_families}};
  j["paths"] = {{"data", cfg.data_dir}, {"out", cfg.out_dir}};
  return j.dump(2);
}

std::string train_config_to_json(const TrainConfig& cfg) { return detail::train_config_json(cfg).dump(); }

TrainConfig train_config_from_json(const std::string& json_text) {
  TrainConfig cfg;
  try {
    detail::read_train_config(ojson::parse(json_text), cfg, "train");
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("train config: ") + e.what());
  }
  return cfg;
}

}  // namespace causalbait

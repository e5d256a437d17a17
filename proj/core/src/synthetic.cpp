#include "causalbait/synthetic.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <json.hpp>

#include "causalbait/errors.hpp"
#include "causalbait/rng.hpp"

namespace causalbait {

namespace {

using ojson = nlohmann::ordered_json;

constexpr const char* kRoleNames[] = {"invariant", "scenario_causal", "spurious", "noise"};

DimRole parse_role(const std::string& s) {
  for (int r = 0; r < 4; ++r)
    if (s == kRoleNames[r]) return static_cast<DimRole>(r);
  throw FormatError("unknown dimension role '" + s + "'");
}

struct Layout {
  std::vector<DimRole> roles;
  std::vector<std::size_t> inv, sc, spur, noise;  // dims of each role, ascending
  std::vector<std::vector<int>> patterns;
};

Layout make_layout(const SyntheticSpec& spec) {
  Layout l;
  std::vector<DimRole> by_slot;
  by_slot.insert(by_slot.end(), spec.n_inv, DimRole::Invariant);
  by_slot.insert(by_slot.end(), spec.n_sc, DimRole::ScenarioCausal);
  by_slot.insert(by_slot.end(), spec.n_spur, DimRole::Spurious);
  by_slot.insert(by_slot.end(), spec.n_noise, DimRole::Noise);
  Rng rng = Rng::derive(spec.seed, Stream::SyntheticLayout);
  const auto perm = rng.permutation(spec.d());
  l.roles.resize(spec.d());
  // Slot j lands at dimension perm[j].
  for (std::size_t j = 0; j < perm.size(); ++j) {
    l.roles[perm[j]] = by_slot[j];
    switch (by_slot[j]) {
      case DimRole::Invariant: l.inv.push_back(perm[j]); break;
      case DimRole::ScenarioCausal: l.sc.push_back(perm[j]); break;
      case DimRole::Spurious: l.spur.push_back(perm[j]); break;
      case DimRole::Noise: l.noise.push_back(perm[j]); break;
    }
  }
  for (auto* v : {&l.inv, &l.sc, &l.spur, &l.noise}) std::sort(v->begin(), v->end());
  l.patterns.assign(spec.num_scenarios, std::vector<int>(spec.n_sc));
  for (auto& p : l.patterns)
    for (auto& v : p) v = rng.bernoulli(0.5) ? 1 : -1;
  return l;
}

Dataset make_split(const SyntheticSpec& spec, const Layout& l, std::uint64_t split, const std::string& prefix,
                   std::size_t n_per, double rho) {
  Dataset ds;
  ds.d = spec.d();
  ds.manifest = FeatureManifest::single(ds.d, "synthetic");
  const double sigma = spec.signal_noise_sigma;
  for (std::size_t s = 0; s < spec.num_scenarios; ++s) {
    for (std::size_t i = 0; i < n_per; ++i) {
      Rng rng = Rng::derive(spec.seed, Stream::SyntheticSample, {split, s, i});
      PostRecord r;
      r.id = prefix + "-" + std::to_string(s) + "-" + std::to_string(i);
      r.y = rng.bernoulli(0.5) ? 1 : 0;
      r.scenario = static_cast<int>(s);
      r.x.assign(ds.d, 0.0f);
      const double t = 2.0 * r.y - 1.0;
      for (std::size_t j : l.inv) r.x[j] = static_cast<float>(t * spec.amp_inv + rng.normal(0.0, sigma));
      for (std::size_t j = 0; j < l.sc.size(); ++j)
        r.x[l.sc[j]] = static_cast<float>(t * l.patterns[s][j] * spec.amp_sc + rng.normal(0.0, sigma));
      const bool aligned = rng.bernoulli(rho);
      double mean = 0.0;
      if (spec.coding == SpuriousCoding::Symmetric) {
        mean = (aligned ? t : -t) * spec.amp_spur;
      } else {
        const int cue = aligned ? 1 - r.y : r.y;
        mean = cue * spec.amp_spur;
      }
      for (std::size_t j : l.spur) r.x[j] = static_cast<float>(mean + rng.normal(0.0, sigma));
      for (std::size_t j : l.noise) r.x[j] = static_cast<float>(rng.normal(0.0, 1.0) + rng.normal(0.0, sigma));
      ds.records.push_back(std::move(r));
    }
  }
  return ds;
}

}  // namespace

const char* to_string(DimRole r) { return kRoleNames[static_cast<int>(r)]; }

const char* to_string(SpuriousCoding c) { return c == SpuriousCoding::Symmetric ? "symmetric" : "disguise"; }

SpuriousCoding parse_spurious_coding(const std::string& s) {
  if (s == "symmetric") return SpuriousCoding::Symmetric;
  if (s == "disguise") return SpuriousCoding::Disguise;
  throw ConfigError("unknown spurious coding '" + s + "'");
}

void SyntheticSpec::validate() const {
  if (d() == 0) throw ConfigError("synthetic layout has no dimensions");
  if (num_scenarios == 0 || n_per_scenario == 0) throw ConfigError("synthetic data needs scenarios and samples");
  if (rho_train < 0.0 || rho_train > 1.0 || rho_test < 0.0 || rho_test > 1.0)
    throw ConfigError("rho values must lie in [0, 1]");
  if (signal_noise_sigma < 0.0) throw ConfigError("noise sigma must be non-negative");
}

SyntheticData generate(const SyntheticSpec& spec) {
  spec.validate();
  const Layout l = make_layout(spec);
  SyntheticData out;
  out.train = make_split(spec, l, 0, "train", spec.n_per_scenario, spec.rho_train);
  out.val = make_split(spec, l, 1, "val", spec.n_val_per_scenario, spec.rho_train);
  out.test_id = make_split(spec, l, 2, "id", spec.n_test_per_scenario, spec.rho_train);
  out.test_ood = make_split(spec, l, 3, "ood", spec.n_test_per_scenario, spec.rho_test);
  out.truth.roles = l.roles;
  out.truth.patterns = l.patterns;
  for (std::size_t s = 0; s < spec.num_scenarios; ++s) out.truth.rule_of_scenario.push_back(static_cast<int>(s));
  for (const auto& r : out.train.records) out.truth.train_scenarios.push_back(*r.scenario);
  return out;
}

std::vector<Metrics> erm_baseline(const Dataset& train, const std::vector<const Dataset*>& tests,
                                  const ClassifierConfig& cfg, std::uint64_t seed, const Dataset* val) {
  if (val != nullptr && val->d != train.d) throw ShapeError("datasets differ in dimension");
  for (const auto* t : tests) {
    if (t->d != train.d) throw ShapeError("datasets differ in dimension");
    if (t->empty()) throw ConfigError("evaluation set is empty");
  }
  const Matrix x = train.features();
  const auto y = train.labels();
  Matrix vx;
  std::vector<float> vy;
  if (val != nullptr) {
    vx = val->features();
    vy = val->labels();
  }
  MlpParams net;
  if (cfg.epochs == 0) {
    net = init_mlp<float>(classifier_sizes(train.d, cfg), Rng::derive(seed, Stream::ClassifierInit).engine()());
  } else {
    net = fit_classifier(x, y, val ? &vx : nullptr, val ? &vy : nullptr, cfg, seed).params;
  }
  std::vector<Metrics> out;
  for (const auto* t : tests) {
    const Matrix z = mlp_forward(net, t->features());
    std::vector<float> scores(z.rows());
    for (std::size_t i = 0; i < z.rows(); ++i) scores[i] = ad::sigmoid_scalar(z(i, 0));
    out.push_back(metrics_from_scores(scores, t->labels(), 0.5));
  }
  return out;
}

Metrics erm_baseline(const Dataset& train, const Dataset& test, const ClassifierConfig& cfg, std::uint64_t seed,
                     const Dataset* val) {
  return erm_baseline(train, std::vector<const Dataset*>{&test}, cfg, seed, val).front();
}

double mask_recovery_auc(const std::vector<float>& m, const GroundTruth& gt) {
  if (m.size() != gt.roles.size()) throw ShapeError("mask length differs from the ground-truth layout");
  std::vector<float> pos, neg;
  for (std::size_t j = 0; j < m.size(); ++j) {
    if (gt.roles[j] == DimRole::Invariant) pos.push_back(m[j]);
    else if (gt.roles[j] == DimRole::Spurious || gt.roles[j] == DimRole::Noise) neg.push_back(m[j]);
  }
  if (pos.empty() || neg.empty()) throw ConfigError("mask recovery needs invariant and spurious/noise dims");
  double wins = 0.0;
  for (float p : pos)
    for (float q : neg) wins += p > q ? 1.0 : (p == q ? 0.5 : 0.0);
  return wins / (static_cast<double>(pos.size()) * static_cast<double>(neg.size()));
}

std::string truth_to_json(const GroundTruth& gt) {
  ojson j;
  j["roles"] = ojson::array();
  for (auto r : gt.roles) j["roles"].push_back(to_string(r));
  j["patterns"] = gt.patterns;
  j["rule_of_scenario"] = gt.rule_of_scenario;
  j["train_scenarios"] = gt.train_scenarios;
  return j.dump();
}

void write_truth(const GroundTruth& gt, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FileError("cannot write " + path.string());
  out << truth_to_json(gt) << '\n';
}

GroundTruth load_truth(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FileError("cannot open " + path.string());
  GroundTruth gt;
  try {
    const auto j = ojson::parse(std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()));
    for (const auto& r : j.at("roles")) gt.roles.push_back(parse_role(r.get<std::string>()));
    gt.patterns = j.at("patterns").get<std::vector<std::vector<int>>>();
    gt.rule_of_scenario = j.at("rule_of_scenario").get<std::vector<int>>();
    gt.train_scenarios = j.at("train_scenarios").get<std::vector<int>>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return gt;
}

}  // namespace causalbait

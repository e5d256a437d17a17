#include "causalbait/scenario_em.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "causalbait/errors.hpp"
#include "format.hpp"
#include "causalbait/optim.hpp"
#include "causalbait/rng.hpp"

namespace causalbait {

std::vector<int> init_assignment(std::size_t n, std::size_t num_scenarios, std::uint64_t seed) {
  if (num_scenarios == 0) throw ConfigError("number of scenarios must be at least 1");
  if (n < num_scenarios)
    throw ConfigError(std::to_string(n) + " samples cannot fill " + std::to_string(num_scenarios) + " scenarios");
  std::vector<int> a(n);
  std::vector<std::size_t> counts(num_scenarios);
  for (std::uint64_t attempt = 0; attempt < 100; ++attempt) {
    Rng rng = Rng::derive(seed, Stream::ScenarioInit, {attempt});
    std::fill(counts.begin(), counts.end(), 0);
    for (auto& s : a) {
      s = static_cast<int>(rng.below(num_scenarios));
      ++counts[static_cast<std::size_t>(s)];
    }
    if (std::all_of(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; })) return a;
  }
  // Fall back to a shuffled round-robin, which always covers every scenario.
  auto perm = Rng::derive(seed, Stream::ScenarioInit, {100}).permutation(n);
  for (std::size_t i = 0; i < n; ++i) a[perm[i]] = static_cast<int>(i % num_scenarios);
  return a;
}

ScenarioState init_scenario_state(std::size_t n, std::size_t d, const EmConfig& cfg) {
  ScenarioState st;
  st.num_scenarios = cfg.num_scenarios;
  st.assignment = init_assignment(n, cfg.num_scenarios, cfg.seed);
  for (std::size_t s = 0; s < cfg.num_scenarios; ++s)
    st.models.push_back(init_mlp<float>({d, cfg.hidden, 1}, Rng::derive(cfg.seed, Stream::ScenarioModel, {s}).engine()()));
  return st;
}

void fit_scenario_models(ScenarioState& state, const Matrix& vc, const std::vector<float>& y, const EmConfig& cfg) {
  if (state.assignment.size() != vc.rows() || y.size() != vc.rows()) throw ShapeError("scenario data misaligned");
  if (cfg.batch_size == 0) throw ConfigError("scenario batch size must be positive");
  std::vector<std::vector<std::size_t>> members(state.num_scenarios);
  for (std::size_t i = 0; i < state.assignment.size(); ++i)
    members[static_cast<std::size_t>(state.assignment[i])].push_back(i);

  const std::size_t round = state.fit_calls++;
  for (std::size_t s = 0; s < state.num_scenarios; ++s) {
    if (members[s].empty() || cfg.inner_epochs == 0) continue;
    MlpParams& net = state.models[s];
    AdamConfig acfg;
    acfg.lr = cfg.lr;
    Adam opt(net.params(), acfg);
    std::vector<std::size_t> order = members[s];
    for (std::size_t e = 0; e < cfg.inner_epochs; ++e) {
      Rng::derive(cfg.seed, Stream::ScenarioBatches, {round, s, e}).shuffle(order.begin(), order.end());
      for (std::size_t lo = 0; lo < order.size(); lo += cfg.batch_size) {
        const std::size_t hi = std::min(order.size(), lo + cfg.batch_size);
        std::vector<std::size_t> idx(order.begin() + static_cast<std::ptrdiff_t>(lo),
                                     order.begin() + static_cast<std::ptrdiff_t>(hi));
        std::vector<float> yb;
        for (std::size_t i : idx) yb.push_back(y[i]);
        net.zero_grad();
        ad::Tape<float> tape;
        auto loss = ad::bce_with_logits(mlp_forward(tape, net, tape.constant(gather_rows(vc, idx))), yb);
        tape.backward(loss);
        opt.step();
      }
    }
  }
}

std::vector<double> membership_score(const ScenarioState& state, const std::vector<float>& vc_i, float y_i) {
  Matrix row = Matrix::row_vector(vc_i);
  std::vector<double> out;
  for (const auto& net : state.models) {
    const double z = mlp_forward(net, row)[0];
    out.push_back(std::exp(-ad::bce_scalar(z, static_cast<double>(y_i))));
  }
  return out;
}

std::vector<std::vector<double>> membership_scores(const ScenarioState& state, const Matrix& vc,
                                                   const std::vector<float>& y) {
  std::vector<std::vector<double>> out(vc.rows(), std::vector<double>(state.num_scenarios));
  for (std::size_t s = 0; s < state.num_scenarios; ++s) {
    const Matrix z = mlp_forward(state.models[s], vc);
    for (std::size_t i = 0; i < vc.rows(); ++i)
      out[i][s] = std::exp(-ad::bce_scalar(static_cast<double>(z[i]), static_cast<double>(y[i])));
  }
  return out;
}

namespace {

int argmax_lowest(const std::vector<double>& v) {
  std::size_t best = 0;
  for (std::size_t s = 1; s < v.size(); ++s)
    if (v[s] > v[best]) best = s;
  return static_cast<int>(best);
}

}  // namespace

std::vector<int> assign_by_membership(const ScenarioState& state, const Matrix& vc, const std::vector<float>& y) {
  const auto scores = membership_scores(state, vc, y);
  std::vector<int> out(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) out[i] = argmax_lowest(scores[i]);
  return out;
}

double reallocate(ScenarioState& state, const Matrix& vc, const std::vector<float>& y) {
  const std::size_t n = vc.rows();
  const std::size_t S = state.num_scenarios;
  const auto scores = membership_scores(state, vc, y);
  std::vector<int> next(n);
  std::vector<double> best(n);
  std::vector<std::size_t> counts(S, 0);
  for (std::size_t i = 0; i < n; ++i) {
    next[i] = argmax_lowest(scores[i]);
    best[i] = scores[i][static_cast<std::size_t>(next[i])];
    ++counts[static_cast<std::size_t>(next[i])];
  }

  // Empty scenarios take the worst-fitting samples so |S| stays fixed.
  const std::size_t reseed = (n + 10 * S - 1) / (10 * S);
  std::vector<std::size_t> worst(n);
  std::iota(worst.begin(), worst.end(), std::size_t{0});
  std::stable_sort(worst.begin(), worst.end(), [&](std::size_t a, std::size_t b) { return best[a] < best[b]; });
  std::vector<bool> reseeded(n, false);
  for (std::size_t s = 0; s < S; ++s) {
    if (counts[s] > 0) continue;
    std::size_t taken = 0;
    for (std::size_t i : worst) {
      if (taken == reseed) break;
      const auto from = static_cast<std::size_t>(next[i]);
      if (reseeded[i] || counts[from] <= 1) continue;
      --counts[from];
      next[i] = static_cast<int>(s);
      ++counts[s];
      reseeded[i] = true;
      ++taken;
    }
  }

  std::size_t moved = 0;
  for (std::size_t i = 0; i < n; ++i) moved += next[i] != state.assignment[i];
  state.assignment = std::move(next);
  const double rate = n == 0 ? 0.0 : static_cast<double>(moved) / static_cast<double>(n);
  state.moved_rate_history.push_back(rate);
  return rate;
}

void run_em(ScenarioState& state, const Matrix& vc, const std::vector<float>& y, const EmConfig& cfg) {
  if (!(cfg.moved_rate_threshold > 0.0 && cfg.moved_rate_threshold < 1.0))
    throw ConfigError("moved-rate threshold must lie in (0,1)");
  for (std::size_t r = 0; r < cfg.max_rounds; ++r) {
    fit_scenario_models(state, vc, y, cfg);
    if (reallocate(state, vc, y) < cfg.moved_rate_threshold) break;
  }
}

ScenarioState run_em(const Dataset& train, const InvarianceMask& mask, const EmConfig& cfg) {
  Matrix ic, vc;
  apply_mask(mask.effective(), train.features(), ic, vc);
  ScenarioState st = init_scenario_state(train.size(), train.d, cfg);
  run_em(st, vc, train.labels(), cfg);
  return st;
}

void write_moved_rate_csv(const std::vector<double>& history, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FileError("cannot write " + path.string());
  out << "round,moved_rate\n";
  for (std::size_t r = 0; r < history.size(); ++r) out << (r + 1) << ',' << detail::shortest(history[r]) << '\n';
}

}  // namespace causalbait

#include <benchmark/benchmark.h>

#include "causalbait/causal_gate.hpp"
#include "causalbait/eval.hpp"
#include "causalbait/invariant_mask.hpp"
#include "causalbait/mlp.hpp"
#include "causalbait/rng.hpp"
#include "causalbait/scenario_em.hpp"

using namespace causalbait;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(r, c);
  for (auto& v : m.storage()) v = static_cast<float>(rng.normal(0, 1));
  return m;
}

std::vector<float> random_labels(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<float> y(n);
  for (auto& v : y) v = rng.bernoulli(0.5) ? 1.0f : 0.0f;
  return y;
}

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix a = random_matrix(n, n, 1), b = random_matrix(n, n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(matmul(a, b));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(2 * n * n * n));
}
BENCHMARK(BM_Matmul)->Arg(64)->Arg(256)->Arg(512);

// Classifier shape used on the 40-dim benchmark: [ic ; nf] -> 512 -> 512 -> 1.
void BM_MlpForwardBackward(benchmark::State& state) {
  const auto batch = static_cast<std::size_t>(state.range(0));
  MlpParams net = init_mlp<float>({80, 512, 512, 1}, 3);
  const Matrix x = random_matrix(batch, 80, 4);
  const auto y = random_labels(batch, 5);
  for (auto _ : state) {
    net.zero_grad();
    ad::Tape<float> t;
    const auto loss = ad::bce_with_logits(mlp_forward(t, net, t.constant(x)), y);
    t.backward(loss);
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(batch));
}
BENCHMARK(BM_MlpForwardBackward)->Arg(64)->Arg(256);

void BM_MlpInference(benchmark::State& state) {
  const MlpParams net = init_mlp<float>({80, 512, 512, 1}, 3);
  const Matrix x = random_matrix(1000, 80, 4);
  for (auto _ : state) benchmark::DoNotOptimize(mlp_forward(net, x));
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_MlpInference);

void BM_IrmObjective(benchmark::State& state) {
  const std::size_t d = 40, per = 500;
  InvarianceMask m = InvarianceMask::uniform(d, MaskMode::Float, MaskRegularizer::L2);
  const MlpParams head = init_mlp<float>({d, 1}, 6);
  std::vector<ScenarioBatch> subsets;
  for (std::uint64_t s = 0; s < 4; ++s) subsets.push_back({random_matrix(per, d, 10 + s), random_labels(per, 20 + s)});
  IrmConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(irm_loss(m, head, subsets, cfg));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(4 * per));
}
BENCHMARK(BM_IrmObjective);

void BM_EmReallocate(benchmark::State& state) {
  const std::size_t n = 2000, d = 40;
  EmConfig cfg;
  cfg.num_scenarios = 4;
  cfg.hidden = 64;
  ScenarioState st = init_scenario_state(n, d, cfg);
  const Matrix vc = random_matrix(n, d, 7);
  const auto y = random_labels(n, 8);
  for (auto _ : state) benchmark::DoNotOptimize(reallocate(st, vc, y));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_EmReallocate);

void BM_GateSplit(benchmark::State& state) {
  GateConfig cfg;
  const GateNet net = init_gate(40, cfg, 9);
  const Matrix vc = random_matrix(1000, 40, 10);
  const bool train = state.range(0) != 0;
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(gate_split(net, vc, seed++, train));
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_GateSplit)->Arg(0)->Arg(1);

void BM_PrCurve(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(11);
  std::vector<double> scores(n);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    scores[i] = rng.uniform();
    labels[i] = rng.bernoulli(0.5) ? 1 : 0;
  }
  for (auto _ : state) benchmark::DoNotOptimize(pr_curve(scores, labels));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_PrCurve)->Arg(20)->Arg(1000);

}  // namespace

BENCHMARK_MAIN();

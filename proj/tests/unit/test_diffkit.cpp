#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "causalbait/autodiff.hpp"
#include "causalbait/errors.hpp"
#include "causalbait/gradcheck.hpp"
#include "causalbait/gumbel.hpp"
#include "causalbait/mlp.hpp"
#include "causalbait/optim.hpp"

using namespace causalbait;

namespace {

MlpParams two_two_one() {
  MlpParams net = zero_mlp<float>({2, 2, 1});
  net.weights[0].value = Matrix(2, 2, {0.5f, -1.0f, 2.0f, 0.25f});
  net.biases[0].value = Matrix(1, 2, {0.1f, -0.2f});
  net.weights[1].value = Matrix(2, 1, {1.5f, -0.5f});
  net.biases[1].value = Matrix(1, 1, {0.3f});
  return net;
}

}  // namespace

TEST(Mlp, ZeroWeightsGiveZeroLogits) {
  const MlpParams net = zero_mlp<float>({4, 8, 8, 1});
  const Matrix x(3, 4, {1, -2, 3, 4, 5, 6, -7, 8, 9, 1, 2, 3});
  const Matrix z = mlp_forward(net, x);
  for (float v : z.storage()) EXPECT_EQ(v, 0.0f);
}

TEST(Mlp, IdentityLinearLayer) {
  MlpParams net = zero_mlp<float>({3, 3});
  for (std::size_t i = 0; i < 3; ++i) net.weights[0].value(i, i) = 1.0f;
  const Matrix x(2, 3, {0.5f, -1.0f, 2.0f, 3.0f, 0.0f, -4.0f});
  EXPECT_EQ(mlp_forward(net, x), x);
}

TEST(Mlp, HandSetTwoTwoOneForward) {
  // hidden pre-activation (2.6, -0.95) -> relu (2.6, 0) -> 2.6 * 1.5 + 0.3
  const Matrix z = mlp_forward(two_two_one(), Matrix(1, 2, {1.0f, 1.0f}));
  EXPECT_NEAR(z(0, 0), 4.2f, 1e-6);
}

TEST(Mlp, TapeForwardMatchesInference) {
  MlpParams net = init_mlp<float>({5, 7, 3}, 11);
  const Matrix x(2, 5, {0.1f, 0.2f, -0.3f, 0.4f, 0.5f, -1, 1, 0.5f, 0.25f, -0.75f});
  ad::Tape<float> t;
  const auto out = mlp_forward(t, net, t.constant(x));
  EXPECT_EQ(t.value(out), mlp_forward(net, x));
}

TEST(Mlp, InitIsSeeded) {
  EXPECT_EQ(init_mlp<float>({4, 6, 1}, 3), init_mlp<float>({4, 6, 1}, 3));
  EXPECT_FALSE(init_mlp<float>({4, 6, 1}, 3) == init_mlp<float>({4, 6, 1}, 4));
}

TEST(Bce, LogitZeroIsLn2) {
  for (float y : {0.0f, 1.0f}) {
    ad::Tape<double> t;
    EXPECT_NEAR(t.scalar(ad::bce_with_logits(t.constant(MatrixD(1, 1, 0.0)), std::vector<double>{y})), std::log(2.0),
                1e-12);
  }
}

TEST(Bce, ConfidentCorrectLogitIsNearZero) {
  ad::Tape<double> t;
  EXPECT_LT(t.scalar(ad::bce_with_logits(t.constant(MatrixD(1, 1, 20.0)), std::vector<double>{1.0})), 1e-8);
  EXPECT_LT(ad::bce_scalar(-20.0, 0.0), 1e-8);
}

TEST(Bce, PairMean) {
  ad::Tape<double> t;
  const double v = t.scalar(ad::bce_with_logits(t.constant(MatrixD(2, 1, {0.0, 20.0})), std::vector<double>{1.0, 1.0}));
  EXPECT_NEAR(v, 0.34657359131054943, 1e-12);
}

TEST(Bce, StableAtLargeLogits) {
  EXPECT_NEAR(ad::bce_scalar(1000.0, 0.0), 1000.0, 1e-9);
  EXPECT_NEAR(ad::bce_scalar(-1000.0, 1.0), 1000.0, 1e-9);
  EXPECT_TRUE(std::isfinite(ad::bce_scalar(1e30f, 1.0f)));
}

TEST(Backward, ConstantLossHasZeroGradients) {
  ad::Param<double> p("p", MatrixD(2, 2, 3.0));
  ad::Tape<double> t;
  t.param(p);
  const auto c = t.constant(MatrixD(1, 1, 5.0));
  t.backward(c);
  for (double g : p.grad.storage()) EXPECT_EQ(g, 0.0);
}

TEST(Backward, SumOfParametersHasUnitGradients) {
  ad::Param<double> a("a", MatrixD(2, 3, 0.7));
  ad::Param<double> b("b", MatrixD(1, 4, -2.0));
  ad::Tape<double> t;
  const auto loss = ad::add(ad::sum(t.param(a)), ad::sum(t.param(b)));
  t.backward(loss);
  for (double g : a.grad.storage()) EXPECT_EQ(g, 1.0);
  for (double g : b.grad.storage()) EXPECT_EQ(g, 1.0);
}

TEST(Backward, SecondBackwardIsRejected) {
  ad::Param<double> a("a", MatrixD(1, 1, 1.0));
  ad::Tape<double> t;
  const auto loss = ad::sum(t.param(a));
  t.backward(loss);
  EXPECT_THROW(t.backward(loss), GraphError);
}

TEST(Backward, NonScalarLossIsRejected) {
  ad::Param<double> a("a", MatrixD(2, 1, 1.0));
  ad::Tape<double> t;
  EXPECT_THROW(t.backward(t.param(a)), ShapeError);
}

TEST(Backward, ShapeMismatchIsRejected) {
  ad::Tape<double> t;
  EXPECT_THROW(ad::matmul(t.constant(MatrixD(2, 3)), t.constant(MatrixD(2, 3))), ShapeError);
  EXPECT_THROW(ad::add(t.constant(MatrixD(2, 3)), t.constant(MatrixD(3, 2))), ShapeError);
}

TEST(Backward, ThreeLayerNetMatchesFiniteDifferences) {
  BasicMlp<double> net = init_mlp<double>({4, 6, 5, 1}, 21);
  const MatrixD x(3, 4, {0.3, -0.2, 0.9, 0.1, -0.5, 0.4, 0.2, -0.8, 0.6, 0.7, -0.1, 0.05});
  const std::vector<double> y{1.0, 0.0, 1.0};
  auto loss_of = [&] {
    ad::Tape<double> t;
    return t.scalar(ad::bce_with_logits(mlp_forward(t, net, t.constant(x)), y));
  };
  net.zero_grad();
  {
    ad::Tape<double> t;
    const auto loss = ad::bce_with_logits(mlp_forward(t, net, t.constant(x)), y);
    ASSERT_GT(t.relu_margin(), 1e-3);
    t.backward(loss);
  }
  const double h = 1e-6;
  double diff2 = 0.0, a2 = 0.0, n2 = 0.0;
  for (auto* p : net.params()) {
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      const double orig = p->value[i];
      p->value[i] = orig + h;
      const double up = loss_of();
      p->value[i] = orig - h;
      const double down = loss_of();
      p->value[i] = orig;
      const double num = (up - down) / (2 * h);
      diff2 += (num - p->grad[i]) * (num - p->grad[i]);
      a2 += p->grad[i] * p->grad[i];
      n2 += num * num;
    }
  }
  EXPECT_LT(std::sqrt(diff2) / std::max(std::sqrt(a2), std::sqrt(n2)), 1e-4);
}

TEST(GradCheck, EveryKernelPasses) {
  GradCheckConfig cfg;
  cfg.instances = 20;
  for (const auto& r : run_gradcheck(cfg)) {
    EXPECT_TRUE(r.passed) << r.kernel << " " << r.metric << "=" << r.worst;
    EXPECT_EQ(r.instances, 20u) << r.kernel;
  }
}

TEST(Gumbel, HardGateKeepsExactlyK) {
  const std::vector<float> s{0.3f, -1.0f, 2.0f, 0.7f, 0.1f, -0.4f, 1.1f, 0.9f, -2.0f, 0.0f};
  const auto g = gumbel_topk_gate(s, 0.3, 0.5, 17, true);
  EXPECT_EQ(std::count(g.begin(), g.end(), 1.0f), 3);
  EXPECT_EQ(std::count(g.begin(), g.end(), 0.0f), 7);
}

TEST(Gumbel, NoiseFreeGateIsTopKIndicator) {
  const std::vector<float> s{0.3f, -1.0f, 2.0f, 0.7f, 0.1f, -0.4f, 1.1f, 0.9f, -2.0f, 0.0f};
  const std::vector<float> expected{0, 0, 1, 0, 0, 0, 1, 1, 0, 0};
  EXPECT_EQ(gumbel_topk_gate(s, 0.3, 1e-6, 5, true, false), expected);
}

TEST(Gumbel, SeededGateIsDeterministic) {
  const std::vector<float> s{0.3f, -1.0f, 2.0f, 0.7f, 0.1f, -0.4f};
  EXPECT_EQ(gumbel_topk_gate(s, 0.5, 0.5, 99, true), gumbel_topk_gate(s, 0.5, 0.5, 99, true));
  EXPECT_EQ(gumbel_topk_gate(s, 0.5, 0.5, 99, false), gumbel_topk_gate(s, 0.5, 0.5, 99, false));
}

TEST(Gumbel, SoftGateSumsToK) {
  const std::vector<float> s{0.3f, -1.0f, 2.0f, 0.7f, 0.1f, -0.4f};
  const auto g = gumbel_topk_gate(s, 0.5, 0.7, 4, false);
  EXPECT_NEAR(std::accumulate(g.begin(), g.end(), 0.0), 3.0, 1e-5);
}

TEST(Gumbel, DegenerateKIsRejected) {
  EXPECT_THROW(retained_count(10, 0.01), GateError);
  EXPECT_THROW(retained_count(10, 0.99), GateError);
  EXPECT_THROW(retained_count(10, 0.0), GateError);
  EXPECT_EQ(retained_count(10, 0.3), 3u);
  EXPECT_THROW(gumbel_topk_gate({1.0f, 2.0f}, 0.5, 0.0, 1, true), GateError);
}

TEST(Gumbel, TopkTieGoesToLowerIndex) {
  const MatrixD s(1, 4, {1.0, 2.0, 2.0, 2.0});
  EXPECT_EQ(ad::topk_indicator(s, 2), MatrixD(1, 4, {0.0, 1.0, 1.0, 0.0}));
}

TEST(Adam, ZeroGradientLeavesParameters) {
  ad::Param<float> p("p", Matrix(1, 3, {0.5f, -1.0f, 2.0f}));
  AdamConfig c;
  c.lr = 0.1;
  Adam opt({&p}, c);
  opt.step();
  opt.step();
  EXPECT_EQ(p.value, Matrix(1, 3, {0.5f, -1.0f, 2.0f}));
}

TEST(Adam, HandExecutedSteps) {
  ad::Param<float> p("p", Matrix(1, 1, 0.5f));
  AdamConfig c;
  c.lr = 0.1;
  Adam opt({&p}, c);
  p.grad = Matrix(1, 1, 1.0f);
  opt.step();
  // m = 0.1, v = 0.001; bias-corrected 1 and 1: 0.5 - 0.1 / (1 + 1e-8)
  EXPECT_NEAR(p.value[0], 0.400000001, 1e-7);
  p.grad = Matrix(1, 1, 1.0f);
  opt.step();
  EXPECT_NEAR(p.value[0], 0.300000002, 1e-7);
}

TEST(Adam, IdenticalRunsAgree) {
  auto run = [] {
    ad::Param<float> p("p", Matrix(2, 2, {0.1f, 0.2f, 0.3f, 0.4f}));
    AdamConfig c;
    c.lr = 0.05;
    Adam opt({&p}, c);
    for (int k = 0; k < 5; ++k) {
      p.grad = Matrix(2, 2, {1.0f, -0.5f, 0.25f * k, 2.0f});
      opt.step();
    }
    return p.value;
  };
  EXPECT_EQ(run(), run());
}

TEST(Adam, GlobalNormClipping) {
  ad::Param<float> a("a", Matrix(1, 2, {0.0f, 0.0f}));
  a.grad = Matrix(1, 2, {30.0f, 40.0f});
  clip_global_norm({&a}, 5.0);
  EXPECT_NEAR(a.grad[0], 3.0f, 1e-5);
  EXPECT_NEAR(a.grad[1], 4.0f, 1e-5);
  EXPECT_NEAR(grad_norm({&a}), 5.0, 1e-5);
}

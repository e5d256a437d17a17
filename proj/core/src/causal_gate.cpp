#include "causalbait/causal_gate.hpp"

#include "causalbait/errors.hpp"
#include "causalbait/gumbel.hpp"
#include "causalbait/rng.hpp"

namespace causalbait {

std::size_t GateNet::retained() const { return retained_count(dim(), k_fraction); }

GateNet init_gate(std::size_t d, const GateConfig& cfg, std::uint64_t seed) {
  retained_count(d, cfg.k_fraction);
  if (!(cfg.temperature > 0.0)) throw GateError("gate temperature must be positive");
  GateNet g;
  g.params = init_mlp<float>({d, cfg.hidden, d}, Rng::derive(seed, Stream::GateInit).engine()());
  g.k_fraction = cfg.k_fraction;
  g.temperature = cfg.temperature;
  return g;
}

CausalSplitBatch gate_split(const GateNet& net, const Matrix& vc, std::uint64_t seed, bool train_mode) {
  if (vc.cols() != net.dim())
    throw ShapeError("gate expects " + std::to_string(net.dim()) + " dims, got " + std::to_string(vc.cols()));
  const std::size_t k = net.retained();
  Matrix scores = mlp_forward(net.params, vc);
  if (train_mode) {
    const Matrix noise = gumbel_noise(vc.rows(), vc.cols(), seed);
    for (std::size_t i = 0; i < scores.size(); ++i) scores[i] += noise[i];
  }
  CausalSplitBatch out;
  out.gamma = ad::topk_indicator(scores, k);
  out.sc = Matrix(vc.rows(), vc.cols());
  out.nf = Matrix(vc.rows(), vc.cols());
  for (std::size_t i = 0; i < vc.size(); ++i) {
    out.sc[i] = out.gamma[i] * vc[i];
    out.nf[i] = (1.0f - out.gamma[i]) * vc[i];
  }
  return out;
}

CausalSplit gate_split(const GateNet& net, const std::vector<float>& vc, std::uint64_t seed, bool train_mode) {
  auto b = gate_split(net, Matrix::row_vector(vc), seed, train_mode);
  return {b.gamma.storage(), b.sc.storage(), b.nf.storage()};
}

template <class T>
ad::Var<T> gate_forward(ad::Tape<T>& tape, BasicMlp<T>& xi, ad::Var<T> vc, const BasicMatrix<T>& noise,
                        std::size_t k, T tau) {
  return ad::st_topk_gate(mlp_forward(tape, xi, vc), noise, k, tau);
}

template <class T>
ad::Var<T> contrastive_objective(ad::Tape<T>& tape, const BasicMlp<T>& classifier, ad::Var<T> ic, ad::Var<T> nf) {
  const std::size_t rows = tape.value(ic).rows();
  if (rows != tape.value(nf).rows() || tape.value(ic).cols() != tape.value(nf).cols())
    throw ShapeError("contrastive batches misaligned");
  auto z = mlp_forward_frozen(tape, classifier, ad::concat_cols(ic, nf));
  return ad::bce_with_logits(z, std::vector<T>(rows, T(0)));
}

double contrastive_loss(const MlpParams& classifier, const Matrix& ic, const Matrix& nf) {
  ad::Tape<float> tape;
  auto loss = contrastive_objective(tape, classifier, tape.constant(ic), tape.constant(nf));
  return tape.scalar(loss);
}

template ad::Var<float> gate_forward<float>(ad::Tape<float>&, BasicMlp<float>&, ad::Var<float>, const Matrix&,
                                            std::size_t, float);
template ad::Var<double> gate_forward<double>(ad::Tape<double>&, BasicMlp<double>&, ad::Var<double>, const MatrixD&,
                                              std::size_t, double);
template ad::Var<float> contrastive_objective<float>(ad::Tape<float>&, const BasicMlp<float>&, ad::Var<float>,
                                                     ad::Var<float>);
template ad::Var<double> contrastive_objective<double>(ad::Tape<double>&, const BasicMlp<double>&, ad::Var<double>,
                                                       ad::Var<double>);

}  // namespace causalbait

#pragma once

#include <cstdint>
#include <vector>

#include "causalbait/autodiff.hpp"
#include "causalbait/matrix.hpp"
#include "causalbait/mlp.hpp"

namespace causalbait {

struct GateConfig {
  double k_fraction = 0.5;
  double temperature = 0.5;
  std::size_t hidden = 64;
  double lr = 1e-3;
  std::size_t epochs = 3;
  std::size_t batch_size = 64;

  bool operator==(const GateConfig&) const = default;
};

// xi: vc -> d scores, plus the top-k settings.
struct GateNet {
  MlpParams params;
  double k_fraction = 0.5;
  double temperature = 0.5;

  std::size_t dim() const { return params.input_size(); }
  std::size_t retained() const;

  bool operator==(const GateNet&) const = default;
};

GateNet init_gate(std::size_t d, const GateConfig& cfg, std::uint64_t seed);

struct CausalSplit {
  std::vector<float> gamma;
  std::vector<float> sc;
  std::vector<float> nf;
};

struct CausalSplitBatch {
  Matrix gamma;
  Matrix sc;
  Matrix nf;
};

// Hard top-k gate on xi(vc). Gumbel noise (seeded) is added only in
// train_mode; inference is noise-free.
CausalSplit gate_split(const GateNet& net, const std::vector<float>& vc, std::uint64_t seed, bool train_mode);
CausalSplitBatch gate_split(const GateNet& net, const Matrix& vc, std::uint64_t seed, bool train_mode);

// Records gamma = ST-top-k(xi(vc) + noise) on the tape.
template <class T>
ad::Var<T> gate_forward(ad::Tape<T>& tape, BasicMlp<T>& xi, ad::Var<T> vc, const BasicMatrix<T>& noise,
                        std::size_t k, T tau);

// Mean cross-entropy of classifier([ic ; nf]) against target 0. The
// classifier is held fixed; gradients reach ic and nf (and through nf the
// gate network).
template <class T>
ad::Var<T> contrastive_objective(ad::Tape<T>& tape, const BasicMlp<T>& classifier, ad::Var<T> ic, ad::Var<T> nf);

double contrastive_loss(const MlpParams& classifier, const Matrix& ic, const Matrix& nf);

}  // namespace causalbait

#ifndef SPECGRID_OPTIMIZER_HPP
#define SPECGRID_OPTIMIZER_HPP

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "specgrid/dgnet.hpp"

namespace specgrid {

/// Optimisation settings.
struct TrainHyper {
  double alpha = 10.0;  // loss weight of missing pixels
  double lr0 = 1e-4;
  std::vector<int> halve_epochs{20, 32, 40, 48, 56};
  int epochs = 64;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double eps = 1e-8;
  int batch_size = 8;
  std::uint64_t seed = 0;
  std::int64_t max_steps = 0;  // 0 = no cap

  void validate() const {
    if (!(alpha >= 1.0)) throw ArgumentError("TrainHyper: alpha must be >= 1");
    if (!(lr0 > 0.0)) throw ArgumentError("TrainHyper: lr0 must be positive");
    if (epochs < 1) throw ArgumentError("TrainHyper: epochs must be >= 1");
    if (batch_size < 1) throw ArgumentError("TrainHyper: batch_size must be >= 1");
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
      throw ArgumentError("TrainHyper: betas must lie in [0, 1)");
    }
    for (std::size_t i = 1; i < halve_epochs.size(); ++i) {
      if (halve_epochs[i] <= halve_epochs[i - 1]) {
        throw ArgumentError("TrainHyper: halve_epochs must be strictly increasing");
      }
    }
  }
};

/// lr0 halved once for every scheduled epoch <= `epoch`.
inline double lr_at(int epoch, const TrainHyper& hyper) {
  int halvings = 0;
  for (int e : hyper.halve_epochs)
    if (e <= epoch) ++halvings;
  return std::ldexp(hyper.lr0, -halvings);
}

template <typename Scalar>
struct AdamState {
  DgnetParams<Scalar> first_moment;
  DgnetParams<Scalar> second_moment;
  std::int64_t step = 0;

  static AdamState fresh(const DgnetParams<Scalar>& params) {
    return AdamState{params.zeros_like(), params.zeros_like(), 0};
  }
};

/// One bias-corrected Adam update of a single parameter block, step `t` >= 1.
template <typename P, typename G, typename M, typename V>
void adam_update(Eigen::DenseBase<P>& param, const Eigen::DenseBase<G>& grad, Eigen::DenseBase<M>& m,
                 Eigen::DenseBase<V>& v, std::int64_t t, double lr, const TrainHyper& hyper) {
  using Scalar = typename P::Scalar;
  const Scalar b1 = static_cast<Scalar>(hyper.beta1), b2 = static_cast<Scalar>(hyper.beta2);
  const Scalar c1 = static_cast<Scalar>(1.0 - std::pow(hyper.beta1, static_cast<double>(t)));
  const Scalar c2 = static_cast<Scalar>(1.0 - std::pow(hyper.beta2, static_cast<double>(t)));
  const Scalar eps = static_cast<Scalar>(hyper.eps), step = static_cast<Scalar>(lr);
  auto&& g = grad.derived().array();
  auto&& ma = m.derived().array();
  auto&& va = v.derived().array();
  ma = b1 * ma + (Scalar(1) - b1) * g;
  va = b2 * va + (Scalar(1) - b2) * g.square();
  param.derived().array() -= step * (ma / c1) / ((va / c2).sqrt() + eps);
}

/// Applies one Adam step to every layer. Throws NumericError (leaving
/// params and state untouched) if any gradient is non-finite.
template <typename Scalar>
void adam_step(DgnetParams<Scalar>& params, const DgnetParams<Scalar>& grads, AdamState<Scalar>& state, double lr,
               const TrainHyper& hyper) {
  if (grads.layers.size() != params.layers.size()) throw ArgumentError("adam_step: gradient shape mismatch");
  for (std::size_t i = 0; i < grads.layers.size(); ++i) {
    if (grads.layers[i].weight.size() != params.layers[i].weight.size() ||
        grads.layers[i].bias.size() != params.layers[i].bias.size()) {
      throw ArgumentError("adam_step: gradient shape mismatch in layer " + std::to_string(i));
    }
    if (!grads.layers[i].weight.allFinite() || !grads.layers[i].bias.allFinite()) {
      throw NumericError("adam_step: non-finite gradient in layer " + std::to_string(i) + ", step skipped");
    }
  }
  ++state.step;
  for (std::size_t i = 0; i < params.layers.size(); ++i) {
    auto& p = params.layers[i];
    const auto& g = grads.layers[i];
    adam_update(p.weight, g.weight, state.first_moment.layers[i].weight, state.second_moment.layers[i].weight,
                state.step, lr, hyper);
    if (p.has_bias()) {
      adam_update(p.bias, g.bias, state.first_moment.layers[i].bias, state.second_moment.layers[i].bias, state.step,
                  lr, hyper);
    }
  }
}

}  // namespace specgrid

#endif  // SPECGRID_OPTIMIZER_HPP

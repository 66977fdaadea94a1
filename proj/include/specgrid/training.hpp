#ifndef SPECGRID_TRAINING_HPP
#define SPECGRID_TRAINING_HPP

#include <cmath>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "specgrid/dgnet.hpp"
#include "specgrid/optimizer.hpp"
#include "specgrid/sample.hpp"

namespace specgrid {

/// Mean over all pixels of w * |net_out - target|, with w = alpha on masked
/// pixels and 1 elsewhere.
template <typename Scalar>
Scalar weighted_l1(const Image<Scalar>& net_out, const Image<Scalar>& target, const BinaryMask& mask, double alpha) {
  require_same_dims(net_out, target, "weighted_l1");
  require_same_dims(net_out, mask.values(), "weighted_l1");
  const Image<Scalar> w = Scalar(1) + Scalar(alpha - 1.0) * mask.values().template cast<Scalar>();
  return (w * (net_out - target).abs()).sum() / static_cast<Scalar>(net_out.size());
}

/// A sample prepared for optimisation: bin aligned, with a per-pixel loss
/// weight that is zero on the padding so only real pixels count.
template <typename Scalar>
struct TrainingExample {
  Image<Scalar> guide;
  Image<Scalar> target;
  Image<Scalar> distorted;
  BinaryMask mask;
  Image<Scalar> weights;
  Scalar normalizer = 1;  // 1 / (original width * height)
};

template <typename Scalar>
TrainingExample<Scalar> prepare_example(const SpectralSample& s, double alpha, Index bin_size) {
  require_same_dims(s.guide, s.target, "prepare_example");
  require_same_dims(s.guide, s.distorted, "prepare_example");
  require_same_dims(s.guide, s.mask.values(), "prepare_example");
  TrainingExample<Scalar> ex;
  PadInfo info;
  std::tie(ex.guide, info) = pad_replicate<Scalar>(s.guide.cast<Scalar>(), bin_size);
  ex.target = pad_replicate<Scalar>(s.target.cast<Scalar>(), bin_size).first;
  ex.distorted = pad_replicate<Scalar>(s.distorted.cast<Scalar>(), bin_size).first;
  ex.mask = pad_mask(s.mask, bin_size);
  ex.weights = Image<Scalar>::Zero(info.padded_height(), info.padded_width());
  ex.weights.topLeftCorner(info.original_height, info.original_width) =
      Scalar(1) + Scalar(alpha - 1.0) * s.mask.values().cast<Scalar>();
  ex.normalizer = Scalar(1) / static_cast<Scalar>(info.original_width * info.original_height);
  return ex;
}

/// Raw affine output on the padded canvas.
template <typename Scalar>
Image<Scalar> predict(const DgnetParams<Scalar>& params, const TrainingExample<Scalar>& ex,
                      GridPair<Scalar>* grids_out = nullptr, ForwardTrace<Scalar>* trace = nullptr) {
  GridPair<Scalar> grids = forward_grids(params, ex.guide, ex.distorted, ex.mask, trace);
  Image<Scalar> out = apply_affine(slice(grids.slope, ex.guide), slice(grids.bias, ex.guide), ex.guide);
  if (grids_out) *grids_out = std::move(grids);
  return out;
}

template <typename Scalar>
Scalar example_loss(const DgnetParams<Scalar>& params, const TrainingExample<Scalar>& ex) {
  return (ex.weights * (predict(params, ex) - ex.target).abs()).sum() * ex.normalizer;
}

template <typename Scalar>
struct LossAndGradient {
  Scalar loss = 0;
  DgnetParams<Scalar> grads;
};

/// Exact reverse-mode gradient of the weighted L1 loss through the affine
/// map, both slices and every convolution. d|x|/dx at 0 is taken as 0.
template <typename Scalar>
LossAndGradient<Scalar> loss_and_gradient(const DgnetParams<Scalar>& params, const TrainingExample<Scalar>& ex) {
  ForwardTrace<Scalar> trace;
  GridPair<Scalar> grids;
  const Image<Scalar> out = predict(params, ex, &grids, &trace);
  const Image<Scalar> diff = out - ex.target;
  LossAndGradient<Scalar> r;
  r.loss = (ex.weights * diff.abs()).sum() * ex.normalizer;
  if (!std::isfinite(static_cast<double>(r.loss))) throw NumericError("loss_and_gradient: non-finite loss");

  const Image<Scalar> d_out = ex.weights * diff.sign() * ex.normalizer;
  const CoeffGrid<Scalar> g_slope = slice_backward(grids.slope, ex.guide, Image<Scalar>(d_out * ex.guide));
  const CoeffGrid<Scalar> g_bias = slice_backward(grids.bias, ex.guide, d_out);

  const Index d = params.config.luma_bins;
  typename FeatureMap<Scalar>::Matrix head_grad(2 * d, g_slope.data.cols());
  head_grad.topRows(d) = g_slope.data.matrix();
  head_grad.bottomRows(d) = g_bias.data.matrix();
  r.grads = network_backward(params, trace, std::move(head_grad));
  for (std::size_t i = 0; i < r.grads.layers.size(); ++i) {
    if (!r.grads.layers[i].weight.allFinite() || !r.grads.layers[i].bias.allFinite()) {
      throw NumericError("loss_and_gradient: non-finite gradient in layer " + std::to_string(i));
    }
  }
  return r;
}

/// One line of the training log.
struct EpochLog {
  int epoch = 0;
  double lr = 0.0;
  double mean_loss = 0.0;
  std::optional<double> holdout_psnr;  // masked-region PSNR, absent without holdout data
  std::int64_t steps = 0;              // optimizer steps taken so far
};

std::string format_epoch_log(const EpochLog& log);

struct FitResult {
  DgnetParams<float> params;
  std::vector<EpochLog> epochs;
  std::int64_t steps = 0;
};

struct FitOptions {
  std::filesystem::path checkpoint_dir;  // empty = no checkpoints, no resume
  std::ostream* log = nullptr;           // receives each epoch line
  bool resume = true;
};

/// Trains from scratch (or resumes from `checkpoint_dir/checkpoint.dgckpt`).
/// Epoch shuffles are seeded from (seed, epoch), so resumed runs continue the
/// uninterrupted trajectory exactly. Writes one checkpoint and one log line
/// per epoch.
FitResult fit(std::span<const SpectralSample> train, std::span<const SpectralSample> holdout,
              const DgnetConfig& config, const TrainHyper& hyper, const FitOptions& options = {});

/// Mean masked-region PSNR of the blended reconstructions.
double holdout_masked_psnr(const DgnetParams<float>& params, std::span<const SpectralSample> holdout);

}  // namespace specgrid

#endif  // SPECGRID_TRAINING_HPP

#ifndef SPECGRID_DGNET_HPP
#define SPECGRID_DGNET_HPP

#include <chrono>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "specgrid/conv.hpp"
#include "specgrid/grid.hpp"
#include "specgrid/image.hpp"

namespace specgrid {

/// Shape of the coefficient predictor.
struct DgnetConfig {
  Index bin_size = 16;
  Index luma_bins = 32;
  std::vector<Index> downscale_channels{32, 64, 128, 256};
  Index trunk_depth = 8;

  Index trunk_channels() const { return 8 * luma_bins; }
  Index head_channels() const { return 2 * luma_bins; }
  std::size_t layer_count() const { return downscale_channels.size() + static_cast<std::size_t>(trunk_depth) + 1; }

  /// Throws ArgumentError if the invariants do not hold.
  void validate() const {
    if (luma_bins < 1) throw ArgumentError("DgnetConfig: luma_bins must be >= 1");
    if (trunk_depth < 0) throw ArgumentError("DgnetConfig: trunk_depth must be >= 0");
    if (bin_size != (Index{1} << downscale_channels.size())) {
      throw ArgumentError("DgnetConfig: bin_size must equal 2^(number of downscale layers)");
    }
    for (Index c : downscale_channels)
      if (c < 1) throw ArgumentError("DgnetConfig: channel counts must be positive");
  }

  bool operator==(const DgnetConfig&) const = default;
};

template <typename Scalar>
struct DgnetParams {
  DgnetConfig config;
  std::vector<ConvLayer<Scalar>> layers;

  /// Same shapes, all zeros. Used for gradients and optimizer moments.
  DgnetParams zeros_like() const {
    DgnetParams out{config, layers};
    for (auto& l : out.layers) {
      l.weight.setZero();
      l.bias.setZero();
    }
    return out;
  }

  template <typename Other>
  DgnetParams<Other> cast() const {
    DgnetParams<Other> out{config, {}};
    for (const auto& l : layers) out.layers.push_back(l.template cast<Other>());
    return out;
  }

  Index parameter_count() const {
    Index n = 0;
    for (const auto& l : layers) n += l.weight.size() + l.bias.size();
    return n;
  }
};

/// Zero-initialised parameters with the layer chain implied by `config`:
/// stride-2 ReLU downscaling, stride-1 ReLU trunk, bias-free linear head.
template <typename Scalar = float>
DgnetParams<Scalar> zero_params(const DgnetConfig& config) {
  config.validate();
  DgnetParams<Scalar> p{config, {}};
  Index in = 3;
  for (Index c : config.downscale_channels) {
    p.layers.push_back(ConvLayer<Scalar>::Zero(in, c, 2, Activation::relu, true));
    in = c;
  }
  for (Index i = 0; i < config.trunk_depth; ++i) {
    p.layers.push_back(ConvLayer<Scalar>::Zero(in, config.trunk_channels(), 1, Activation::relu, true));
    in = config.trunk_channels();
  }
  p.layers.push_back(ConvLayer<Scalar>::Zero(in, config.head_channels(), 1, Activation::none, false));
  return p;
}

/// He-normal weights (variance 2 / (in * 9)), zero biases. Deterministic in `seed`.
template <typename Scalar = float>
DgnetParams<Scalar> init_params(const DgnetConfig& config, std::uint64_t seed) {
  DgnetParams<Scalar> p = zero_params<Scalar>(config);
  std::mt19937_64 rng(seed);
  for (auto& layer : p.layers) {
    std::normal_distribution<double> normal(0.0, std::sqrt(2.0 / static_cast<double>(layer.weight.cols())));
    for (Index i = 0; i < layer.weight.size(); ++i) layer.weight.data()[i] = static_cast<Scalar>(normal(rng));
  }
  return p;
}

/// Slope (A) and bias (B) grids.
template <typename Scalar>
struct GridPair {
  CoeffGrid<Scalar> slope;
  CoeffGrid<Scalar> bias;
};

/// Per-layer values kept from the forward pass for backpropagation.
template <typename Scalar>
struct ForwardTrace {
  std::vector<typename FeatureMap<Scalar>::Matrix> cols;
  std::vector<FeatureMap<Scalar>> outputs;
  std::vector<std::pair<Index, Index>> input_dims;  // (height, width) fed to each layer
};

/// Stacks [guide, distorted, mask] into a 3-channel network input.
template <typename Scalar>
FeatureMap<Scalar> network_input(const Image<Scalar>& guide, const Image<Scalar>& distorted, const BinaryMask& mask) {
  require_same_dims(guide, distorted, "network_input");
  require_same_dims(guide, mask.values(), "network_input");
  auto in = FeatureMap<Scalar>::Zero(3, guide.rows(), guide.cols());
  in.set_channel(0, guide);
  in.set_channel(1, distorted);
  in.set_channel(2, mask.values().template cast<Scalar>());
  return in;
}

/// Runs every layer. Fills `trace` when given.
template <typename Scalar>
FeatureMap<Scalar> run_network(const DgnetParams<Scalar>& params, FeatureMap<Scalar> x,
                               ForwardTrace<Scalar>* trace = nullptr) {
  for (const auto& layer : params.layers) {
    check_conv_input(x, layer);
    const Index ho = detail::conv_out_dim(x.height, layer.stride), wo = detail::conv_out_dim(x.width, layer.stride);
    auto cols = im2col(x, layer.stride);
    FeatureMap<Scalar> y = conv2d_from_cols(cols, layer, ho, wo);
    if (trace) {
      trace->input_dims.emplace_back(x.height, x.width);
      trace->cols.push_back(std::move(cols));
      trace->outputs.push_back(y);
    }
    x = std::move(y);
  }
  return x;
}

/// First `depth` channels are the slope grid, the remaining `depth` the bias grid.
template <typename Scalar>
GridPair<Scalar> split_grids(const FeatureMap<Scalar>& head, Index depth) {
  if (head.channels() != 2 * depth) throw ArgumentError("split_grids: head must have 2 * depth channels");
  GridPair<Scalar> g;
  g.slope = CoeffGrid<Scalar>{head.width, head.height, depth, head.data.topRows(depth).array()};
  g.bias = CoeffGrid<Scalar>{head.width, head.height, depth, head.data.bottomRows(depth).array()};
  return g;
}

template <typename Scalar>
void check_bin_aligned(const DgnetConfig& config, Index width, Index height, const char* what) {
  if (width < 1 || height < 1 || width % config.bin_size != 0 || height % config.bin_size != 0) {
    throw ArgumentError(std::string(what) + ": input " + std::to_string(width) + "x" + std::to_string(height) +
                        " is not a multiple of the bin size " + std::to_string(config.bin_size) + " (pad first)");
  }
}

/// Predicts both coefficient grids. Inputs must already be bin aligned.
template <typename Scalar>
GridPair<Scalar> forward_grids(const DgnetParams<Scalar>& params, const Image<Scalar>& guide,
                               const Image<Scalar>& distorted, const BinaryMask& mask,
                               ForwardTrace<Scalar>* trace = nullptr) {
  check_bin_aligned<Scalar>(params.config, guide.cols(), guide.rows(), "forward_grids");
  auto head = run_network(params, network_input(guide, distorted, mask), trace);
  return split_grids(head, params.config.luma_bins);
}

/// Backpropagates a head-output gradient (2d x cells) through all layers.
template <typename Scalar>
DgnetParams<Scalar> network_backward(const DgnetParams<Scalar>& params, const ForwardTrace<Scalar>& trace,
                                     typename FeatureMap<Scalar>::Matrix head_grad) {
  DgnetParams<Scalar> grads = params.zeros_like();
  auto upstream = std::move(head_grad);
  for (std::size_t i = params.layers.size(); i-- > 0;) {
    const auto [h, w] = trace.input_dims[i];
    auto dx = conv2d_backward(params.layers[i], trace.cols[i], trace.outputs[i], std::move(upstream), h, w,
                              grads.layers[i], i > 0);
    upstream = std::move(dx.data);
  }
  return grads;
}

/// Wall-clock split of one reconstruction.
struct StageTimes {
  double network_seconds = 0.0;
  double slice_seconds = 0.0;
};

template <typename Scalar>
struct Reconstruction {
  Image<Scalar> result;   // blended, clamped
  Image<Scalar> net_out;  // raw affine output, cropped
};

/// Full inference: pad, predict grids, slice with the guide, apply the affine
/// map, crop and blend into the observed pixels.
template <typename Scalar>
Reconstruction<Scalar> reconstruct(const DgnetParams<Scalar>& params, const Image<Scalar>& guide,
                                   const Image<Scalar>& distorted, const BinaryMask& mask,
                                   StageTimes* times = nullptr) {
  require_same_dims(guide, distorted, "reconstruct");
  require_same_dims(guide, mask.values(), "reconstruct");
  using Clock = std::chrono::steady_clock;
  const auto t0 = Clock::now();
  const Index bin = params.config.bin_size;
  auto [guide_p, info] = pad_replicate(guide, bin);
  auto distorted_p = pad_replicate(distorted, bin).first;
  BinaryMask mask_p = pad_mask(mask, bin);
  GridPair<Scalar> grids = forward_grids(params, guide_p, distorted_p, mask_p);
  const auto t1 = Clock::now();
  Image<Scalar> a = slice(grids.slope, guide_p);
  Image<Scalar> b = slice(grids.bias, guide_p);
  Reconstruction<Scalar> out;
  out.net_out = crop(apply_affine(a, b, guide_p), info);
  out.result = blend(distorted, mask, out.net_out);
  const auto t2 = Clock::now();
  if (times) {
    times->network_seconds = std::chrono::duration<double>(t1 - t0).count();
    times->slice_seconds = std::chrono::duration<double>(t2 - t1).count();
  }
  return out;
}

}  // namespace specgrid

#endif  // SPECGRID_DGNET_HPP

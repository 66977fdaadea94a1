#ifndef SPECGRID_CONV_HPP
#define SPECGRID_CONV_HPP

#include <string>

#include <Eigen/Core>

#include "specgrid/errors.hpp"
#include "specgrid/image.hpp"
#include "specgrid/parallel.hpp"

namespace specgrid {

using Eigen::Index;

/// Stack of equally sized channels. Column p of `data` holds pixel
/// p = y * width + x across all channels.
template <typename Scalar>
struct FeatureMap {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  Index height = 0;
  Index width = 0;
  Matrix data;

  Index channels() const { return data.rows(); }
  Index pixels() const { return height * width; }

  static FeatureMap Zero(Index channels, Index height, Index width) {
    return FeatureMap{height, width, Matrix::Zero(channels, height * width)};
  }

  void set_channel(Index c, const Image<Scalar>& plane) {
    data.row(c) = Eigen::Map<const Eigen::Matrix<Scalar, 1, Eigen::Dynamic>>(plane.data(), plane.size());
  }
  Image<Scalar> channel(Index c) const {
    Image<Scalar> out(height, width);
    Eigen::Map<Eigen::Matrix<Scalar, 1, Eigen::Dynamic>>(out.data(), out.size()) = data.row(c);
    return out;
  }
};

enum class Activation { relu, none };

/// 3x3 convolution layer with zero padding 1. `weight` is out x (in * 9),
/// each row ordered [in][ky][kx]. `bias` is empty for bias-free layers.
template <typename Scalar>
struct ConvLayer {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  int stride = 1;
  Activation activation = Activation::relu;
  Matrix weight;
  Vector bias;

  Index out_channels() const { return weight.rows(); }
  Index in_channels() const { return weight.cols() / 9; }
  bool has_bias() const { return bias.size() != 0; }

  static ConvLayer Zero(Index in, Index out, int stride, Activation act, bool with_bias) {
    return ConvLayer{stride, act, Matrix::Zero(out, in * 9), with_bias ? Vector::Zero(out) : Vector()};
  }

  template <typename Other>
  ConvLayer<Other> cast() const {
    return ConvLayer<Other>{stride, activation, weight.template cast<Other>(), bias.template cast<Other>()};
  }
};

namespace detail {

inline Index conv_out_dim(Index in, int stride) { return stride == 1 ? in : in / 2; }

}  // namespace detail

/// Unfolds 3x3 neighbourhoods into columns: (in * 9) x (out pixels).
template <typename Scalar>
typename FeatureMap<Scalar>::Matrix im2col(const FeatureMap<Scalar>& input, int stride) {
  const Index ho = detail::conv_out_dim(input.height, stride), wo = detail::conv_out_dim(input.width, stride);
  const Index cin = input.channels();
  typename FeatureMap<Scalar>::Matrix cols(cin * 9, ho * wo);
  parallel_for(0, ho * wo, [&](Index p) {
    const Index oy = p / wo, ox = p % wo;
    for (Index ky = 0; ky < 3; ++ky) {
      const Index iy = oy * stride + ky - 1;
      for (Index kx = 0; kx < 3; ++kx) {
        const Index ix = ox * stride + kx - 1;
        const Index k = ky * 3 + kx;
        if (iy < 0 || iy >= input.height || ix < 0 || ix >= input.width) {
          for (Index c = 0; c < cin; ++c) cols(c * 9 + k, p) = Scalar(0);
        } else {
          const Index q = iy * input.width + ix;
          for (Index c = 0; c < cin; ++c) cols(c * 9 + k, p) = input.data(c, q);
        }
      }
    }
  });
  return cols;
}

/// Adjoint of im2col: scatters column gradients back onto the input grid.
template <typename Scalar>
FeatureMap<Scalar> col2im(const typename FeatureMap<Scalar>::Matrix& cols, Index channels, Index height, Index width,
                          int stride) {
  const Index ho = detail::conv_out_dim(height, stride), wo = detail::conv_out_dim(width, stride);
  FeatureMap<Scalar> out = FeatureMap<Scalar>::Zero(channels, height, width);
  for (Index p = 0; p < ho * wo; ++p) {
    const Index oy = p / wo, ox = p % wo;
    for (Index ky = 0; ky < 3; ++ky) {
      const Index iy = oy * stride + ky - 1;
      if (iy < 0 || iy >= height) continue;
      for (Index kx = 0; kx < 3; ++kx) {
        const Index ix = ox * stride + kx - 1;
        if (ix < 0 || ix >= width) continue;
        const Index q = iy * width + ix, k = ky * 3 + kx;
        for (Index c = 0; c < channels; ++c) out.data(c, q) += cols(c * 9 + k, p);
      }
    }
  }
  return out;
}

template <typename Scalar>
void check_conv_input(const FeatureMap<Scalar>& input, const ConvLayer<Scalar>& layer) {
  if (input.channels() != layer.in_channels()) {
    throw ArgumentError("conv2d: input has " + std::to_string(input.channels()) + " channels, layer expects " +
                        std::to_string(layer.in_channels()));
  }
  if (layer.stride != 1 && layer.stride != 2) throw ArgumentError("conv2d: stride must be 1 or 2");
  if (layer.stride == 2 && (input.height % 2 != 0 || input.width % 2 != 0)) {
    throw ArgumentError("conv2d: stride-2 input must have even dimensions");
  }
}

/// Forward pass given precomputed columns; applies bias and activation.
template <typename Scalar>
FeatureMap<Scalar> conv2d_from_cols(const typename FeatureMap<Scalar>::Matrix& cols, const ConvLayer<Scalar>& layer,
                                    Index out_height, Index out_width) {
  FeatureMap<Scalar> out{out_height, out_width, layer.weight * cols};
  if (layer.has_bias()) out.data.colwise() += layer.bias;
  if (layer.activation == Activation::relu) out.data = out.data.cwiseMax(Scalar(0));
  return out;
}

/// Cross-correlation with zero padding 1. Stride 2 halves both dimensions.
template <typename Scalar>
FeatureMap<Scalar> conv2d(const FeatureMap<Scalar>& input, const ConvLayer<Scalar>& layer) {
  check_conv_input(input, layer);
  const auto cols = im2col(input, layer.stride);
  return conv2d_from_cols(cols, layer, detail::conv_out_dim(input.height, layer.stride),
                          detail::conv_out_dim(input.width, layer.stride));
}

/// Backward pass of one layer. `output` is the post-activation forward result,
/// `cols` the forward im2col matrix. Accumulates into `grad` and returns the
/// input gradient (skipped when `need_input_grad` is false).
template <typename Scalar>
FeatureMap<Scalar> conv2d_backward(const ConvLayer<Scalar>& layer, const typename FeatureMap<Scalar>::Matrix& cols,
                                   const FeatureMap<Scalar>& output, typename FeatureMap<Scalar>::Matrix upstream,
                                   Index in_height, Index in_width, ConvLayer<Scalar>& grad, bool need_input_grad) {
  if (layer.activation == Activation::relu) {
    upstream = (output.data.array() > Scalar(0)).select(upstream, Scalar(0));
  }
  grad.weight.noalias() += upstream * cols.transpose();
  if (layer.has_bias()) grad.bias += upstream.rowwise().sum();
  if (!need_input_grad) return {};
  typename FeatureMap<Scalar>::Matrix dcols = layer.weight.transpose() * upstream;
  return col2im<Scalar>(dcols, layer.in_channels(), in_height, in_width, layer.stride);
}

}  // namespace specgrid

#endif  // SPECGRID_CONV_HPP

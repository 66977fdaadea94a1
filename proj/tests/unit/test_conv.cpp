#include <doctest.h>

#include <random>

#include "specgrid/conv.hpp"
#include "support.hpp"

using namespace specgrid;
using specgrid::testing::random_image;

namespace {

FeatureMap<double> random_map(Index c, Index h, Index w, std::uint64_t seed) {
  FeatureMap<double> m = FeatureMap<double>::Zero(c, h, w);
  for (Index i = 0; i < c; ++i) m.set_channel(i, random_image<double>(w, h, seed + i, -1.0, 1.0));
  return m;
}

ConvLayer<double> random_layer(Index in, Index out, int stride, Activation act, bool bias, std::uint64_t seed) {
  auto l = ConvLayer<double>::Zero(in, out, stride, act, bias);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 0.5);
  for (Index i = 0; i < l.weight.size(); ++i) l.weight.data()[i] = n(rng);
  for (Index i = 0; i < l.bias.size(); ++i) l.bias.data()[i] = n(rng);
  return l;
}

}  // namespace

TEST_CASE("identity kernel reproduces the input") {
  auto layer = ConvLayer<float>::Zero(1, 1, 1, Activation::none, true);
  layer.weight(0, 4) = 1.0f;
  FeatureMap<float> in = FeatureMap<float>::Zero(1, 5, 7);
  in.set_channel(0, random_image(7, 5, 3));
  const auto out = conv2d(in, layer);
  CHECK(out.height == 5);
  CHECK(out.width == 7);
  CHECK(out.data == in.data);
}

TEST_CASE("zero weights with bias and relu give a constant") {
  auto layer = ConvLayer<float>::Zero(2, 3, 1, Activation::relu, true);
  layer.bias.setConstant(0.2f);
  FeatureMap<float> in = FeatureMap<float>::Zero(2, 4, 4);
  in.set_channel(0, random_image(4, 4, 1));
  CHECK((conv2d(in, layer).data.array() == 0.2f).all());
}

TEST_CASE("stride-2 cross-correlation against hand arithmetic") {
  // input 1..9 row-major, kernel [[1,0,2],[0,-1,0],[3,0,0.5]], zero padding 1
  auto layer = ConvLayer<double>::Zero(1, 1, 2, Activation::none, false);
  layer.weight.row(0) << 1, 0, 2, 0, -1, 0, 3, 0, 0.5;
  FeatureMap<double> in = FeatureMap<double>::Zero(1, 4, 4);
  Image<double> img = Image<double>::Zero(4, 4);
  img.topLeftCorner(3, 3) << 1, 2, 3, 4, 5, 6, 7, 8, 9;
  in.set_channel(0, img);
  const auto out = conv2d(in, layer);
  REQUIRE(out.height == 2);
  REQUIRE(out.width == 2);
  // Row 3 / column 3 of the 4x4 input are zero, so the result equals the
  // 3x3 case: [[1.5, 12], [3, -4]].
  const Image<double> o = out.channel(0);
  CHECK(o(0, 0) == 1.5);
  CHECK(o(0, 1) == 12.0);
  CHECK(o(1, 0) == 3.0);
  CHECK(o(1, 1) == -4.0);
}

TEST_CASE("conv2d argument checks") {
  auto layer = ConvLayer<float>::Zero(2, 1, 2, Activation::none, false);
  CHECK_THROWS_AS(conv2d(FeatureMap<float>::Zero(3, 4, 4), layer), ArgumentError);
  CHECK_THROWS_AS(conv2d(FeatureMap<float>::Zero(2, 5, 4), layer), ArgumentError);
}

TEST_CASE("conv2d_backward matches finite differences") {
  for (int stride : {1, 2}) {
    const auto layer = random_layer(3, 4, stride, Activation::none, true, 10 + stride);
    const auto in = random_map(3, 6, 8, 20);
    const auto out = conv2d(in, layer);
    const Eigen::MatrixXd up = random_map(4, out.height, out.width, 40).data;
    auto loss = [&](const ConvLayer<double>& l, const FeatureMap<double>& x) {
      return (conv2d(x, l).data.array() * up.array()).sum();
    };
    auto grad = ConvLayer<double>::Zero(3, 4, stride, Activation::none, true);
    const auto dx = conv2d_backward(layer, im2col(in, stride), out, up, in.height, in.width, grad, true);
    const double h = 1e-6;
    for (Index i = 0; i < layer.weight.size(); i += 5) {
      auto p = layer, m = layer;
      p.weight.data()[i] += h;
      m.weight.data()[i] -= h;
      CHECK(grad.weight.data()[i] == doctest::Approx((loss(p, in) - loss(m, in)) / (2 * h)).epsilon(1e-6));
    }
    for (Index i = 0; i < layer.bias.size(); ++i) {
      auto p = layer, m = layer;
      p.bias(i) += h;
      m.bias(i) -= h;
      CHECK(grad.bias(i) == doctest::Approx((loss(p, in) - loss(m, in)) / (2 * h)).epsilon(1e-6));
    }
    for (Index i = 0; i < in.data.size(); i += 7) {
      auto p = in, m = in;
      p.data.data()[i] += h;
      m.data.data()[i] -= h;
      CHECK(dx.data.data()[i] == doctest::Approx((loss(layer, p) - loss(layer, m)) / (2 * h)).epsilon(1e-6));
    }
  }
}

#include <doctest.h>

#include "specgrid/dgnet.hpp"
#include "specgrid/parallel.hpp"
#include "support.hpp"

using namespace specgrid;
using specgrid::testing::random_image;
using specgrid::testing::random_mask;

namespace {

DgnetConfig small_config() {
  DgnetConfig c;
  c.bin_size = 4;
  c.luma_bins = 2;
  c.downscale_channels = {4, 8};
  c.trunk_depth = 1;
  return c;
}

}  // namespace

TEST_CASE("config validation") {
  DgnetConfig c;
  CHECK_NOTHROW(c.validate());
  CHECK(c.trunk_channels() == 256);
  CHECK(c.head_channels() == 64);
  c.bin_size = 8;
  CHECK_THROWS_AS(c.validate(), ArgumentError);
  c = small_config();
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("default layer chain") {
  const auto p = zero_params(DgnetConfig{});
  REQUIRE(p.layers.size() == 13);
  const Index chain[] = {3, 32, 64, 128, 256, 256, 256, 256, 256, 256, 256, 256, 256, 64};
  for (std::size_t i = 0; i < p.layers.size(); ++i) {
    const auto& l = p.layers[i];
    CHECK(l.in_channels() == chain[i]);
    CHECK(l.out_channels() == chain[i + 1]);
    CHECK(l.stride == (i < 4 ? 2 : 1));
    CHECK((l.activation == Activation::relu) == (i + 1 < p.layers.size()));
    CHECK(l.has_bias() == (i + 1 < p.layers.size()));
  }
}

TEST_CASE("init_params is deterministic and He scaled") {
  const DgnetConfig c;
  const auto a = init_params(c, 42), b = init_params(c, 42), other = init_params(c, 43);
  for (std::size_t i = 0; i < a.layers.size(); ++i) {
    CHECK(a.layers[i].weight == b.layers[i].weight);
    CHECK(a.layers[i].bias == b.layers[i].bias);
    CHECK((a.layers[i].bias.array() == 0.0f).all());
  }
  CHECK(a.layers[0].weight != other.layers[0].weight);

  // pooled over seeds to get >= 10^4 first-layer samples
  double sum = 0, sq = 0;
  Index n = 0;
  for (std::uint64_t s = 0; s < 12; ++s) {
    const auto p = init_params(c, 1000 + s);
    const auto& w = p.layers[0].weight;
    sum += w.cast<double>().sum();
    sq += w.cast<double>().squaredNorm();
    n += w.size();
  }
  REQUIRE(n >= 10000);
  const double mean = sum / n, var = sq / n - mean * mean;
  CHECK(std::abs(var - 2.0 / 27.0) < 0.2 * 2.0 / 27.0);
}

TEST_CASE("forward_grids shapes") {
  const auto p = zero_params(DgnetConfig{});
  SUBCASE("256x256") {
    const auto img = random_image(256, 256, 1);
    const auto g = forward_grids(p, img, img, BinaryMask(256, 256));
    CHECK(g.slope.grid_width == 16);
    CHECK(g.slope.grid_height == 16);
    CHECK(g.slope.depth == 32);
    CHECK(g.bias.grid_width == 16);
    CHECK(g.bias.depth == 32);
    CHECK((g.slope.data == 0.0f).all());
    CHECK((g.bias.data == 0.0f).all());
  }
  SUBCASE("64x64 non-square grids follow the input") {
    const auto img = random_image(64, 32, 1);
    const auto g = forward_grids(p, img, img, BinaryMask(64, 32));
    CHECK(g.slope.grid_width == 4);
    CHECK(g.slope.grid_height == 2);
  }
  SUBCASE("unaligned input is rejected") {
    const auto img = random_image(65, 64, 1);
    CHECK_THROWS_AS(forward_grids(p, img, img, BinaryMask(65, 64)), ArgumentError);
  }
}

TEST_CASE("activation shape chain") {
  const auto p = init_params(small_config(), 3);
  const auto img = random_image(24, 16, 2);
  ForwardTrace<float> trace;
  run_network(p, network_input(img, img, random_mask(24, 16, 0.3, 1)), &trace);
  REQUIRE(trace.outputs.size() == 4);
  CHECK(trace.outputs[0].width == 12);
  CHECK(trace.outputs[0].height == 8);
  CHECK(trace.outputs[1].width == 6);
  CHECK(trace.outputs[1].height == 4);
  CHECK(trace.outputs[3].channels() == 4);
}

TEST_CASE("split_grids channel order") {
  FeatureMap<float> head = FeatureMap<float>::Zero(4, 1, 2);
  head.data << 1, 2, 3, 4, 5, 6, 7, 8;
  const auto g = split_grids(head, 2);
  CHECK(g.slope(1, 0, 0) == 2);
  CHECK(g.slope(0, 0, 1) == 3);
  CHECK(g.bias(0, 0, 0) == 5);
  CHECK(g.bias(1, 0, 1) == 8);
  CHECK_THROWS_AS(split_grids(head, 3), ArgumentError);
}

TEST_CASE("reconstruct") {
  const auto params = init_params(small_config(), 9);
  SUBCASE("empty mask leaves the distorted image untouched") {
    const auto g = random_image(20, 12, 1), d = random_image(20, 12, 2);
    CHECK((reconstruct(params, g, d, BinaryMask(20, 12)).result == d).all());
  }
  SUBCASE("zero params give a zero net_out") {
    const auto g = random_image(16, 16, 1), d = random_image(16, 16, 2);
    const auto m = random_mask(16, 16, 0.5, 3);
    const auto r = reconstruct(zero_params(small_config()), g, d, m);
    CHECK((r.net_out == 0.0f).all());
    CHECK((r.result == d * (1.0f - m.values())).all());
  }
  SUBCASE("odd size round trip") {
    const auto p = init_params(DgnetConfig{}, 1);
    const auto g = random_image(65, 63, 1), d = random_image(65, 63, 2);
    const auto m = random_mask(65, 63, 0.2, 3);
    const auto r = reconstruct(p, g, d, m);
    CHECK(r.result.cols() == 65);
    CHECK(r.result.rows() == 63);
    CHECK(r.net_out.cols() == 65);
    for (Index y = 0; y < 63; ++y)
      for (Index x = 0; x < 65; ++x)
        if (!m(y, x)) CHECK(r.result(y, x) == d(y, x));
  }
  SUBCASE("stable across thread counts") {
    const auto g = random_image(32, 32, 1), d = random_image(32, 32, 2);
    const auto m = random_mask(32, 32, 0.4, 3);
    const int before = thread_count();
    set_thread_count(1);
    const auto a = reconstruct(params, g, d, m);
    set_thread_count(4);
    const auto b = reconstruct(params, g, d, m);
    set_thread_count(before);
    CHECK((a.net_out - b.net_out).abs().maxCoeff() <= 1e-6f);
  }
}

#include <doctest.h>

#include "specgrid/grid.hpp"
#include "support.hpp"

using namespace specgrid;
using specgrid::testing::brute_force_slice;
using specgrid::testing::random_grid;
using specgrid::testing::random_image;
using specgrid::testing::random_mask;

TEST_CASE("hat kernel") {
  CHECK(hat(0.0) == 1.0);
  CHECK(hat(0.5) == 0.5);
  CHECK(hat(-0.5) == 0.5);
  CHECK(hat(2.0) == 0.0);
  CHECK(hat(-2.0) == 0.0);
  CHECK(hat(1.0f) == 0.0f);
}

TEST_CASE("constant grid slices to a constant image") {
  for (float c : {0.0f, 0.5f, 0.7f, 1.0f}) {
    const auto grid = CoeffGrid<float>::Constant(3, 2, 5, c);
    GrayImage guide = random_image(24, 16, 7);
    guide(0, 0) = 0.0f;
    guide(1, 1) = 1.0f;
    const GrayImage out = slice(grid, guide);
    CHECK((out - c).abs().maxCoeff() <= 1e-6f);
  }
}

TEST_CASE("z interpolation by hand: d=2, guide 0.75 lands on the top bin") {
  auto grid = CoeffGrid<float>::Zero(1, 1, 2);
  grid.data.row(1).setConstant(1.0f);
  GrayImage guide = GrayImage::Constant(4, 4, 0.75f);
  CHECK(slice(grid, guide)(2, 2) == doctest::Approx(1.0f));
  guide.setConstant(0.5f);  // c_z = 0.5 -> halfway
  CHECK(slice(grid, guide)(0, 0) == doctest::Approx(0.5f));
}

TEST_CASE("slice matches brute-force trilinear sum") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto grid = random_grid(2, 2, 2, seed);
    const GrayImage guide = random_image(32, 32, 100 + seed);
    const Image<double> oracle = brute_force_slice(grid, guide);
    CHECK((slice(grid, guide).cast<double>() - oracle).abs().maxCoeff() <= 1e-6);
  }
  const auto grid = random_grid(4, 3, 4, 77);
  const GrayImage guide = random_image(16, 12, 78, -0.2, 1.2);  // exercises intensity clamping
  CHECK((slice(grid, guide).cast<double>() - brute_force_slice(grid, guide)).abs().maxCoeff() <= 1e-6);
}

TEST_CASE("slice rejects guides that are not whole multiples of the grid") {
  const auto grid = random_grid(3, 3, 2, 1);
  CHECK_THROWS_AS(slice(grid, GrayImage(GrayImage::Zero(10, 9))), ArgumentError);
  CHECK_NOTHROW(slice(grid, GrayImage(GrayImage::Zero(9, 9))));
}

TEST_CASE("slice is linear in the grid") {
  const auto g1 = random_grid(4, 4, 3, 11), g2 = random_grid(4, 4, 3, 12);
  const GrayImage guide = random_image(16, 16, 13);
  auto combo = g1;
  combo.data = 0.3f * g1.data - 1.7f * g2.data;
  const GrayImage lhs = slice(combo, guide);
  const GrayImage rhs = 0.3f * slice(g1, guide) - 1.7f * slice(g2, guide);
  CHECK((lhs - rhs).abs().maxCoeff() <= 1e-5f);
}

TEST_CASE("output is monotone in guide intensity for a k-increasing grid") {
  auto grid = CoeffGrid<float>::Zero(2, 1, 6);
  for (Eigen::Index k = 0; k < 6; ++k) grid.data.row(k).setConstant(static_cast<float>(k * k) / 10.0f);
  GrayImage ramp(1, 256);
  for (int i = 0; i < 256; ++i) ramp(0, i) = static_cast<float>(i) / 255.0f;
  // guide varies along x but the grid is constant in x, y
  const GrayImage out = slice(grid, ramp);
  for (int i = 1; i < 256; ++i) CHECK(out(0, i) >= out(0, i - 1));
}

TEST_CASE("apply_affine") {
  const GrayImage guide = random_image(5, 4, 3);
  const GrayImage ones = GrayImage::Ones(4, 5), zeros = GrayImage::Zero(4, 5);
  CHECK((apply_affine(ones, zeros, guide) == guide).all());
  CHECK((apply_affine(zeros, GrayImage(GrayImage::Constant(4, 5, 0.3f)), guide) == 0.3f).all());
  GrayImage half = GrayImage::Constant(1, 1, 0.5f);
  CHECK(apply_affine(half, GrayImage(GrayImage::Constant(1, 1, 0.25f)), half)(0, 0) == 0.5f);
  CHECK_THROWS_AS(apply_affine(ones, zeros, GrayImage(GrayImage::Zero(3, 3))), ArgumentError);
}

TEST_CASE("blend keeps observed pixels and clamps") {
  const GrayImage distorted = random_image(6, 5, 1);
  const GrayImage net = random_image(6, 5, 2, -0.5, 1.5);
  CHECK((blend(distorted, BinaryMask(6, 5), net) == distorted).all());

  BinaryMask all(6, 5);
  for (Eigen::Index y = 0; y < 5; ++y)
    for (Eigen::Index x = 0; x < 6; ++x) all.set(y, x, true);
  CHECK((blend(distorted, all, net) == net.max(0.0f).min(1.0f)).all());

  BinaryMask one(6, 5);
  one.set(2, 3, true);
  const GrayImage out = blend(distorted, one, GrayImage(distorted + 0.25f));
  CHECK(((out != distorted).cast<int>().sum()) == 1);
  CHECK(out(2, 3) != distorted(2, 3));

  const BinaryMask m = random_mask(6, 5, 0.4, 9);
  const GrayImage once = blend(distorted, m, net);
  CHECK((blend(once, m, net) == once).all());
  CHECK_THROWS_AS(blend(distorted, BinaryMask(5, 5), net), ArgumentError);
}

TEST_CASE("slice_backward: zero upstream gives zero gradient") {
  const auto grid = random_grid(2, 2, 3, 1);
  const GrayImage guide = random_image(8, 8, 2);
  const auto g = slice_backward(grid, guide, GrayImage(GrayImage::Zero(8, 8)));
  CHECK((g.data == 0.0f).all());
}

TEST_CASE("slice_backward: one pixel touches at most 8 voxels and conserves mass") {
  const auto grid = random_grid(4, 4, 4, 5);
  const GrayImage guide = random_image(16, 16, 6);
  for (auto [y, x] : {std::pair{0, 0}, std::pair{7, 9}, std::pair{15, 15}, std::pair{3, 12}}) {
    GrayImage up = GrayImage::Zero(16, 16);
    up(y, x) = 2.5f;
    const auto g = slice_backward(grid, guide, up);
    CHECK((g.data != 0.0f).count() <= 8);
    CHECK(g.data.sum() == doctest::Approx(2.5f).epsilon(1e-6));
  }
}

TEST_CASE("slice_backward matches central finite differences (double)") {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const Eigen::Index gw = 2 + seed % 3, gh = 1 + seed % 4, d = 2 + seed;
    auto grid = random_grid<double>(gw, gh, d, seed);
    const Image<double> guide = random_image<double>(gw * 4, gh * 4, 50 + seed);
    const Image<double> up = random_image<double>(gw * 4, gh * 4, 80 + seed, -1.0, 1.0);
    const auto analytic = slice_backward(grid, guide, up);
    const double h = 1e-4;
    for (Eigen::Index i = 0; i < grid.data.size(); ++i) {
      auto plus = grid, minus = grid;
      plus.data.data()[i] += h;
      minus.data.data()[i] -= h;
      const double fd = ((slice(plus, guide) * up).sum() - (slice(minus, guide) * up).sum()) / (2 * h);
      const double a = analytic.data.data()[i];
      CHECK(std::abs(a - fd) <= 1e-4 * std::max(1.0, std::abs(fd)));
    }
  }
}

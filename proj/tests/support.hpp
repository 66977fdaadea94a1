// Shared fixtures for the unit and acceptance suites.
#ifndef SPECGRID_TESTS_SUPPORT_HPP
#define SPECGRID_TESTS_SUPPORT_HPP

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include "specgrid/augment.hpp"
#include "specgrid/grid.hpp"
#include "specgrid/image.hpp"

namespace specgrid::testing {

inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("specgrid_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

template <typename Scalar = float>
Image<Scalar> random_image(Eigen::Index w, Eigen::Index h, std::uint64_t seed, double lo = 0.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  Image<Scalar> img(h, w);
  for (Eigen::Index i = 0; i < img.size(); ++i) img.data()[i] = static_cast<Scalar>(u(rng));
  return img;
}

template <typename Scalar = float>
CoeffGrid<Scalar> random_grid(Eigen::Index gw, Eigen::Index gh, Eigen::Index d, std::uint64_t seed) {
  CoeffGrid<Scalar> g = CoeffGrid<Scalar>::Zero(gw, gh, d);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (Eigen::Index i = 0; i < g.data.size(); ++i) g.data.data()[i] = static_cast<Scalar>(u(rng));
  return g;
}

inline BinaryMask random_mask(Eigen::Index w, Eigen::Index h, double p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution b(p);
  BinaryMask m(w, h);
  for (Eigen::Index y = 0; y < h; ++y)
    for (Eigen::Index x = 0; x < w; ++x) m.set(y, x, b(rng));
  return m;
}

/// Direct evaluation of the trilinear slicing sum over every voxel, with
/// the bin-centred clamped coordinates. Test oracle only.
template <typename Scalar>
Image<double> brute_force_slice(const CoeffGrid<Scalar>& grid, const Image<Scalar>& guide) {
  const Eigen::Index w = guide.cols(), h = guide.rows();
  auto theta = [](double t) { return std::max(1.0 - std::abs(t), 0.0); };
  Image<double> out(h, w);
  for (Eigen::Index y = 0; y < h; ++y)
    for (Eigen::Index x = 0; x < w; ++x) {
      double cx = static_cast<double>(grid.grid_width) / w * (x + 0.5) - 0.5;
      double cy = static_cast<double>(grid.grid_height) / h * (y + 0.5) - 0.5;
      double g = std::min(std::max(static_cast<double>(guide(y, x)), 0.0), 1.0);
      double cz = static_cast<double>(grid.depth) * g - 0.5;
      cx = std::min(std::max(cx, 0.0), static_cast<double>(grid.grid_width - 1));
      cy = std::min(std::max(cy, 0.0), static_cast<double>(grid.grid_height - 1));
      cz = std::min(std::max(cz, 0.0), static_cast<double>(grid.depth - 1));
      double acc = 0.0;
      for (Eigen::Index k = 0; k < grid.depth; ++k)
        for (Eigen::Index j = 0; j < grid.grid_height; ++j)
          for (Eigen::Index i = 0; i < grid.grid_width; ++i)
            acc += theta(cx - i) * theta(cy - j) * theta(cz - k) * static_cast<double>(grid(i, j, k));
      out(y, x) = acc;
    }
  return out;
}

/// Procedural RGB scene: coloured discs and bars over a two-colour gradient.
inline RgbImage synthetic_rgb(Eigen::Index w, Eigen::Index h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  RgbImage img(w, h);
  double c0[3], c1[3];
  for (int c = 0; c < 3; ++c) {
    c0[c] = u(rng);
    c1[c] = u(rng);
  }
  for (Eigen::Index y = 0; y < h; ++y)
    for (Eigen::Index x = 0; x < w; ++x) {
      const double t = static_cast<double>(x + y) / static_cast<double>(w + h);
      for (int c = 0; c < 3; ++c) img.channels[c](y, x) = static_cast<float>((1 - t) * c0[c] + t * c1[c]);
    }
  const int shapes = 6 + static_cast<int>(u(rng) * 6);
  for (int s = 0; s < shapes; ++s) {
    double col[3] = {u(rng), u(rng), u(rng)};
    const double cx = u(rng) * w, cy = u(rng) * h;
    const double r = (0.08 + 0.2 * u(rng)) * std::min(w, h);
    const bool disc = u(rng) < 0.6;
    for (Eigen::Index y = 0; y < h; ++y)
      for (Eigen::Index x = 0; x < w; ++x) {
        const bool inside = disc ? (x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r
                                 : std::abs(x - cx) <= r && std::abs(y - cy) <= r / 3;
        if (inside)
          for (int c = 0; c < 3; ++c) img.channels[c](y, x) = static_cast<float>(col[c]);
      }
  }
  return img;
}

}  // namespace specgrid::testing

#endif  // SPECGRID_TESTS_SUPPORT_HPP

#include "specgrid/canny.hpp"

#include <cmath>
#include <vector>

namespace specgrid {
namespace {

float at_clamped(const GrayImage& img, Eigen::Index y, Eigen::Index x) {
  y = std::clamp<Eigen::Index>(y, 0, img.rows() - 1);
  x = std::clamp<Eigen::Index>(x, 0, img.cols() - 1);
  return img(y, x);
}

GrayImage gaussian5(const GrayImage& in) {
  constexpr double sigma = 1.4;
  double k[5], sum = 0.0;
  for (int i = 0; i < 5; ++i) {
    k[i] = std::exp(-((i - 2) * (i - 2)) / (2.0 * sigma * sigma));
    sum += k[i];
  }
  GrayImage tmp(in.rows(), in.cols()), out(in.rows(), in.cols());
  for (Eigen::Index y = 0; y < in.rows(); ++y)
    for (Eigen::Index x = 0; x < in.cols(); ++x) {
      double acc = 0.0;
      for (int i = 0; i < 5; ++i) acc += k[i] / sum * at_clamped(in, y, x + i - 2);
      tmp(y, x) = static_cast<float>(acc);
    }
  for (Eigen::Index y = 0; y < in.rows(); ++y)
    for (Eigen::Index x = 0; x < in.cols(); ++x) {
      double acc = 0.0;
      for (int i = 0; i < 5; ++i) acc += k[i] / sum * at_clamped(tmp, y + i - 2, x);
      out(y, x) = static_cast<float>(acc);
    }
  return out;
}

}  // namespace

CannyResult canny(const GrayImage& gray, double low, double high) {
  if (!(low >= 0.0 && low < high)) throw ArgumentError("canny: thresholds must satisfy 0 <= low < high");
  const Eigen::Index h = gray.rows(), w = gray.cols();
  const GrayImage s = gaussian5(gray);

  CannyResult r;
  r.gx = GrayImage::Zero(h, w);
  r.gy = GrayImage::Zero(h, w);
  for (Eigen::Index y = 0; y < h; ++y)
    for (Eigen::Index x = 0; x < w; ++x) {
      auto p = [&](int dy, int dx) { return at_clamped(s, y + dy, x + dx); };
      r.gx(y, x) = (p(-1, 1) + 2 * p(0, 1) + p(1, 1)) - (p(-1, -1) + 2 * p(0, -1) + p(1, -1));
      r.gy(y, x) = (p(1, -1) + 2 * p(1, 0) + p(1, 1)) - (p(-1, -1) + 2 * p(-1, 0) + p(-1, 1));
    }
  const GrayImage mag = (r.gx.square() + r.gy.square()).sqrt();

  // Non-maximum suppression along the quantised gradient direction.
  // Ties keep the first pixel of the pair so plateaus stay one pixel thick.
  enum : std::uint8_t { kNone = 0, kWeak = 1, kStrong = 2 };
  std::vector<std::uint8_t> cls(static_cast<std::size_t>(h * w), kNone);
  for (Eigen::Index y = 1; y + 1 < h; ++y)
    for (Eigen::Index x = 1; x + 1 < w; ++x) {
      const float m = mag(y, x);
      if (m < low) continue;
      double angle = std::atan2(r.gy(y, x), r.gx(y, x)) * 180.0 / M_PI;
      if (angle < 0) angle += 180.0;
      int dx, dy;
      if (angle < 22.5 || angle >= 157.5) {
        dx = 1, dy = 0;
      } else if (angle < 67.5) {
        dx = 1, dy = 1;
      } else if (angle < 112.5) {
        dx = 0, dy = 1;
      } else {
        dx = -1, dy = 1;
      }
      const float before = mag(y - dy, x - dx), after = mag(y + dy, x + dx);
      if (m > before && m >= after) cls[y * w + x] = m >= high ? kStrong : kWeak;
    }

  // Hysteresis: keep weak pixels 8-connected to a strong one.
  r.edges = BinaryMask(w, h);
  std::vector<Eigen::Index> stack;
  for (Eigen::Index i = 0; i < h * w; ++i)
    if (cls[i] == kStrong) stack.push_back(i);
  while (!stack.empty()) {
    const Eigen::Index i = stack.back();
    stack.pop_back();
    const Eigen::Index y = i / w, x = i % w;
    if (r.edges(y, x)) continue;
    r.edges.set(y, x, true);
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        const Eigen::Index ny = y + dy, nx = x + dx;
        if (ny < 0 || nx < 0 || ny >= h || nx >= w) continue;
        const Eigen::Index j = ny * w + nx;
        if (cls[j] != kNone && !r.edges(ny, nx)) stack.push_back(j);
      }
  }
  return r;
}

}  // namespace specgrid

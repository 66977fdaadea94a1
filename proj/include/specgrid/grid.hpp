#ifndef SPECGRID_GRID_HPP
#define SPECGRID_GRID_HPP

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "specgrid/image.hpp"
#include "specgrid/parallel.hpp"

namespace specgrid {

/// Low-resolution bilateral grid of scalar coefficients.
/// `data` has one row per luma bin z and one column per cell y * grid_width + x,
/// so the flat layout is [z][y][x].
template <typename Scalar>
struct CoeffGrid {
  using Storage = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  Eigen::Index grid_width = 0;
  Eigen::Index grid_height = 0;
  Eigen::Index depth = 0;
  Storage data;

  static CoeffGrid Constant(Eigen::Index gw, Eigen::Index gh, Eigen::Index d, Scalar value) {
    return CoeffGrid{gw, gh, d, Storage::Constant(d, gw * gh, value)};
  }
  static CoeffGrid Zero(Eigen::Index gw, Eigen::Index gh, Eigen::Index d) { return Constant(gw, gh, d, Scalar(0)); }

  Scalar& operator()(Eigen::Index x, Eigen::Index y, Eigen::Index z) { return data(z, y * grid_width + x); }
  Scalar operator()(Eigen::Index x, Eigen::Index y, Eigen::Index z) const { return data(z, y * grid_width + x); }
};

/// Linear interpolation kernel max(1 - |t|, 0).
template <typename Scalar>
Scalar hat(Scalar t) {
  using std::abs;
  return std::max(Scalar(1) - abs(t), Scalar(0));
}

/// Two-tap interpolation stencil along one grid axis.
template <typename Scalar>
struct AxisTap {
  Eigen::Index lo = 0;
  Eigen::Index hi = 0;
  Scalar w_lo = 1;
  Scalar w_hi = 0;
};

/// Bin-centred continuous coordinate, clamped to [0, size-1]. Clamping keeps
/// the two weights summing to one at borders and at full intensity.
template <typename Scalar>
AxisTap<Scalar> axis_tap(Scalar coord, Eigen::Index size) {
  const Scalar top = static_cast<Scalar>(size - 1);
  coord = std::clamp(coord, Scalar(0), top);
  AxisTap<Scalar> tap;
  tap.lo = std::min(static_cast<Eigen::Index>(std::floor(coord)), size - 1);
  tap.hi = std::min(tap.lo + 1, size - 1);
  tap.w_hi = coord - static_cast<Scalar>(tap.lo);
  tap.w_lo = Scalar(1) - tap.w_hi;
  return tap;
}

/// Spatial coordinate of pixel `p` on an axis with `cells` bins over `pixels` pixels.
template <typename Scalar>
Scalar spatial_coord(Eigen::Index p, Eigen::Index cells, Eigen::Index pixels) {
  const Scalar scale = static_cast<Scalar>(cells) / static_cast<Scalar>(pixels);
  return scale * (static_cast<Scalar>(p) + Scalar(0.5)) - Scalar(0.5);
}

/// Luma coordinate for a guide intensity (max intensity 1.0, so s_z = depth).
template <typename Scalar>
Scalar luma_coord(Scalar intensity, Eigen::Index depth) {
  const Scalar v = std::clamp(intensity, Scalar(0), Scalar(1));
  return static_cast<Scalar>(depth) * v - Scalar(0.5);
}

namespace detail {

template <typename Scalar>
void check_slice_dims(const CoeffGrid<Scalar>& grid, Eigen::Index width, Eigen::Index height, const char* what) {
  if (grid.grid_width < 1 || grid.grid_height < 1 || grid.depth < 1 ||
      grid.data.rows() != grid.depth || grid.data.cols() != grid.grid_width * grid.grid_height) {
    throw ArgumentError(std::string(what) + ": malformed grid");
  }
  if (width < 1 || height < 1 || width % grid.grid_width != 0 || height % grid.grid_height != 0) {
    throw ArgumentError(std::string(what) + ": guide " + std::to_string(width) + "x" + std::to_string(height) +
                        " is not a whole multiple of grid " + std::to_string(grid.grid_width) + "x" +
                        std::to_string(grid.grid_height));
  }
}

template <typename Scalar>
std::vector<AxisTap<Scalar>> spatial_taps(Eigen::Index cells, Eigen::Index pixels) {
  std::vector<AxisTap<Scalar>> taps(static_cast<std::size_t>(pixels));
  for (Eigen::Index p = 0; p < pixels; ++p) taps[p] = axis_tap(spatial_coord<Scalar>(p, cells, pixels), cells);
  return taps;
}

}  // namespace detail

/// Trilinear lookup of `grid` at every guide pixel, using the guide intensity
/// as the luma coordinate.
template <typename Scalar>
Image<Scalar> slice(const CoeffGrid<Scalar>& grid, const Image<Scalar>& guide) {
  const Eigen::Index w = guide.cols(), h = guide.rows();
  detail::check_slice_dims(grid, w, h, "slice");
  const auto tx = detail::spatial_taps<Scalar>(grid.grid_width, w);
  const auto ty = detail::spatial_taps<Scalar>(grid.grid_height, h);
  const Eigen::Index gw = grid.grid_width;

  Image<Scalar> out(h, w);
  parallel_for(0, h, [&](Eigen::Index y) {
    const AxisTap<Scalar>& ry = ty[y];
    for (Eigen::Index x = 0; x < w; ++x) {
      const AxisTap<Scalar>& rx = tx[x];
      const AxisTap<Scalar> rz = axis_tap(luma_coord(guide(y, x), grid.depth), grid.depth);
      auto plane = [&](Eigen::Index z) {
        const Scalar top = rx.w_lo * grid.data(z, ry.lo * gw + rx.lo) + rx.w_hi * grid.data(z, ry.lo * gw + rx.hi);
        const Scalar bottom = rx.w_lo * grid.data(z, ry.hi * gw + rx.lo) + rx.w_hi * grid.data(z, ry.hi * gw + rx.hi);
        return ry.w_lo * top + ry.w_hi * bottom;
      };
      out(y, x) = rz.w_lo * plane(rz.lo) + rz.w_hi * plane(rz.hi);
    }
  });
  return out;
}

/// Gradient of sum(upstream * slice(grid, guide)) with respect to the grid.
/// The guide is treated as a constant.
template <typename Scalar>
CoeffGrid<Scalar> slice_backward(const CoeffGrid<Scalar>& grid, const Image<Scalar>& guide,
                                 const Image<Scalar>& upstream) {
  const Eigen::Index w = guide.cols(), h = guide.rows();
  detail::check_slice_dims(grid, w, h, "slice_backward");
  require_same_dims(guide, upstream, "slice_backward");
  const auto tx = detail::spatial_taps<Scalar>(grid.grid_width, w);
  const auto ty = detail::spatial_taps<Scalar>(grid.grid_height, h);
  const Eigen::Index gw = grid.grid_width;

  CoeffGrid<Scalar> g = CoeffGrid<Scalar>::Zero(grid.grid_width, grid.grid_height, grid.depth);
  for (Eigen::Index y = 0; y < h; ++y) {
    const AxisTap<Scalar>& ry = ty[y];
    for (Eigen::Index x = 0; x < w; ++x) {
      const Scalar u = upstream(y, x);
      if (u == Scalar(0)) continue;
      const AxisTap<Scalar>& rx = tx[x];
      const AxisTap<Scalar> rz = axis_tap(luma_coord(guide(y, x), grid.depth), grid.depth);
      const Eigen::Index zs[2] = {rz.lo, rz.hi};
      const Scalar wz[2] = {rz.w_lo, rz.w_hi};
      const Eigen::Index ys[2] = {ry.lo, ry.hi};
      const Scalar wy[2] = {ry.w_lo, ry.w_hi};
      const Eigen::Index xs[2] = {rx.lo, rx.hi};
      const Scalar wx[2] = {rx.w_lo, rx.w_hi};
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
          for (int c = 0; c < 2; ++c) g.data(zs[a], ys[b] * gw + xs[c]) += wz[a] * wy[b] * wx[c] * u;
    }
  }
  return g;
}

/// a * guide + b, no clamping.
template <typename Scalar>
Image<Scalar> apply_affine(const Image<Scalar>& a, const Image<Scalar>& b, const Image<Scalar>& guide) {
  require_same_dims(a, guide, "apply_affine");
  require_same_dims(b, guide, "apply_affine");
  return a * guide + b;
}

/// Keeps observed pixels and takes `net_out` where the mask is set, clamped
/// to [0,1]. Observed pixels are copied, so they survive bit-exactly.
template <typename Scalar>
Image<Scalar> blend(const Image<Scalar>& distorted, const BinaryMask& mask, const Image<Scalar>& net_out) {
  require_same_dims(distorted, net_out, "blend");
  require_same_dims(distorted, mask.values(), "blend");
  Image<Scalar> out = (mask.values() != 0.0f).select(net_out, distorted);
  return out.max(Scalar(0)).min(Scalar(1)).unaryExpr([](Scalar v) { return v == v ? v : Scalar(0); });
}

}  // namespace specgrid

#endif  // SPECGRID_GRID_HPP

#include "specgrid/augment.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

namespace specgrid {
namespace {

double uniform(Rng& rng, const Range& r) {
  if (r.lo == r.hi) return r.lo;
  return std::uniform_real_distribution<double>(r.lo, r.hi)(rng);
}

int uniform_int(Rng& rng, const IntRange& r) { return std::uniform_int_distribution<int>(r.lo, r.hi)(rng); }

bool coin(Rng& rng) { return std::bernoulli_distribution(0.5)(rng); }

void check_range(const Range& r, const char* name) {
  if (!(r.lo <= r.hi)) throw ArgumentError(std::string("AugmentConfig: empty range ") + name);
}

void check_range(const IntRange& r, const char* name) {
  if (r.lo > r.hi) throw ArgumentError(std::string("AugmentConfig: empty range ") + name);
}

void check_dims(Eigen::Index w, Eigen::Index h, const char* what) {
  if (w < 1 || h < 1) throw ArgumentError(std::string(what) + ": empty canvas");
}

constexpr int kMaxAttempts = 64;

// Redraws until the masked fraction respects the family cap. Falls back to
// an empty mask if the cap is never met.
BinaryMask with_fraction_cap(Eigen::Index w, Eigen::Index h, double cap, const std::function<BinaryMask()>& draw) {
  for (int i = 0; i < kMaxAttempts; ++i) {
    BinaryMask m = draw();
    if (m.fraction() <= cap) return m;
  }
  return BinaryMask(w, h);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 finaliser over the combined words
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

void AugmentConfig::validate() const {
  check_range(hue_anchors, "hue_anchors");
  if (hue_anchors.lo < 1) throw ArgumentError("AugmentConfig: need at least one hue anchor");
  check_range(exposure, "exposure");
  if (!(exposure.lo > 0.0 && exposure.hi <= 10.0)) throw ArgumentError("AugmentConfig: exposure must lie in (0, 10]");
  check_range(noise_sigma, "noise_sigma");
  if (noise_sigma.lo < 0.0) throw ArgumentError("AugmentConfig: noise_sigma must be >= 0");
  check_range(stroke_count, "stroke_count");
  check_range(stroke_vertices, "stroke_vertices");
  if (stroke_vertices.lo < 2) throw ArgumentError("AugmentConfig: strokes need at least two vertices");
  check_range(stroke_step, "stroke_step");
  check_range(stroke_width, "stroke_width");
  check_range(pixel_probability, "pixel_probability");
  if (pixel_probability.lo < 0.0 || pixel_probability.hi > 1.0) {
    throw ArgumentError("AugmentConfig: pixel_probability must lie in [0, 1]");
  }
  check_range(block_count, "block_count");
  check_range(block_size, "block_size");
  if (block_size.lo < 0.0 || block_size.hi > 1.0) throw ArgumentError("AugmentConfig: block_size must lie in [0, 1]");
  if (border_max_fraction < 0.0 || border_max_fraction > 1.0) {
    throw ArgumentError("AugmentConfig: border_max_fraction must lie in [0, 1]");
  }
  check_range(edge_width, "edge_width");
  if (!(canny_low >= 0.0 && canny_low < canny_high)) throw ArgumentError("AugmentConfig: need 0 <= canny_low < canny_high");
}

std::string_view to_string(MaskFamily f) {
  switch (f) {
    case MaskFamily::stroke: return "stroke";
    case MaskFamily::pixel: return "pixel";
    case MaskFamily::block: return "block";
    case MaskFamily::border: return "border";
    case MaskFamily::edge: return "edge";
  }
  return "unknown";
}

double max_mask_fraction(MaskFamily family, const AugmentConfig& cfg) {
  switch (family) {
    case MaskFamily::stroke: return cfg.stroke_max_fraction;
    case MaskFamily::pixel: return cfg.pixel_probability.hi;
    case MaskFamily::block: return cfg.block_max_fraction;
    case MaskFamily::border: {
      const double keep = std::max(0.0, 1.0 - 2.0 * cfg.border_max_fraction);
      return 1.0 - keep * keep;
    }
    case MaskFamily::edge: return cfg.edge_max_fraction;
  }
  return 1.0;
}

Hsv rgb_to_hsv(double r, double g, double b) {
  const double mx = std::max({r, g, b}), mn = std::min({r, g, b});
  const double delta = mx - mn;
  Hsv out;
  out.v = mx;
  out.s = mx > 0.0 ? delta / mx : 0.0;
  if (delta <= 0.0) return out;
  double sector;
  if (mx == r) {
    sector = std::fmod((g - b) / delta, 6.0);
    if (sector < 0.0) sector += 6.0;
  } else if (mx == g) {
    sector = (b - r) / delta + 2.0;
  } else {
    sector = (r - g) / delta + 4.0;
  }
  out.h = sector / 6.0;
  if (out.h >= 1.0) out.h -= 1.0;
  return out;
}

double SpectralMapping::gray_of(const Hsv& c) const {
  double hue_gray = anchors.front().second;
  if (anchors.size() > 1) {
    // first anchor with hue > c.h; the interval wraps around the circle
    const auto it = std::upper_bound(anchors.begin(), anchors.end(), c.h,
                                     [](double h, const auto& a) { return h < a.first; });
    const auto& hi = it == anchors.end() ? anchors.front() : *it;
    const auto& lo = it == anchors.begin() ? anchors.back() : *(it - 1);
    double span = hi.first - lo.first;
    double offset = c.h - lo.first;
    if (span <= 0.0) span += 1.0;
    if (offset < 0.0) offset += 1.0;
    const double t = span > 0.0 ? offset / span : 0.0;
    hue_gray = (1.0 - t) * lo.second + t * hi.second;
  }
  return c.v * (c.s * hue_gray + (1.0 - c.s) * white_gray) + (1.0 - c.v) * black_gray;
}

SpectralMapping draw_mapping(Rng& rng, const AugmentConfig& cfg) {
  cfg.validate();
  SpectralMapping m;
  const int n = uniform_int(rng, cfg.hue_anchors);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < n; ++i) {
    const double hue = unit(rng);
    m.anchors.emplace_back(hue, unit(rng));
  }
  std::sort(m.anchors.begin(), m.anchors.end());
  m.white_gray = unit(rng);
  m.black_gray = unit(rng);
  m.exposure = uniform(rng, cfg.exposure);
  m.noise_sigma = uniform(rng, cfg.noise_sigma);
  return m;
}

GrayImage render_noiseless(const RgbImage& rgb, const SpectralMapping& m) {
  check_dims(rgb.width(), rgb.height(), "render_noiseless");
  Eigen::ArrayXXd raw(rgb.height(), rgb.width());
  for (Eigen::Index y = 0; y < rgb.height(); ++y)
    for (Eigen::Index x = 0; x < rgb.width(); ++x)
      raw(y, x) = m.gray_of(rgb_to_hsv(rgb.r()(y, x), rgb.g()(y, x), rgb.b()(y, x)));
  const double lo = raw.minCoeff(), hi = raw.maxCoeff();
  if (hi > lo) {
    raw = (raw - lo) / (hi - lo);
  } else {
    raw.setOnes();
  }
  return (raw * m.exposure).cast<float>();
}

GrayImage synth_spectral(const RgbImage& rgb, Rng& rng, const AugmentConfig& cfg) {
  const SpectralMapping m = draw_mapping(rng, cfg);
  GrayImage out = render_noiseless(rgb, m);
  if (m.noise_sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, m.noise_sigma);
    for (Eigen::Index i = 0; i < out.size(); ++i) out.data()[i] += static_cast<float>(noise(rng));
  }
  return out.max(0.0f).min(1.0f);
}

void draw_segment(BinaryMask& mask, double x0, double y0, double x1, double y1, double radius) {
  const Eigen::Index w = mask.width(), h = mask.height();
  const double r = std::max(radius, 0.0);
  const double dx = x1 - x0, dy = y1 - y0;
  const double len2 = dx * dx + dy * dy;
  const auto xmin = std::max<Eigen::Index>(0, static_cast<Eigen::Index>(std::floor(std::min(x0, x1) - r)));
  const auto xmax = std::min<Eigen::Index>(w - 1, static_cast<Eigen::Index>(std::ceil(std::max(x0, x1) + r)));
  const auto ymin = std::max<Eigen::Index>(0, static_cast<Eigen::Index>(std::floor(std::min(y0, y1) - r)));
  const auto ymax = std::min<Eigen::Index>(h - 1, static_cast<Eigen::Index>(std::ceil(std::max(y0, y1) + r)));
  for (Eigen::Index y = ymin; y <= ymax; ++y)
    for (Eigen::Index x = xmin; x <= xmax; ++x) {
      double t = len2 > 0.0 ? ((x - x0) * dx + (y - y0) * dy) / len2 : 0.0;
      t = std::clamp(t, 0.0, 1.0);
      const double ex = x0 + t * dx - x, ey = y0 + t * dy - y;
      if (ex * ex + ey * ey <= r * r + 1e-9) mask.set(y, x, true);
    }
  // DDA core line.
  const int steps = static_cast<int>(std::ceil(std::max(std::abs(dx), std::abs(dy))));
  for (int i = 0; i <= steps; ++i) {
    const double t = steps ? static_cast<double>(i) / steps : 0.0;
    const auto x = static_cast<Eigen::Index>(std::lround(x0 + t * dx));
    const auto y = static_cast<Eigen::Index>(std::lround(y0 + t * dy));
    if (x >= 0 && y >= 0 && x < w && y < h) mask.set(y, x, true);
  }
}

void fill_rect(BinaryMask& mask, const Rect& r) {
  const Eigen::Index x0 = std::max<Eigen::Index>(0, r.x), y0 = std::max<Eigen::Index>(0, r.y);
  const Eigen::Index x1 = std::min(mask.width(), r.x + r.width), y1 = std::min(mask.height(), r.y + r.height);
  for (Eigen::Index y = y0; y < y1; ++y)
    for (Eigen::Index x = x0; x < x1; ++x) mask.set(y, x, true);
}

BinaryMask border_mask(Eigen::Index width, Eigen::Index height, const BorderDepths& d) {
  check_dims(width, height, "border_mask");
  BinaryMask m(width, height);
  fill_rect(m, {0, 0, d.left, height});
  fill_rect(m, {0, 0, width, d.top});
  fill_rect(m, {width - d.right, 0, d.right, height});
  fill_rect(m, {0, height - d.bottom, width, d.bottom});
  return m;
}

BinaryMask gen_stroke_mask(Eigen::Index width, Eigen::Index height, Rng& rng, const AugmentConfig& cfg) {
  cfg.validate();
  check_dims(width, height, "gen_stroke_mask");
  const double min_dim = static_cast<double>(std::min(width, height));
  const double turn = cfg.stroke_turn_degrees * M_PI / 180.0;
  return with_fraction_cap(width, height, cfg.stroke_max_fraction, [&] {
    BinaryMask m(width, height);
    const int strokes = uniform_int(rng, cfg.stroke_count);
    for (int s = 0; s < strokes; ++s) {
      const int vertices = uniform_int(rng, cfg.stroke_vertices);
      const double radius = uniform(rng, cfg.stroke_width) / 2.0;
      double x = uniform(rng, {0.0, static_cast<double>(width - 1)});
      double y = uniform(rng, {0.0, static_cast<double>(height - 1)});
      double angle = uniform(rng, {0.0, 2.0 * M_PI});
      for (int v = 1; v < vertices; ++v) {
        angle += uniform(rng, {-turn, turn});
        const double step = uniform(rng, cfg.stroke_step) * min_dim;
        const double nx = std::clamp(x + step * std::cos(angle), 0.0, static_cast<double>(width - 1));
        const double ny = std::clamp(y + step * std::sin(angle), 0.0, static_cast<double>(height - 1));
        draw_segment(m, x, y, nx, ny, radius);
        x = nx;
        y = ny;
      }
    }
    return m;
  });
}

BinaryMask gen_pixel_mask(Eigen::Index width, Eigen::Index height, Rng& rng, const AugmentConfig& cfg) {
  cfg.validate();
  check_dims(width, height, "gen_pixel_mask");
  return with_fraction_cap(width, height, cfg.pixel_probability.hi, [&] {
    const double p = uniform(rng, cfg.pixel_probability);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    BinaryMask m(width, height);
    for (Eigen::Index y = 0; y < height; ++y)
      for (Eigen::Index x = 0; x < width; ++x) m.set(y, x, unit(rng) < p);
    return m;
  });
}

BinaryMask gen_block_mask(Eigen::Index width, Eigen::Index height, Rng& rng, const AugmentConfig& cfg) {
  cfg.validate();
  check_dims(width, height, "gen_block_mask");
  return with_fraction_cap(width, height, cfg.block_max_fraction, [&] {
    BinaryMask m(width, height);
    const int blocks = uniform_int(rng, cfg.block_count);
    for (int b = 0; b < blocks; ++b) {
      const auto bw = std::clamp<Eigen::Index>(std::lround(uniform(rng, cfg.block_size) * width), 1, width);
      const auto bh = std::clamp<Eigen::Index>(std::lround(uniform(rng, cfg.block_size) * height), 1, height);
      const auto x = static_cast<Eigen::Index>(uniform_int(rng, {0, static_cast<int>(width - bw)}));
      const auto y = static_cast<Eigen::Index>(uniform_int(rng, {0, static_cast<int>(height - bh)}));
      fill_rect(m, {x, y, bw, bh});
    }
    return m;
  });
}

BinaryMask gen_border_mask(Eigen::Index width, Eigen::Index height, Rng& rng, const AugmentConfig& cfg) {
  cfg.validate();
  check_dims(width, height, "gen_border_mask");
  const int max_w = static_cast<int>(std::floor(cfg.border_max_fraction * static_cast<double>(width)));
  const int max_h = static_cast<int>(std::floor(cfg.border_max_fraction * static_cast<double>(height)));
  BorderDepths d;
  Eigen::Index* sides[4] = {&d.left, &d.top, &d.right, &d.bottom};
  for (int i = 0; i < 4; ++i) {
    const bool horizontal_strip = i % 2 == 1;
    const int depth = uniform_int(rng, {0, horizontal_strip ? max_h : max_w});
    if (coin(rng)) *sides[i] = depth;
  }
  return border_mask(width, height, d);
}

BinaryMask grow_edges(const CannyResult& c, Rng& rng, const AugmentConfig& cfg) {
  cfg.validate();
  const Eigen::Index w = c.edges.width(), h = c.edges.height();
  // 8-connected components in raster order; one direction sign and one
  // length per component.
  std::vector<int> label(static_cast<std::size_t>(w * h), -1);
  std::vector<std::vector<Eigen::Index>> components;
  for (Eigen::Index i = 0; i < w * h; ++i) {
    if (!c.edges(i / w, i % w) || label[i] >= 0) continue;
    components.emplace_back();
    std::vector<Eigen::Index> stack{i};
    label[i] = static_cast<int>(components.size() - 1);
    while (!stack.empty()) {
      const Eigen::Index j = stack.back();
      stack.pop_back();
      components.back().push_back(j);
      const Eigen::Index y = j / w, x = j % w;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          const Eigen::Index ny = y + dy, nx = x + dx;
          if (ny < 0 || nx < 0 || ny >= h || nx >= w) continue;
          const Eigen::Index k = ny * w + nx;
          if (c.edges(ny, nx) && label[k] < 0) {
            label[k] = label[j];
            stack.push_back(k);
          }
        }
    }
  }
  for (auto& comp : components) std::sort(comp.begin(), comp.end());

  return with_fraction_cap(w, h, cfg.edge_max_fraction, [&] {
    BinaryMask m(w, h);
    for (const auto& comp : components) {
      const double sign = coin(rng) ? 1.0 : -1.0;
      const double length = uniform(rng, cfg.edge_width);
      for (Eigen::Index j : comp) {
        const Eigen::Index y = j / w, x = j % w;
        const double gx = c.gx(y, x), gy = c.gy(y, x);
        const double norm = std::hypot(gx, gy);
        if (norm <= 0.0) {
          m.set(y, x, true);
          continue;
        }
        const double ex = x + sign * length * gx / norm, ey = y + sign * length * gy / norm;
        draw_segment(m, static_cast<double>(x), static_cast<double>(y), ex, ey, 0.0);
      }
    }
    return m;
  });
}

BinaryMask gen_edge_mask(const RgbImage& rgb, Rng& rng, const AugmentConfig& cfg) {
  check_dims(rgb.width(), rgb.height(), "gen_edge_mask");
  return grow_edges(canny(rgb.luminance(), cfg.canny_low, cfg.canny_high), rng, cfg);
}

BinaryMask gen_mask(MaskFamily family, const RgbImage& rgb, Rng& rng, const AugmentConfig& cfg) {
  switch (family) {
    case MaskFamily::stroke: return gen_stroke_mask(rgb.width(), rgb.height(), rng, cfg);
    case MaskFamily::pixel: return gen_pixel_mask(rgb.width(), rgb.height(), rng, cfg);
    case MaskFamily::block: return gen_block_mask(rgb.width(), rgb.height(), rng, cfg);
    case MaskFamily::border: return gen_border_mask(rgb.width(), rgb.height(), rng, cfg);
    case MaskFamily::edge: return gen_edge_mask(rgb, rng, cfg);
  }
  throw ArgumentError("gen_mask: unknown family");
}

LabeledSample make_labeled_sample(const RgbImage& rgb, Rng& rng, const AugmentConfig& cfg) {
  LabeledSample out;
  out.sample.guide = synth_spectral(rgb, rng, cfg);
  out.sample.target = synth_spectral(rgb, rng, cfg);
  out.family = kMaskFamilies[static_cast<std::size_t>(uniform_int(rng, {0, 4}))];
  out.sample.mask = gen_mask(out.family, rgb, rng, cfg);
  out.sample.distorted = apply_occlusion(out.sample.target, out.sample.mask);
  return out;
}

SpectralSample make_sample(const RgbImage& rgb, Rng& rng, const AugmentConfig& cfg) {
  return make_labeled_sample(rgb, rng, cfg).sample;
}

}  // namespace specgrid

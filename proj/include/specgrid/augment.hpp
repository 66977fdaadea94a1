#ifndef SPECGRID_AUGMENT_HPP
#define SPECGRID_AUGMENT_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

#include "specgrid/canny.hpp"
#include "specgrid/image.hpp"
#include "specgrid/sample.hpp"

namespace specgrid {

using Rng = std::mt19937_64;

/// Independent stream for item `index` of a run seeded with `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

struct IntRange {
  int lo = 0;
  int hi = 0;
};

/// Knobs of the training-data synthesis. Lengths and widths are in pixels,
/// step and block sizes are fractions of the image dimensions.
struct AugmentConfig {
  IntRange hue_anchors{4, 12};
  Range exposure{0.2, 1.5};
  Range noise_sigma{0.0, 0.04};

  IntRange stroke_count{1, 4};
  IntRange stroke_vertices{4, 12};
  Range stroke_step{0.05, 0.20};  // of min(width, height)
  double stroke_turn_degrees = 60.0;
  Range stroke_width{2.0, 10.0};
  double stroke_max_fraction = 0.5;

  Range pixel_probability{0.05, 0.5};

  IntRange block_count{1, 5};
  Range block_size{0.05, 0.3};  // of the matching dimension
  double block_max_fraction = 0.5;

  double border_max_fraction = 0.25;  // strip depth cap, per border

  Range edge_width{2.0, 8.0};
  double edge_max_fraction = 0.5;
  double canny_low = 0.1;
  double canny_high = 0.2;

  void validate() const;
};

enum class MaskFamily { stroke, pixel, block, border, edge };
inline constexpr std::array<MaskFamily, 5> kMaskFamilies{MaskFamily::stroke, MaskFamily::pixel, MaskFamily::block,
                                                         MaskFamily::border, MaskFamily::edge};
std::string_view to_string(MaskFamily f);

/// Largest masked fraction a family may produce under `cfg`.
double max_mask_fraction(MaskFamily family, const AugmentConfig& cfg);

struct Hsv {
  double h = 0.0;  // fraction of a full turn, [0, 1)
  double s = 0.0;
  double v = 0.0;
};

/// Hexcone conversion. Achromatic pixels get hue 0.
Hsv rgb_to_hsv(double r, double g, double b);

/// Random hue-to-gray mapping plus photometric parameters for one rendition.
struct SpectralMapping {
  std::vector<std::pair<double, double>> anchors;  // (hue, gray), sorted by hue
  double white_gray = 1.0;
  double black_gray = 0.0;
  double exposure = 1.0;
  double noise_sigma = 0.0;

  /// Gray level of one HSV colour before normalisation: hue gray interpolated
  /// circularly between anchors, pulled to white_gray as saturation drops and
  /// to black_gray as value drops.
  double gray_of(const Hsv& c) const;
};

SpectralMapping draw_mapping(Rng& rng, const AugmentConfig& cfg);

/// Mapped, normalised and exposed image, without noise or clipping.
GrayImage render_noiseless(const RgbImage& rgb, const SpectralMapping& m);

/// Pseudo-spectral grayscale rendition of an RGB image, clipped to [0,1].
GrayImage synth_spectral(const RgbImage& rgb, Rng& rng, const AugmentConfig& cfg = {});

// --- mask rasterisation helpers -------------------------------------------

/// Marks every pixel centre within `radius` of segment (x0,y0)-(x1,y1)
/// (round caps) and, in addition, the DDA line so width-1 strokes stay
/// 8-connected.
void draw_segment(BinaryMask& mask, double x0, double y0, double x1, double y1, double radius);

struct Rect {
  Eigen::Index x = 0, y = 0, width = 0, height = 0;
};
void fill_rect(BinaryMask& mask, const Rect& r);

struct BorderDepths {
  Eigen::Index left = 0, top = 0, right = 0, bottom = 0;
};
BinaryMask border_mask(Eigen::Index width, Eigen::Index height, const BorderDepths& depths);

// --- mask generators --------------------------------------------------------

BinaryMask gen_stroke_mask(Eigen::Index width, Eigen::Index height, Rng& rng, const AugmentConfig& cfg);
BinaryMask gen_pixel_mask(Eigen::Index width, Eigen::Index height, Rng& rng, const AugmentConfig& cfg);
BinaryMask gen_block_mask(Eigen::Index width, Eigen::Index height, Rng& rng, const AugmentConfig& cfg);
BinaryMask gen_border_mask(Eigen::Index width, Eigen::Index height, Rng& rng, const AugmentConfig& cfg);
BinaryMask gen_edge_mask(const RgbImage& rgb, Rng& rng, const AugmentConfig& cfg);

/// Edge mask grown from precomputed Canny output.
BinaryMask grow_edges(const CannyResult& edges, Rng& rng, const AugmentConfig& cfg);

BinaryMask gen_mask(MaskFamily family, const RgbImage& rgb, Rng& rng, const AugmentConfig& cfg);

struct LabeledSample {
  SpectralSample sample;
  MaskFamily family = MaskFamily::stroke;
};

/// Two independent renditions (guide, target), one mask from a uniformly
/// chosen family, and the occluded target.
LabeledSample make_labeled_sample(const RgbImage& rgb, Rng& rng, const AugmentConfig& cfg = {});
SpectralSample make_sample(const RgbImage& rgb, Rng& rng, const AugmentConfig& cfg = {});

}  // namespace specgrid

#endif  // SPECGRID_AUGMENT_HPP

#ifndef SPECGRID_SAMPLE_HPP
#define SPECGRID_SAMPLE_HPP

#include "specgrid/image.hpp"

namespace specgrid {

/// One unit of training data. `distorted` equals `target` where the mask is 0
/// and white (1.0) where it is 1.
struct SpectralSample {
  GrayImage guide;
  GrayImage target;
  GrayImage distorted;
  BinaryMask mask;
};

inline constexpr float kMissingValue = 1.0f;

/// target with masked pixels set to white.
inline GrayImage apply_occlusion(const GrayImage& target, const BinaryMask& mask) {
  require_same_dims(target, mask.values(), "apply_occlusion");
  return (mask.values() != 0.0f).select(GrayImage::Constant(target.rows(), target.cols(), kMissingValue), target);
}

}  // namespace specgrid

#endif  // SPECGRID_SAMPLE_HPP

#include "specgrid/image.hpp"

namespace specgrid {

BinaryMask::BinaryMask(GrayImage values) : values_(std::move(values)) {
  if (!((values_ == 0.0f) || (values_ == 1.0f)).all()) {
    throw ArgumentError("BinaryMask: values must be exactly 0 or 1");
  }
}

BinaryMask BinaryMask::from_threshold(const GrayImage& values) {
  return BinaryMask(GrayImage((values >= 0.5f).cast<float>()));
}

double BinaryMask::fraction() const {
  if (values_.size() == 0) return 0.0;
  return static_cast<double>(count()) / static_cast<double>(values_.size());
}

GrayImage RgbImage::luminance() const {
  return 0.299f * channels[0] + 0.587f * channels[1] + 0.114f * channels[2];
}

BinaryMask pad_mask(const BinaryMask& mask, Eigen::Index bin_size) {
  return BinaryMask(pad_replicate(mask.values(), bin_size).first);
}

}  // namespace specgrid

#ifndef SPECGRID_IMAGE_HPP
#define SPECGRID_IMAGE_HPP

#include <array>
#include <string>

#include <Eigen/Core>

#include "specgrid/errors.hpp"

namespace specgrid {

/// Single-channel image, rows = height, cols = width, row-major storage.
/// Pixel (x, y) is `img(y, x)`.
template <typename Scalar>
using Image = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using GrayImage = Image<float>;

/// Per-pixel indicator of missing pixels: 1 = reconstruct, 0 = observed.
/// Values are guaranteed to be exactly 0 or 1.
class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(Eigen::Index width, Eigen::Index height) : values_(GrayImage::Zero(height, width)) {}

  /// Throws ArgumentError unless every entry is exactly 0 or 1.
  explicit BinaryMask(GrayImage values);

  /// Thresholds at 0.5; used when masks come back from 8-bit files.
  static BinaryMask from_threshold(const GrayImage& values);

  Eigen::Index width() const { return values_.cols(); }
  Eigen::Index height() const { return values_.rows(); }
  const GrayImage& values() const { return values_; }

  bool operator()(Eigen::Index y, Eigen::Index x) const { return values_(y, x) != 0.0f; }
  void set(Eigen::Index y, Eigen::Index x, bool on) { values_(y, x) = on ? 1.0f : 0.0f; }

  Eigen::Index count() const { return static_cast<Eigen::Index>(values_.sum()); }
  double fraction() const;

  bool operator==(const BinaryMask& other) const {
    return values_.rows() == other.values_.rows() && values_.cols() == other.values_.cols() &&
           (values_ == other.values_).all();
  }

 private:
  GrayImage values_;
};

/// Planar RGB image with channels in [0, 1].
struct RgbImage {
  std::array<GrayImage, 3> channels;

  RgbImage() = default;
  RgbImage(Eigen::Index width, Eigen::Index height) {
    for (auto& c : channels) c = GrayImage::Zero(height, width);
  }

  Eigen::Index width() const { return channels[0].cols(); }
  Eigen::Index height() const { return channels[0].rows(); }
  const GrayImage& r() const { return channels[0]; }
  const GrayImage& g() const { return channels[1]; }
  const GrayImage& b() const { return channels[2]; }

  /// 0.299 r + 0.587 g + 0.114 b
  GrayImage luminance() const;
};

/// Bookkeeping needed to undo pad_replicate. Padding is right/bottom only.
struct PadInfo {
  Eigen::Index original_width = 0;
  Eigen::Index original_height = 0;
  Eigen::Index pad_right = 0;
  Eigen::Index pad_bottom = 0;

  Eigen::Index padded_width() const { return original_width + pad_right; }
  Eigen::Index padded_height() const { return original_height + pad_bottom; }
};

inline Eigen::Index round_up(Eigen::Index value, Eigen::Index multiple) {
  return (value + multiple - 1) / multiple * multiple;
}

template <typename Derived>
void require_finite(const Eigen::ArrayBase<Derived>& a, const char* what) {
  if (!a.allFinite()) throw NumericError(std::string(what) + ": non-finite values");
}

template <typename A, typename B>
void require_same_dims(const Eigen::ArrayBase<A>& a, const Eigen::ArrayBase<B>& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ArgumentError(std::string(what) + ": dimension mismatch (" + std::to_string(a.cols()) + "x" +
                        std::to_string(a.rows()) + " vs " + std::to_string(b.cols()) + "x" +
                        std::to_string(b.rows()) + ")");
  }
}

/// Pads to the next multiple of `bin_size` on the right and bottom by
/// replicating the last column/row.
template <typename Scalar>
std::pair<Image<Scalar>, PadInfo> pad_replicate(const Image<Scalar>& image, Eigen::Index bin_size) {
  if (bin_size < 1) throw ArgumentError("pad_replicate: bin_size must be >= 1");
  if (image.size() == 0) throw ArgumentError("pad_replicate: empty image");
  const Eigen::Index w = image.cols(), h = image.rows();
  PadInfo info{w, h, round_up(w, bin_size) - w, round_up(h, bin_size) - h};
  Image<Scalar> out(info.padded_height(), info.padded_width());
  out.topLeftCorner(h, w) = image;
  for (Eigen::Index x = w; x < out.cols(); ++x) out.col(x).head(h) = image.col(w - 1);
  for (Eigen::Index y = h; y < out.rows(); ++y) out.row(y) = out.row(h - 1);
  return {std::move(out), info};
}

template <typename Scalar>
Image<Scalar> crop(const Image<Scalar>& image, const PadInfo& info) {
  if (image.cols() != info.padded_width() || image.rows() != info.padded_height() || info.pad_right < 0 ||
      info.pad_bottom < 0 || info.original_width < 1 || info.original_height < 1) {
    throw ArgumentError("crop: pad info inconsistent with image dimensions");
  }
  return image.topLeftCorner(info.original_height, info.original_width);
}

BinaryMask pad_mask(const BinaryMask& mask, Eigen::Index bin_size);

}  // namespace specgrid

#endif  // SPECGRID_IMAGE_HPP

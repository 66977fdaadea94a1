#ifndef SPECGRID_IO_HPP
#define SPECGRID_IO_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <variant>
#include <vector>

#include "specgrid/image.hpp"

namespace specgrid {

using LoadedImage = std::variant<GrayImage, RgbImage>;

/// Reads an 8- or 16-bit PNG, scaled to [0,1]. Gray (+alpha) yields a
/// GrayImage, everything else an RgbImage. Alpha is dropped.
LoadedImage load_png(const std::filesystem::path& path);

/// Like load_png but always returns one channel (RGB goes through luminance).
GrayImage load_gray_png(const std::filesystem::path& path);
RgbImage load_rgb_png(const std::filesystem::path& path);

/// Clamps to [0,1] and writes 8-bit, round-half-up.
void save_png(const std::filesystem::path& path, const GrayImage& image);
void save_png(const std::filesystem::path& path, const RgbImage& image);

inline std::uint8_t quantize_u8(float v) {
  const float c = v < 0.0f ? 0.0f : (v > 1.0f ? 1.0f : v);
  return static_cast<std::uint8_t>(static_cast<int>(c * 255.0f + 0.5f));
}

/// Multi-channel float32 tensor in the "SGF1" layout:
/// magic "SGF1", u32 LE channels, height, width, then f32 LE values,
/// channel-major then row-major.
struct RawTensor {
  std::uint32_t channels = 0;
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  std::vector<float> values;

  static RawTensor from_image(const GrayImage& image);
  GrayImage channel(std::uint32_t c) const;
};

void write_raw_f32(std::ostream& out, const RawTensor& tensor);
RawTensor read_raw_f32(std::istream& in);

void save_raw_f32(const std::filesystem::path& path, const RawTensor& tensor);
void save_raw_f32(const std::filesystem::path& path, const GrayImage& image);
RawTensor load_raw_f32_tensor(const std::filesystem::path& path);
/// Requires a single-channel file.
GrayImage load_raw_f32(const std::filesystem::path& path);

}  // namespace specgrid

#endif  // SPECGRID_IO_HPP

#include "specgrid/io.hpp"

#include <png.h>

#include <bit>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>

namespace specgrid {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw IoError("cannot open " + path.string());
  return f;
}

void png_error_handler(png_structp png, png_const_charp msg) {
  auto* buf = static_cast<std::string*>(png_get_error_ptr(png));
  if (buf) *buf = msg;
  png_longjmp(png, 1);
}

void png_warning_handler(png_structp, png_const_charp) {}

std::uint32_t to_le(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::big) return __builtin_bswap32(v);
  return v;
}

}  // namespace

LoadedImage load_png(const std::filesystem::path& path) {
  FilePtr file = open_file(path, "rb");
  png_byte sig[8];
  if (std::fread(sig, 1, 8, file.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    throw FormatError("not a PNG file: " + path.string());
  }

  std::string message;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &message, png_error_handler, png_warning_handler);
  if (!png) throw IoError("libpng init failed");
  png_infop info = png_create_info_struct(png);
  struct Guard {
    png_structp* p;
    png_infop* i;
    ~Guard() { png_destroy_read_struct(p, i, nullptr); }
  } guard{&png, &info};

  // Rows are owned outside the longjmp region so they are released on error.
  std::vector<std::vector<png_byte>> rows;
  png_uint_32 width = 0, height = 0;
  int bit_depth = 0, color_type = 0;

  if (setjmp(png_jmpbuf(png))) {
    throw FormatError("PNG decode failed for " + path.string() + ": " + message);
  }
  png_init_io(png, file.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  png_get_IHDR(png, info, &width, &height, &bit_depth, &color_type, nullptr, nullptr, nullptr);

  if (color_type == PNG_COLOR_TYPE_PALETTE) {
    png_set_palette_to_rgb(png);
    bit_depth = 8;
  } else if (bit_depth != 8 && bit_depth != 16) {
    throw FormatError("unsupported PNG bit depth " + std::to_string(bit_depth) + " in " + path.string());
  }
  if (bit_depth == 16) png_set_swap(png);
  png_set_strip_alpha(png);
  png_read_update_info(png, info);

  const std::size_t rowbytes = png_get_rowbytes(png, info);
  const int channels = png_get_channels(png, info);
  rows.assign(height, std::vector<png_byte>(rowbytes));
  std::vector<png_bytep> ptrs(height);
  for (png_uint_32 y = 0; y < height; ++y) ptrs[y] = rows[y].data();
  png_read_image(png, ptrs.data());
  png_read_end(png, nullptr);

  const bool wide = bit_depth == 16;
  const float scale = wide ? 1.0f / 65535.0f : 1.0f / 255.0f;
  auto sample = [&](png_uint_32 y, png_uint_32 x, int c) -> float {
    const std::size_t idx = static_cast<std::size_t>(x) * channels + c;
    if (wide) {
      std::uint16_t v;
      std::memcpy(&v, rows[y].data() + 2 * idx, 2);
      return static_cast<float>(v) * scale;
    }
    return static_cast<float>(rows[y][idx]) * scale;
  };

  if (channels == 1) {
    GrayImage out(height, width);
    for (png_uint_32 y = 0; y < height; ++y)
      for (png_uint_32 x = 0; x < width; ++x) out(y, x) = sample(y, x, 0);
    return out;
  }
  if (channels != 3) throw FormatError("unsupported PNG channel layout in " + path.string());
  RgbImage out(width, height);
  for (png_uint_32 y = 0; y < height; ++y)
    for (png_uint_32 x = 0; x < width; ++x)
      for (int c = 0; c < 3; ++c) out.channels[c](y, x) = sample(y, x, c);
  return out;
}

GrayImage load_gray_png(const std::filesystem::path& path) {
  LoadedImage img = load_png(path);
  if (auto* g = std::get_if<GrayImage>(&img)) return std::move(*g);
  return std::get<RgbImage>(img).luminance();
}

RgbImage load_rgb_png(const std::filesystem::path& path) {
  LoadedImage img = load_png(path);
  if (auto* rgb = std::get_if<RgbImage>(&img)) return std::move(*rgb);
  const GrayImage& g = std::get<GrayImage>(img);
  RgbImage out;
  out.channels = {g, g, g};
  return out;
}

namespace {

void write_png_rows(const std::filesystem::path& path, int width, int height, int color_type,
                    const std::vector<std::vector<png_byte>>& rows) {
  FilePtr file = open_file(path, "wb");
  std::string message;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &message, png_error_handler, png_warning_handler);
  if (!png) throw IoError("libpng init failed");
  png_infop info = png_create_info_struct(png);
  struct Guard {
    png_structp* p;
    png_infop* i;
    ~Guard() { png_destroy_write_struct(p, i); }
  } guard{&png, &info};
  std::vector<png_bytep> ptrs(rows.size());
  for (std::size_t y = 0; y < rows.size(); ++y) ptrs[y] = const_cast<png_bytep>(rows[y].data());

  if (setjmp(png_jmpbuf(png))) throw IoError("PNG encode failed for " + path.string() + ": " + message);
  png_init_io(png, file.get());
  png_set_IHDR(png, info, width, height, 8, color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, ptrs.data());
  png_write_end(png, nullptr);
}

}  // namespace

void save_png(const std::filesystem::path& path, const GrayImage& image) {
  if (image.size() == 0) throw ArgumentError("save_png: empty image");
  std::vector<std::vector<png_byte>> rows(image.rows(), std::vector<png_byte>(image.cols()));
  for (Eigen::Index y = 0; y < image.rows(); ++y)
    for (Eigen::Index x = 0; x < image.cols(); ++x) rows[y][x] = quantize_u8(image(y, x));
  write_png_rows(path, static_cast<int>(image.cols()), static_cast<int>(image.rows()), PNG_COLOR_TYPE_GRAY, rows);
}

void save_png(const std::filesystem::path& path, const RgbImage& image) {
  if (image.width() == 0 || image.height() == 0) throw ArgumentError("save_png: empty image");
  std::vector<std::vector<png_byte>> rows(image.height(), std::vector<png_byte>(3 * image.width()));
  for (Eigen::Index y = 0; y < image.height(); ++y)
    for (Eigen::Index x = 0; x < image.width(); ++x)
      for (int c = 0; c < 3; ++c) rows[y][3 * x + c] = quantize_u8(image.channels[c](y, x));
  write_png_rows(path, static_cast<int>(image.width()), static_cast<int>(image.height()), PNG_COLOR_TYPE_RGB, rows);
}

RawTensor RawTensor::from_image(const GrayImage& image) {
  RawTensor t;
  t.channels = 1;
  t.height = static_cast<std::uint32_t>(image.rows());
  t.width = static_cast<std::uint32_t>(image.cols());
  t.values.assign(image.data(), image.data() + image.size());
  return t;
}

GrayImage RawTensor::channel(std::uint32_t c) const {
  if (c >= channels) throw ArgumentError("RawTensor: channel out of range");
  const std::size_t plane = static_cast<std::size_t>(height) * width;
  return Eigen::Map<const GrayImage>(values.data() + c * plane, height, width);
}

void write_raw_f32(std::ostream& out, const RawTensor& t) {
  if (t.values.size() != static_cast<std::size_t>(t.channels) * t.height * t.width) {
    throw ArgumentError("write_raw_f32: value count does not match shape");
  }
  out.write("SGF1", 4);
  for (std::uint32_t v : {t.channels, t.height, t.width}) {
    const std::uint32_t le = to_le(v);
    out.write(reinterpret_cast<const char*>(&le), 4);
  }
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(t.values.data()), static_cast<std::streamsize>(t.values.size() * 4));
  } else {
    for (float f : t.values) {
      const std::uint32_t le = to_le(std::bit_cast<std::uint32_t>(f));
      out.write(reinterpret_cast<const char*>(&le), 4);
    }
  }
  if (!out) throw IoError("write_raw_f32: stream write failed");
}

RawTensor read_raw_f32(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4)) throw FormatError("SGF1: truncated header");
  if (std::memcmp(magic, "SGF1", 4) != 0) throw FormatError("SGF1: bad magic");
  std::uint32_t dims[3];
  for (auto& d : dims) {
    if (!in.read(reinterpret_cast<char*>(&d), 4)) throw FormatError("SGF1: truncated header");
    d = to_le(d);
  }
  RawTensor t{dims[0], dims[1], dims[2], {}};
  const std::uint64_t count = std::uint64_t{t.channels} * t.height * t.width;
  if (count > (std::uint64_t{1} << 32)) throw FormatError("SGF1: implausible tensor size");
  t.values.resize(count);
  for (auto& f : t.values) {
    std::uint32_t bits;
    if (!in.read(reinterpret_cast<char*>(&bits), 4)) throw FormatError("SGF1: truncated payload");
    f = std::bit_cast<float>(to_le(bits));
  }
  return t;
}

void save_raw_f32(const std::filesystem::path& path, const RawTensor& tensor) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string());
  write_raw_f32(out, tensor);
}

void save_raw_f32(const std::filesystem::path& path, const GrayImage& image) {
  save_raw_f32(path, RawTensor::from_image(image));
}

RawTensor load_raw_f32_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return read_raw_f32(in);
}

GrayImage load_raw_f32(const std::filesystem::path& path) {
  RawTensor t = load_raw_f32_tensor(path);
  if (t.channels != 1) throw FormatError("expected a single-channel SGF1 file: " + path.string());
  return t.channel(0);
}

}  // namespace specgrid

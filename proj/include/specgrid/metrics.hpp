#ifndef SPECGRID_METRICS_HPP
#define SPECGRID_METRICS_HPP

#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "specgrid/image.hpp"

namespace specgrid {

/// Value used in reports for identical images.
inline constexpr double kPsnrCap = 99.0;

/// 10 log10(peak^2 / MSE). Returns +infinity when the images are identical.
double psnr(const GrayImage& a, const GrayImage& b, double peak = 1.0);

/// PSNR restricted to pixels with mask == 1; nullopt when the mask is empty.
std::optional<double> masked_psnr(const GrayImage& a, const GrayImage& b, const BinaryMask& mask, double peak = 1.0);

inline double cap_psnr(double db) { return db > kPsnrCap ? kPsnrCap : db; }

/// Mean SSIM over the valid region of an 11x11 Gaussian window (sigma 1.5),
/// K1 = 0.01, K2 = 0.03, dynamic range 1. Both sides must be >= 11 pixels.
double ssim(const GrayImage& a, const GrayImage& b);

struct EvalPair {
  std::string name;
  GrayImage result;
  GrayImage truth;
  BinaryMask mask;
  std::optional<double> seconds;
};

struct ImageScores {
  std::string name;
  double psnr = 0.0;  // capped at kPsnrCap
  double ssim = 0.0;
  std::optional<double> masked_psnr;
  std::optional<double> seconds;
};

struct EvalReport {
  std::vector<ImageScores> images;
  double mean_psnr = 0.0;
  double mean_ssim = 0.0;
  std::optional<double> mean_masked_psnr;  // over images with a non-empty mask
  std::optional<double> mean_seconds;

  void write_table(std::ostream& out) const;
  void write_csv(std::ostream& out) const;
};

EvalReport evaluate(std::span<const EvalPair> pairs);

}  // namespace specgrid

#endif  // SPECGRID_METRICS_HPP

#include "specgrid/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace specgrid {
namespace {

using Plane = Eigen::ArrayXXd;

Plane to_double(const GrayImage& img) { return img.cast<double>(); }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string opt_fmt(const char* f, const std::optional<double>& v) { return v ? fmt(f, *v) : std::string("n/a"); }

double db_from_mse(double mse, double peak) {
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / mse);
}

// 'valid' filtering with a separable kernel.
Plane filter_valid(const Plane& in, const Eigen::VectorXd& k) {
  const Eigen::Index n = k.size();
  const Eigen::Index rows = in.rows() - n + 1, cols = in.cols() - n + 1;
  Plane horiz = Plane::Zero(in.rows(), cols);
  for (Eigen::Index i = 0; i < n; ++i) horiz += k(i) * in.middleCols(i, cols);
  Plane out = Plane::Zero(rows, cols);
  for (Eigen::Index i = 0; i < n; ++i) out += k(i) * horiz.middleRows(i, rows);
  return out;
}

Eigen::VectorXd gaussian_window(int size, double sigma) {
  Eigen::VectorXd k(size);
  const double c = (size - 1) / 2.0;
  for (int i = 0; i < size; ++i) k(i) = std::exp(-((i - c) * (i - c)) / (2.0 * sigma * sigma));
  return k / k.sum();
}

}  // namespace

double psnr(const GrayImage& a, const GrayImage& b, double peak) {
  require_same_dims(a, b, "psnr");
  if (a.size() == 0) throw ArgumentError("psnr: empty image");
  const double mse = (to_double(a) - to_double(b)).square().mean();
  return db_from_mse(mse, peak);
}

std::optional<double> masked_psnr(const GrayImage& a, const GrayImage& b, const BinaryMask& mask, double peak) {
  require_same_dims(a, b, "masked_psnr");
  require_same_dims(a, mask.values(), "masked_psnr");
  const Eigen::Index n = mask.count();
  if (n == 0) return std::nullopt;
  const double sse = ((to_double(a) - to_double(b)).square() * mask.values().cast<double>()).sum();
  return db_from_mse(sse / static_cast<double>(n), peak);
}

double ssim(const GrayImage& a, const GrayImage& b) {
  constexpr int kWindow = 11;
  require_same_dims(a, b, "ssim");
  if (a.rows() < kWindow || a.cols() < kWindow) throw ArgumentError("ssim: images must be at least 11x11");
  const double c1 = (0.01 * 1.0) * (0.01 * 1.0);
  const double c2 = (0.03 * 1.0) * (0.03 * 1.0);
  const Eigen::VectorXd k = gaussian_window(kWindow, 1.5);

  const Plane x = to_double(a), y = to_double(b);
  const Plane mx = filter_valid(x, k), my = filter_valid(y, k);
  const Plane sxx = filter_valid(x * x, k) - mx * mx;
  const Plane syy = filter_valid(y * y, k) - my * my;
  const Plane sxy = filter_valid(x * y, k) - mx * my;
  const Plane num = (2.0 * mx * my + c1) * (2.0 * sxy + c2);
  const Plane den = (mx * mx + my * my + c1) * (sxx + syy + c2);
  return (num / den).mean();
}

EvalReport evaluate(std::span<const EvalPair> pairs) {
  if (pairs.empty()) throw ArgumentError("evaluate: no image pairs");
  EvalReport r;
  double masked_sum = 0.0, seconds_sum = 0.0;
  int masked_n = 0, seconds_n = 0;
  for (const EvalPair& p : pairs) {
    ImageScores s;
    s.name = p.name;
    s.psnr = cap_psnr(psnr(p.result, p.truth));
    s.ssim = ssim(p.result, p.truth);
    if (auto m = masked_psnr(p.result, p.truth, p.mask)) s.masked_psnr = cap_psnr(*m);
    s.seconds = p.seconds;
    r.mean_psnr += s.psnr;
    r.mean_ssim += s.ssim;
    if (s.masked_psnr) {
      masked_sum += *s.masked_psnr;
      ++masked_n;
    }
    if (s.seconds) {
      seconds_sum += *s.seconds;
      ++seconds_n;
    }
    r.images.push_back(std::move(s));
  }
  const double n = static_cast<double>(r.images.size());
  r.mean_psnr /= n;
  r.mean_ssim /= n;
  if (masked_n) r.mean_masked_psnr = masked_sum / masked_n;
  if (seconds_n) r.mean_seconds = seconds_sum / seconds_n;
  return r;
}

void EvalReport::write_table(std::ostream& out) const {
  std::size_t width = 5;
  for (const auto& s : images) width = std::max(width, s.name.size());
  auto pad = [&](const std::string& s) { return s + std::string(width - s.size(), ' '); };
  char line[256];
  std::snprintf(line, sizeof line, "%s  %9s  %7s  %11s  %9s\n", pad("image").c_str(), "PSNR[dB]", "SSIM",
                "maskPSNR", "time[s]");
  out << line;
  out << std::string(width + 45, '-') << "\n";
  auto row = [&](const std::string& name, double p, double s, const std::optional<double>& m,
                 const std::optional<double>& t) {
    std::snprintf(line, sizeof line, "%s  %9.2f  %7.4f  %11s  %9s\n", pad(name).c_str(), p, s,
                  opt_fmt("%.2f", m).c_str(), opt_fmt("%.3f", t).c_str());
    out << line;
  };
  for (const auto& s : images) row(s.name, s.psnr, s.ssim, s.masked_psnr, s.seconds);
  out << std::string(width + 45, '-') << "\n";
  row("mean", mean_psnr, mean_ssim, mean_masked_psnr, mean_seconds);
}

void EvalReport::write_csv(std::ostream& out) const {
  out << "image,psnr_db,ssim,masked_psnr_db,seconds\n";
  auto row = [&](const std::string& name, double p, double s, const std::optional<double>& m,
                 const std::optional<double>& t) {
    out << name << "," << fmt("%.6f", p) << "," << fmt("%.6f", s) << "," << opt_fmt("%.6f", m) << ","
        << opt_fmt("%.6f", t) << "\n";
  };
  for (const auto& s : images) row(s.name, s.psnr, s.ssim, s.masked_psnr, s.seconds);
  row("mean", mean_psnr, mean_ssim, mean_masked_psnr, mean_seconds);
}

}  // namespace specgrid

#include "specgrid/corpus.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "specgrid/io.hpp"

namespace specgrid {

void write_manifest(const std::filesystem::path& path, const Manifest& m) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string());
  out << "# specgrid augment manifest\n";
  out << "# seed = " << m.seed << "\n";
  out << "# count = " << m.entries.size() << "\n";
  out << "# skipped = " << m.skipped << "\n";
  for (const auto& f : m.skipped_files) out << "# skipped_file = " << f << "\n";
  out << "index,name,source,seed,family,masked_fraction\n";
  for (const auto& e : m.entries) {
    char frac[32];
    std::snprintf(frac, sizeof frac, "%.6f", e.masked_fraction);
    out << e.index << "," << e.name << "," << e.source << "," << e.seed << "," << e.family << "," << frac << "\n";
  }
  if (!out) throw IoError("failed writing " + path.string());
}

Manifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  Manifest m;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find(" = ");
      if (eq == std::string::npos) continue;
      const std::string key = line.substr(2, eq - 2), value = line.substr(eq + 3);
      if (key == "seed") m.seed = std::stoull(value);
      if (key == "skipped") m.skipped = std::stoull(value);
      if (key == "skipped_file") m.skipped_files.push_back(value);
      continue;
    }
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 6) throw FormatError("manifest: malformed row '" + line + "'");
    try {
      m.entries.push_back({std::stoull(cells[0]), cells[1], cells[2], std::stoull(cells[3]), cells[4], std::stod(cells[5])});
    } catch (const std::logic_error&) {
      throw FormatError("manifest: malformed row '" + line + "'");
    }
  }
  return m;
}

void write_sample(const std::filesystem::path& dir, const std::string& stem, const SpectralSample& s) {
  save_png(dir / (stem + "_guide.png"), s.guide);
  save_png(dir / (stem + "_target.png"), s.target);
  save_png(dir / (stem + "_distorted.png"), s.distorted);
  save_png(dir / (stem + "_mask.png"), s.mask.values());
}

SpectralSample read_sample(const std::filesystem::path& dir, const std::string& stem) {
  SpectralSample s;
  s.guide = load_gray_png(dir / (stem + "_guide.png"));
  s.target = load_gray_png(dir / (stem + "_target.png"));
  s.distorted = load_gray_png(dir / (stem + "_distorted.png"));
  s.mask = BinaryMask::from_threshold(load_gray_png(dir / (stem + "_mask.png")));
  require_same_dims(s.guide, s.target, "read_sample");
  require_same_dims(s.guide, s.distorted, "read_sample");
  require_same_dims(s.guide, s.mask.values(), "read_sample");
  return s;
}

std::vector<SpectralSample> load_corpus(const std::filesystem::path& dir) {
  const Manifest m = read_manifest(dir / kManifestName);
  std::vector<SpectralSample> out;
  out.reserve(m.entries.size());
  for (const auto& e : m.entries) out.push_back(read_sample(dir, e.name));
  return out;
}

std::vector<std::filesystem::path> list_pngs(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::vector<std::filesystem::path> out;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".png") out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace specgrid

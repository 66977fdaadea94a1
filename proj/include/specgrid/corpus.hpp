#ifndef SPECGRID_CORPUS_HPP
#define SPECGRID_CORPUS_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "specgrid/sample.hpp"

namespace specgrid {

/// One row of an augmentation manifest.
struct ManifestEntry {
  std::size_t index = 0;
  std::string name;    // file stem shared by the four PNGs
  std::string source;  // input file the sample was drawn from
  std::uint64_t seed = 0;
  std::string family;
  double masked_fraction = 0.0;
};

/// `manifest.txt`: `# key = value` header lines (seed, count, skipped)
/// followed by a CSV table of entries.
struct Manifest {
  std::uint64_t seed = 0;
  std::size_t skipped = 0;
  std::vector<std::string> skipped_files;
  std::vector<ManifestEntry> entries;
};

inline constexpr const char* kManifestName = "manifest.txt";

void write_manifest(const std::filesystem::path& path, const Manifest& m);
Manifest read_manifest(const std::filesystem::path& path);

/// Writes `<stem>_guide.png`, `_target.png`, `_distorted.png`, `_mask.png`.
void write_sample(const std::filesystem::path& dir, const std::string& stem, const SpectralSample& s);
SpectralSample read_sample(const std::filesystem::path& dir, const std::string& stem);

/// Loads every sample listed in `dir/manifest.txt`.
std::vector<SpectralSample> load_corpus(const std::filesystem::path& dir);

/// Sorted `*.png` files directly inside `dir`.
std::vector<std::filesystem::path> list_pngs(const std::filesystem::path& dir);

}  // namespace specgrid

#endif  // SPECGRID_CORPUS_HPP

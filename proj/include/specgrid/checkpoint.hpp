#ifndef SPECGRID_CHECKPOINT_HPP
#define SPECGRID_CHECKPOINT_HPP

#include <cstdint>
#include <filesystem>
#include <optional>

#include "specgrid/dgnet.hpp"
#include "specgrid/optimizer.hpp"

namespace specgrid {

/// Contents of a "DGCKPT1" file.
///
/// Layout: the line `DGCKPT1`, config and state as `key = value` lines,
/// `blobs = N`, N index lines `name offset bytes`, the line `data`, then the
/// concatenated SGF1 blobs (offsets relative to the first byte after `data\n`).
/// Layer i stores `layer<i>.weight` (channels = out, height = in, width = 9)
/// and, if present, `layer<i>.bias` (1 x 1 x out). Optimizer moments use the
/// same names prefixed with `adam.m.` / `adam.v.`.
struct Checkpoint {
  DgnetParams<float> params;
  std::optional<AdamState<float>> adam;
  int epoch = 0;  // epochs completed
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace specgrid

#endif  // SPECGRID_CHECKPOINT_HPP

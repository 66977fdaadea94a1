#ifndef SPECGRID_RUN_CONFIG_HPP
#define SPECGRID_RUN_CONFIG_HPP

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "specgrid/augment.hpp"
#include "specgrid/dgnet.hpp"
#include "specgrid/optimizer.hpp"

namespace specgrid {

/// Settings of a run, read from `key = value` lines (`#` starts a comment)
/// with command-line `key=value` overrides applied on top.
struct RunConfig {
  std::filesystem::path corpus_dir;
  std::filesystem::path checkpoint_dir;
  std::size_t holdout_count = 0;
  int threads = 0;  // 0 = SPECGRID_THREADS or all cores
  bool resume = true;
  DgnetConfig net;
  TrainHyper hyper;
  AugmentConfig augment;

  /// Keys that were set explicitly.
  std::vector<std::string> keys_set;
  bool has(std::string_view key) const;
};

/// All accepted keys, sorted.
std::vector<std::string> run_config_keys();

/// Throws ArgumentError naming the offending key for unknown keys, malformed
/// lines or values, and inconsistent settings.
RunConfig parse_run_config(std::string_view text, std::span<const std::string> overrides = {});
RunConfig load_run_config(const std::filesystem::path& path, std::span<const std::string> overrides = {});

/// Explicit value if positive, else SPECGRID_THREADS, else hardware concurrency.
int resolve_thread_count(int requested);

}  // namespace specgrid

#endif  // SPECGRID_RUN_CONFIG_HPP

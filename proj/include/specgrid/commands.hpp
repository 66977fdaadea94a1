#ifndef SPECGRID_COMMANDS_HPP
#define SPECGRID_COMMANDS_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "specgrid/augment.hpp"
#include "specgrid/corpus.hpp"
#include "specgrid/metrics.hpp"
#include "specgrid/run_config.hpp"
#include "specgrid/training.hpp"

namespace specgrid {

/// Process exit codes of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitUsage = 2, kExitData = 3, kExitNumeric = 4 };

struct AugmentOptions {
  std::filesystem::path in_dir;
  std::filesystem::path out_dir;
  std::size_t count = 1;
  std::uint64_t seed = 0;
  int crop = 0;  // square random crop side; 0 keeps the full image
  AugmentConfig config;
};

/// Synthesises `count` samples from the PNGs in `in_dir`, cycling through the
/// decodable ones. Undecodable files are skipped and counted. Sample i only
/// depends on (seed, i), so the output does not depend on the thread count.
Manifest run_augment(const AugmentOptions& options, std::ostream& warnings);

/// Trains per the config; requires corpus_dir and checkpoint_dir. The last
/// `holdout_count` corpus samples are held out for the per-epoch PSNR.
FitResult run_train(const RunConfig& config, std::ostream& log);

struct InferOptions {
  std::filesystem::path checkpoint;
  std::filesystem::path guide;
  std::filesystem::path distorted;
  std::filesystem::path mask;
  std::filesystem::path out;
  bool debug_netout = false;  // also writes <out stem>_netout.png
};

void run_infer(const InferOptions& options);

struct EvalOutcome {
  std::optional<EvalReport> report;
  std::vector<std::string> unmatched;  // basenames missing a partner
};

/// Pairs files across the three directories by basename.
EvalOutcome run_eval(const std::filesystem::path& result_dir, const std::filesystem::path& truth_dir,
                     const std::filesystem::path& mask_dir);

struct BenchOptions {
  std::optional<std::filesystem::path> checkpoint;  // default: seeded init of the default config
  std::vector<int> sizes{512, 1024};
  int threads = 1;  // N in the {1, N} sweep
  int repeats = 3;
  std::uint64_t seed = 0;
};

struct BenchRow {
  int size = 0;
  int threads = 1;
  std::vector<double> runs;  // total seconds per repeat
  double best_seconds = 0.0;
  StageTimes best_stages;  // breakdown of the best run
  double pixels_per_second = 0.0;
};

struct BenchReport {
  std::vector<BenchRow> rows;
  void write(std::ostream& out) const;
};

/// Times `reconstruct` on synthetic size x size inputs, best of `repeats`,
/// for thread counts 1 and `threads`.
BenchReport run_bench(const BenchOptions& options);

}  // namespace specgrid

#endif  // SPECGRID_COMMANDS_HPP

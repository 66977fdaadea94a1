// Command-line front end: augment, train, infer, eval, bench.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "specgrid/commands.hpp"

using namespace specgrid;

namespace {

int fail(int code, const std::string& message) {
  std::cerr << "specgrid: " << message << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Guided cross-spectral reconstruction with a learned bilateral grid"};
  app.require_subcommand(1);

  AugmentOptions aug;
  std::string aug_config;
  int aug_threads = 0;
  auto* augment = app.add_subcommand("augment", "Synthesise training samples from a directory of RGB PNGs");
  augment->add_option("--in", aug.in_dir, "Input directory with RGB PNGs")->required();
  augment->add_option("--out", aug.out_dir, "Output directory")->required();
  augment->add_option("--count", aug.count, "Number of samples")->default_val(1);
  augment->add_option("--seed", aug.seed, "Base seed")->default_val(0);
  augment->add_option("--crop", aug.crop, "Random square crop side (0 = full image)")->default_val(0);
  augment->add_option("--config", aug_config, "Config file (augment.* keys)");
  augment->add_option("--threads", aug_threads, "Worker threads (default SPECGRID_THREADS or all cores)");

  std::string train_config;
  std::vector<std::string> train_overrides;
  auto* train = app.add_subcommand("train", "Train the coefficient predictor");
  train->add_option("--config", train_config, "Config file with key = value lines")->required();
  train->add_option("--set", train_overrides, "Override a config key, key=value (repeatable)");

  InferOptions inf;
  auto* infer = app.add_subcommand("infer", "Reconstruct one channel");
  infer->add_option("--checkpoint", inf.checkpoint, "DGCKPT1 checkpoint")->required();
  infer->add_option("--guide", inf.guide, "Guide PNG")->required();
  infer->add_option("--distorted", inf.distorted, "Distorted channel PNG")->required();
  infer->add_option("--mask", inf.mask, "Mask PNG (white = reconstruct)")->required();
  infer->add_option("--out", inf.out, "Output PNG")->required();
  infer->add_flag("--debug-netout", inf.debug_netout, "Also write the raw network output");

  std::filesystem::path eval_results, eval_truth, eval_masks, eval_out;
  auto* eval = app.add_subcommand("eval", "PSNR/SSIM of reconstructions against ground truth");
  eval->add_option("--results", eval_results, "Directory of reconstructions")->required();
  eval->add_option("--truth", eval_truth, "Directory of ground truth images")->required();
  eval->add_option("--masks", eval_masks, "Directory of masks")->required();
  eval->add_option("--out", eval_out, "Directory for report.txt and report.csv");

  BenchOptions bench_opt;
  std::string bench_checkpoint;
  std::filesystem::path bench_out;
  int bench_threads = 0;
  auto* bench = app.add_subcommand("bench", "Time reconstruction on synthetic inputs");
  bench->add_option("--checkpoint", bench_checkpoint, "Checkpoint (default: seeded random weights)");
  bench->add_option("--sizes", bench_opt.sizes, "Square input sizes")->delimiter(',');
  bench->add_option("--threads", bench_threads, "N for the {1, N} thread sweep");
  bench->add_option("--repeats", bench_opt.repeats, "Runs per setting")->default_val(3);
  bench->add_option("--out", bench_out, "Directory for bench.txt");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*augment) {
      if (!aug_config.empty()) aug.config = load_run_config(aug_config).augment;
      set_thread_count(resolve_thread_count(aug_threads));
      const Manifest m = run_augment(aug, std::cerr);
      std::cout << "wrote " << m.entries.size() << " samples to " << aug.out_dir.string() << " (skipped "
                << m.skipped << " inputs)\n";
    } else if (*train) {
      const RunConfig cfg = load_run_config(train_config, train_overrides);
      std::cout << "# epoch, lr, mean_loss, holdout_psnr\n";
      const FitResult r = run_train(cfg, std::cout);
      std::cout << "done: " << r.steps << " steps, checkpoint in " << cfg.checkpoint_dir.string() << "\n";
    } else if (*infer) {
      run_infer(inf);
    } else if (*eval) {
      const EvalOutcome out = run_eval(eval_results, eval_truth, eval_masks);
      if (!out.unmatched.empty()) {
        std::cerr << "specgrid: unmatched files:\n";
        for (const auto& n : out.unmatched) std::cerr << "  " << n << "\n";
        return kExitData;
      }
      out.report->write_table(std::cout);
      if (!eval_out.empty()) {
        std::filesystem::create_directories(eval_out);
        std::ofstream table(eval_out / "report.txt"), csv(eval_out / "report.csv");
        out.report->write_table(table);
        out.report->write_csv(csv);
      }
    } else if (*bench) {
      if (!bench_checkpoint.empty()) bench_opt.checkpoint = bench_checkpoint;
      bench_opt.threads = resolve_thread_count(bench_threads);
      const BenchReport report = run_bench(bench_opt);
      report.write(std::cout);
      if (!bench_out.empty()) {
        std::filesystem::create_directories(bench_out);
        std::ofstream f(bench_out / "bench.txt");
        report.write(f);
      }
    }
  } catch (const ArgumentError& e) {
    return fail(kExitUsage, e.what());
  } catch (const IoError& e) {
    return fail(kExitUsage, e.what());
  } catch (const FormatError& e) {
    return fail(kExitData, e.what());
  } catch (const NumericError& e) {
    return fail(kExitNumeric, e.what());
  } catch (const std::exception& e) {
    return fail(kExitNumeric, std::string("internal error: ") + e.what());
  }
  return kExitOk;
}

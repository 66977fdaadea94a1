#include "specgrid/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <ostream>
#include <set>

#include "specgrid/checkpoint.hpp"
#include "specgrid/io.hpp"

namespace specgrid {
namespace {

RgbImage random_crop(const RgbImage& rgb, int side, Rng& rng) {
  if (side <= 0 || (rgb.width() <= side && rgb.height() <= side)) return rgb;
  const Eigen::Index w = std::min<Eigen::Index>(side, rgb.width()), h = std::min<Eigen::Index>(side, rgb.height());
  const auto x = std::uniform_int_distribution<Eigen::Index>(0, rgb.width() - w)(rng);
  const auto y = std::uniform_int_distribution<Eigen::Index>(0, rgb.height() - h)(rng);
  RgbImage out;
  for (int c = 0; c < 3; ++c) out.channels[c] = rgb.channels[c].block(y, x, h, w);
  return out;
}

std::string sample_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "sample_%05zu", i);
  return buf;
}

}  // namespace

Manifest run_augment(const AugmentOptions& opt, std::ostream& warnings) {
  opt.config.validate();
  if (opt.out_dir.empty()) throw ArgumentError("augment: output directory required");
  if (opt.count < 1) throw ArgumentError("augment: count must be >= 1");
  const auto files = list_pngs(opt.in_dir);
  if (files.empty()) throw ArgumentError("augment: no PNG files in " + opt.in_dir.string());

  Manifest manifest;
  manifest.seed = opt.seed;
  std::vector<std::pair<std::string, RgbImage>> images;
  for (const auto& f : files) {
    try {
      images.emplace_back(f.filename().string(), load_rgb_png(f));
    } catch (const std::exception& e) {
      warnings << "warning: skipping " << f.string() << ": " << e.what() << "\n";
      ++manifest.skipped;
      manifest.skipped_files.push_back(f.filename().string());
    }
  }
  if (images.empty()) throw ArgumentError("augment: no decodable PNG files in " + opt.in_dir.string());
  std::filesystem::create_directories(opt.out_dir);

  manifest.entries.resize(opt.count);
  std::vector<std::exception_ptr> errors(opt.count);
  parallel_for(0, static_cast<Index>(opt.count), [&](Index i) {
    try {
      const std::uint64_t seed = derive_seed(opt.seed, static_cast<std::uint64_t>(i));
      Rng rng(seed);
      const auto& [source, rgb] = images[static_cast<std::size_t>(i) % images.size()];
      const RgbImage patch = random_crop(rgb, opt.crop, rng);
      LabeledSample s = make_labeled_sample(patch, rng, opt.config);
      const std::string name = sample_name(static_cast<std::size_t>(i));
      write_sample(opt.out_dir, name, s.sample);
      manifest.entries[i] = {static_cast<std::size_t>(i), name, source, seed, std::string(to_string(s.family)),
                             s.sample.mask.fraction()};
    } catch (...) {
      errors[i] = std::current_exception();
    }
  });
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  write_manifest(opt.out_dir / kManifestName, manifest);
  return manifest;
}

FitResult run_train(const RunConfig& cfg, std::ostream& log) {
  if (cfg.corpus_dir.empty()) throw ArgumentError("train: missing required key 'corpus_dir'");
  if (cfg.checkpoint_dir.empty()) throw ArgumentError("train: missing required key 'checkpoint_dir'");
  set_thread_count(resolve_thread_count(cfg.threads));
  std::vector<SpectralSample> corpus = load_corpus(cfg.corpus_dir);
  if (cfg.holdout_count >= corpus.size()) {
    throw ArgumentError("train: holdout_count must leave at least one training sample");
  }
  const std::size_t n_train = corpus.size() - cfg.holdout_count;
  std::span<const SpectralSample> all(corpus);
  FitOptions options;
  options.checkpoint_dir = cfg.checkpoint_dir;
  options.log = &log;
  options.resume = cfg.resume;
  return fit(all.first(n_train), all.subspan(n_train), cfg.net, cfg.hyper, options);
}

void run_infer(const InferOptions& opt) {
  const Checkpoint ck = load_checkpoint(opt.checkpoint);
  const GrayImage guide = load_gray_png(opt.guide);
  const GrayImage distorted = load_gray_png(opt.distorted);
  const GrayImage mask_values = load_gray_png(opt.mask);
  require_same_dims(guide, distorted, "infer");
  require_same_dims(guide, mask_values, "infer");
  const auto rec = reconstruct(ck.params, guide, distorted, BinaryMask::from_threshold(mask_values));
  save_png(opt.out, rec.result);
  if (opt.debug_netout) {
    auto netout = opt.out;
    netout.replace_filename(opt.out.stem().string() + "_netout.png");
    save_png(netout, rec.net_out);
  }
}

EvalOutcome run_eval(const std::filesystem::path& result_dir, const std::filesystem::path& truth_dir,
                     const std::filesystem::path& mask_dir) {
  auto by_name = [](const std::filesystem::path& dir) {
    std::map<std::string, std::filesystem::path> m;
    for (const auto& p : list_pngs(dir)) m.emplace(p.filename().string(), p);
    return m;
  };
  const auto results = by_name(result_dir), truths = by_name(truth_dir), masks = by_name(mask_dir);
  std::set<std::string> names;
  for (const auto* m : {&results, &truths, &masks})
    for (const auto& [n, _] : *m) names.insert(n);

  EvalOutcome outcome;
  std::vector<EvalPair> pairs;
  for (const auto& n : names) {
    if (!results.count(n) || !truths.count(n) || !masks.count(n)) {
      outcome.unmatched.push_back(n);
      continue;
    }
    EvalPair p;
    p.name = n;
    p.result = load_gray_png(results.at(n));
    p.truth = load_gray_png(truths.at(n));
    p.mask = BinaryMask::from_threshold(load_gray_png(masks.at(n)));
    pairs.push_back(std::move(p));
  }
  if (outcome.unmatched.empty()) outcome.report = evaluate(pairs);
  return outcome;
}

BenchReport run_bench(const BenchOptions& opt) {
  if (opt.repeats < 1) throw ArgumentError("bench: repeats must be >= 1");
  const DgnetParams<float> params =
      opt.checkpoint ? load_checkpoint(*opt.checkpoint).params : init_params<float>(DgnetConfig{}, opt.seed);
  std::vector<int> thread_counts{1};
  if (opt.threads > 1) thread_counts.push_back(opt.threads);
  const int previous_threads = thread_count();

  BenchReport report;
  for (int size : opt.sizes) {
    if (size < 1) throw ArgumentError("bench: sizes must be positive");
    // Smooth synthetic scene with a stroke occlusion.
    GrayImage guide(size, size);
    for (int y = 0; y < size; ++y)
      for (int x = 0; x < size; ++x)
        guide(y, x) = 0.5f + 0.4f * std::sin(0.05f * x) * std::cos(0.03f * y);
    Rng rng(derive_seed(opt.seed, static_cast<std::uint64_t>(size)));
    const BinaryMask mask = gen_stroke_mask(size, size, rng, AugmentConfig{});
    const GrayImage distorted = apply_occlusion(GrayImage(1.0f - guide), mask);

    for (int t : thread_counts) {
      set_thread_count(t);
      BenchRow row;
      row.size = size;
      row.threads = t;
      for (int r = 0; r < opt.repeats; ++r) {
        StageTimes st;
        reconstruct(params, guide, distorted, mask, &st);
        const double total = st.network_seconds + st.slice_seconds;
        row.runs.push_back(total);
        if (r == 0 || total < row.best_seconds) {
          row.best_seconds = total;
          row.best_stages = st;
        }
      }
      row.pixels_per_second = static_cast<double>(size) * size / row.best_seconds;
      report.rows.push_back(std::move(row));
    }
  }
  set_thread_count(previous_threads);
  return report;
}

void BenchReport::write(std::ostream& out) const {
  out << "# reconstruct runtime, best of repeats (single-thread rows are the headline numbers)\n";
  char line[256];
  std::snprintf(line, sizeof line, "%6s  %7s  %10s  %11s  %10s  %10s  %s\n", "size", "threads", "best[s]", "network[s]",
                "slice[s]", "Mpix/s", "runs[s]");
  out << line;
  for (const auto& r : rows) {
    std::string runs;
    for (double s : r.runs) {
      char b[32];
      std::snprintf(b, sizeof b, "%s%.4f", runs.empty() ? "" : ",", s);
      runs += b;
    }
    std::snprintf(line, sizeof line, "%6d  %7d  %10.4f  %11.4f  %10.4f  %10.3f  %s\n", r.size, r.threads,
                  r.best_seconds, r.best_stages.network_seconds, r.best_stages.slice_seconds,
                  r.pixels_per_second / 1e6, runs.c_str());
    out << line;
  }
}

}  // namespace specgrid

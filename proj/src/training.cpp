#include "specgrid/training.hpp"

#include <algorithm>
#include <cstdio>
#include <exception>
#include <fstream>
#include <numeric>
#include <ostream>

#include "specgrid/augment.hpp"
#include "specgrid/checkpoint.hpp"
#include "specgrid/metrics.hpp"

namespace specgrid {
namespace {

constexpr const char* kCheckpointName = "checkpoint.dgckpt";
constexpr const char* kLogName = "train_log.txt";

void accumulate(DgnetParams<float>& into, const DgnetParams<float>& g) {
  for (std::size_t i = 0; i < into.layers.size(); ++i) {
    into.layers[i].weight += g.layers[i].weight;
    into.layers[i].bias += g.layers[i].bias;
  }
}

void scale(DgnetParams<float>& p, float s) {
  for (auto& l : p.layers) {
    l.weight *= s;
    l.bias *= s;
  }
}

}  // namespace

std::string format_epoch_log(const EpochLog& log) {
  char buf[160];
  if (log.holdout_psnr) {
    std::snprintf(buf, sizeof buf, "%d, %.6g, %.6f, %.4f", log.epoch, log.lr, log.mean_loss, *log.holdout_psnr);
  } else {
    std::snprintf(buf, sizeof buf, "%d, %.6g, %.6f, n/a", log.epoch, log.lr, log.mean_loss);
  }
  return buf;
}

double holdout_masked_psnr(const DgnetParams<float>& params, std::span<const SpectralSample> holdout) {
  double sum = 0.0;
  int n = 0;
  for (const SpectralSample& s : holdout) {
    const auto rec = reconstruct(params, s.guide, s.distorted, s.mask);
    if (auto db = masked_psnr(rec.result, s.target, s.mask)) {
      sum += cap_psnr(*db);
      ++n;
    }
  }
  return n ? sum / n : std::numeric_limits<double>::quiet_NaN();
}

FitResult fit(std::span<const SpectralSample> train, std::span<const SpectralSample> holdout,
              const DgnetConfig& config, const TrainHyper& hyper, const FitOptions& options) {
  config.validate();
  hyper.validate();
  if (train.empty()) throw ArgumentError("fit: empty training corpus");

  FitResult result;
  result.params = init_params<float>(config, hyper.seed);
  AdamState<float> adam = AdamState<float>::fresh(result.params);
  int start_epoch = 0;

  const auto ckpt_path = options.checkpoint_dir / kCheckpointName;
  if (!options.checkpoint_dir.empty()) {
    std::filesystem::create_directories(options.checkpoint_dir);
    if (options.resume && std::filesystem::exists(ckpt_path)) {
      Checkpoint ck = load_checkpoint(ckpt_path);
      if (!(ck.params.config == config)) throw ArgumentError("fit: checkpoint config differs from requested config");
      result.params = std::move(ck.params);
      if (ck.adam) adam = std::move(*ck.adam);
      start_epoch = ck.epoch;
    }
  }

  std::vector<TrainingExample<float>> examples;
  examples.reserve(train.size());
  for (const auto& s : train) examples.push_back(prepare_example<float>(s, hyper.alpha, config.bin_size));

  std::vector<std::size_t> order(examples.size());
  const std::size_t batch = static_cast<std::size_t>(hyper.batch_size);
  bool capped = hyper.max_steps > 0 && adam.step >= hyper.max_steps;

  for (int epoch = start_epoch; epoch < hyper.epochs && !capped; ++epoch) {
    const double lr = lr_at(epoch, hyper);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle_rng(derive_seed(hyper.seed, static_cast<std::uint64_t>(epoch)));
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    double loss_sum = 0.0;
    std::size_t loss_count = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += batch) {
      const std::size_t end = std::min(order.size(), begin + batch);
      std::vector<LossAndGradient<float>> parts(end - begin);
      std::vector<std::exception_ptr> errors(end - begin);
      parallel_for(0, static_cast<Index>(end - begin), [&](Index k) {
        try {
          parts[k] = loss_and_gradient(result.params, examples[order[begin + k]]);
        } catch (...) {
          errors[k] = std::current_exception();
        }
      });
      for (auto& e : errors)
        if (e) std::rethrow_exception(e);

      // Fixed summation order keeps the step independent of thread count.
      DgnetParams<float> grads = std::move(parts[0].grads);
      loss_sum += parts[0].loss;
      for (std::size_t k = 1; k < parts.size(); ++k) {
        accumulate(grads, parts[k].grads);
        loss_sum += parts[k].loss;
      }
      loss_count += parts.size();
      scale(grads, 1.0f / static_cast<float>(parts.size()));
      adam_step(result.params, grads, adam, lr, hyper);
      if (hyper.max_steps > 0 && adam.step >= hyper.max_steps) {
        capped = true;
        break;
      }
    }

    EpochLog log;
    log.epoch = epoch;
    log.lr = lr;
    log.mean_loss = loss_sum / static_cast<double>(loss_count);
    if (!holdout.empty()) {
      const double db = holdout_masked_psnr(result.params, holdout);
      if (std::isfinite(db)) log.holdout_psnr = db;
    }
    log.steps = adam.step;
    result.epochs.push_back(log);

    const std::string line = format_epoch_log(log);
    if (options.log) *options.log << line << std::endl;
    if (!options.checkpoint_dir.empty()) {
      std::ofstream(options.checkpoint_dir / kLogName, std::ios::app) << line << "\n";
      save_checkpoint(ckpt_path, Checkpoint{result.params, adam, epoch + 1});
    }
  }
  result.steps = adam.step;
  return result;
}

}  // namespace specgrid

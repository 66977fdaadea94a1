#include <doctest.h>

#include <random>
#include <fstream>
#include <sstream>

#include "specgrid/augment.hpp"
#include "specgrid/checkpoint.hpp"
#include "specgrid/training.hpp"
#include "support.hpp"

using namespace specgrid;
using specgrid::testing::random_image;
using specgrid::testing::random_mask;
using specgrid::testing::synthetic_rgb;
using specgrid::testing::temp_dir;

namespace {

DgnetConfig tiny_config() {
  DgnetConfig c;
  c.bin_size = 4;
  c.luma_bins = 2;
  c.downscale_channels = {8, 16};
  c.trunk_depth = 1;
  return c;
}

std::vector<SpectralSample> make_samples(int n, Index size, std::uint64_t seed) {
  std::vector<SpectralSample> out;
  for (int i = 0; i < n; ++i) {
    Rng rng(derive_seed(seed, i));
    out.push_back(make_sample(synthetic_rgb(size, size, seed + i % 8), rng));
  }
  return out;
}

SpectralSample random_sample(Index w, Index h, std::uint64_t seed, double p) {
  SpectralSample s;
  s.guide = random_image(w, h, seed);
  s.target = random_image(w, h, seed + 1);
  s.mask = random_mask(w, h, p, seed + 2);
  s.distorted = apply_occlusion(s.target, s.mask);
  return s;
}

}  // namespace

TEST_CASE("weighted_l1 examples") {
  GrayImage a(1, 2), b(1, 2);
  a << 0.5f, 0.4f;
  b << 0.4f, 0.6f;
  GrayImage mv(1, 2);
  mv << 1, 0;
  const BinaryMask m(mv);
  CHECK(weighted_l1(a, b, m, 10.0) == doctest::Approx(0.6).epsilon(1e-6));
  CHECK(weighted_l1(a, a, m, 10.0) == 0.0f);
  CHECK(weighted_l1(a, b, m, 1.0) == doctest::Approx(0.15).epsilon(1e-6));
  CHECK_THROWS_AS(weighted_l1(a, GrayImage(2, 1), m, 10.0), ArgumentError);
}

TEST_CASE("weighted_l1 grows with alpha when a masked pixel is wrong") {
  const auto a = random_image(8, 8, 1), b = random_image(8, 8, 2);
  const auto m = random_mask(8, 8, 0.3, 3);
  float prev = -1;
  for (double alpha : {1.0, 2.0, 5.0, 10.0, 20.0}) {
    const float l = weighted_l1(a, b, m, alpha);
    CHECK(l > prev);
    prev = l;
  }
}

TEST_CASE("lr schedule") {
  const TrainHyper h;
  CHECK(lr_at(0, h) == 1e-4);
  CHECK(lr_at(19, h) == 1e-4);
  CHECK(lr_at(20, h) == 5e-5);
  CHECK(lr_at(56, h) == doctest::Approx(3.125e-6).epsilon(1e-12));
  for (int e = 1; e < h.epochs; ++e) CHECK(lr_at(e, h) <= lr_at(e - 1, h));
}

TEST_CASE("hyper validation") {
  TrainHyper h;
  CHECK_NOTHROW(h.validate());
  h.alpha = 0.5;
  CHECK_THROWS_AS(h.validate(), ArgumentError);
  h = {};
  h.halve_epochs = {20, 20};
  CHECK_THROWS_AS(h.validate(), ArgumentError);
}

TEST_CASE("adam update closed forms") {
  const TrainHyper h;
  SUBCASE("zero gradient leaves params unchanged") {
    auto p = init_params(tiny_config(), 1);
    const auto before = p;
    auto st = AdamState<float>::fresh(p);
    adam_step(p, p.zeros_like(), st, 0.1, h);
    CHECK(st.step == 1);
    for (std::size_t i = 0; i < p.layers.size(); ++i) CHECK(p.layers[i].weight == before.layers[i].weight);
  }
  SUBCASE("single scalar step") {
    Eigen::ArrayXd theta = Eigen::ArrayXd::Zero(1), g = Eigen::ArrayXd::Ones(1);
    Eigen::ArrayXd m = Eigen::ArrayXd::Zero(1), v = Eigen::ArrayXd::Zero(1);
    adam_update(theta, g, m, v, 1, 0.1, h);
    CHECK(theta(0) == doctest::Approx(-0.1 / (1.0 + 1e-8)).epsilon(1e-12));
  }
  SUBCASE("non-finite gradient aborts the step") {
    auto p = init_params(tiny_config(), 1);
    const auto before = p;
    auto st = AdamState<float>::fresh(p);
    auto g = p.zeros_like();
    g.layers[2].weight(0, 0) = std::numeric_limits<float>::quiet_NaN();
    CHECK_THROWS_AS(adam_step(p, g, st, 0.1, h), NumericError);
    CHECK(st.step == 0);
    CHECK(p.layers[0].weight == before.layers[0].weight);
  }
}

TEST_CASE("exact prediction gives a zero gradient") {
  SpectralSample s = random_sample(8, 8, 5, 0.5);
  s.target.setZero();
  const auto ex = prepare_example<float>(s, 10.0, 4);
  const auto r = loss_and_gradient(zero_params(tiny_config()), ex);
  CHECK(r.loss == 0.0f);
  for (const auto& l : r.grads.layers) {
    CHECK((l.weight.array() == 0.0f).all());
    CHECK((l.bias.array() == 0.0f).all());
  }
}

TEST_CASE("padding pixels carry no loss") {
  const SpectralSample s = random_sample(6, 5, 7, 0.3);
  const auto ex = prepare_example<double>(s, 10.0, 4);
  CHECK(ex.guide.cols() == 8);
  CHECK(ex.guide.rows() == 8);
  CHECK(ex.weights.rightCols(2).isZero());
  CHECK(ex.weights.bottomRows(3).isZero());
  CHECK(ex.normalizer == doctest::Approx(1.0 / 30.0));
  const auto p = init_params<double>(tiny_config(), 2);
  const auto net = predict(p, ex);
  CHECK(example_loss(p, ex) ==
        doctest::Approx(weighted_l1<double>(net.topLeftCorner(5, 6), s.target.cast<double>(), s.mask, 10.0)));
}

TEST_CASE("gradient matches central differences") {
  const SpectralSample s = random_sample(16, 16, 11, 0.4);
  const auto ex = prepare_example<double>(s, 10.0, 4);
  auto params = init_params<double>(tiny_config(), 7);
  for (auto& l : params.layers) l.bias.setConstant(0.05);
  const auto r = loss_and_gradient(params, ex);
  std::mt19937_64 rng(99);
  const double h = 1e-4;
  for (std::size_t li = 0; li < params.layers.size(); ++li) {
    std::uniform_int_distribution<Index> pick(0, params.layers[li].weight.size() - 1);
    for (int k = 0; k < 4; ++k) {
      const Index i = pick(rng);
      auto p = params, m = params;
      p.layers[li].weight.data()[i] += h;
      m.layers[li].weight.data()[i] -= h;
      const double fd = (example_loss(p, ex) - example_loss(m, ex)) / (2 * h);
      const double an = r.grads.layers[li].weight.data()[i];
      CHECK(std::abs(fd - an) <= 1e-3 * std::max({std::abs(fd), std::abs(an), 1e-6}));
    }
  }
}

TEST_CASE("gradient scales with alpha on a fully masked sample") {
  SpectralSample s = random_sample(8, 8, 13, 0.0);
  s.mask = BinaryMask(GrayImage::Ones(8, 8));
  s.distorted = apply_occlusion(s.target, s.mask);
  const auto p = init_params<double>(tiny_config(), 3);
  const auto g10 = loss_and_gradient(p, prepare_example<double>(s, 10.0, 4));
  const auto g20 = loss_and_gradient(p, prepare_example<double>(s, 20.0, 4));
  CHECK(g20.loss == doctest::Approx(2 * g10.loss).epsilon(1e-12));
  for (std::size_t i = 0; i < p.layers.size(); ++i) {
    CHECK((g20.grads.layers[i].weight - 2 * g10.grads.layers[i].weight).norm() <=
          1e-12 * (1 + g10.grads.layers[i].weight.norm()));
  }
}

TEST_CASE("fit bookkeeping") {
  const auto data = make_samples(2, 16, 1);
  TrainHyper h;
  h.epochs = 1;
  h.batch_size = 1;
  const auto r = fit(data, {}, tiny_config(), h);
  CHECK(r.steps == 2);
  REQUIRE(r.epochs.size() == 1);
  CHECK(!r.epochs[0].holdout_psnr);
  CHECK_THROWS_AS(fit({}, {}, tiny_config(), h), ArgumentError);
}

TEST_CASE("epoch log format") {
  CHECK(format_epoch_log({3, 5e-5, 0.25, 31.5, 12}) == "3, 5e-05, 0.250000, 31.5000");
  CHECK(format_epoch_log({0, 1e-4, 0.5, std::nullopt, 1}) == "0, 0.0001, 0.500000, n/a");
}

TEST_CASE("same seed gives the same trajectory") {
  const auto data = make_samples(4, 16, 2);
  TrainHyper h;
  h.epochs = 2;
  h.batch_size = 2;
  h.lr0 = 1e-3;
  const auto a = fit(data, {}, tiny_config(), h), b = fit(data, {}, tiny_config(), h);
  for (std::size_t i = 0; i < a.params.layers.size(); ++i) CHECK(a.params.layers[i].weight == b.params.layers[i].weight);
  CHECK(a.epochs[1].mean_loss == b.epochs[1].mean_loss);
}

TEST_CASE("resume reproduces the uninterrupted run") {
  const auto data = make_samples(6, 16, 3);
  const auto holdout = make_samples(2, 16, 4);
  TrainHyper h;
  h.epochs = 3;
  h.batch_size = 2;
  h.lr0 = 1e-3;
  const auto full = fit(data, holdout, tiny_config(), h);

  const auto dir = temp_dir("resume");
  FitOptions opt;
  opt.checkpoint_dir = dir;
  h.epochs = 2;
  fit(data, holdout, tiny_config(), h, opt);
  CHECK(load_checkpoint(dir / "checkpoint.dgckpt").epoch == 2);
  h.epochs = 3;
  const auto resumed = fit(data, holdout, tiny_config(), h, opt);
  REQUIRE(resumed.epochs.size() == 1);
  CHECK(resumed.epochs[0].epoch == 2);
  CHECK(resumed.epochs[0].mean_loss == full.epochs[2].mean_loss);
  CHECK(resumed.steps == full.steps);
  for (std::size_t i = 0; i < full.params.layers.size(); ++i)
    CHECK(resumed.params.layers[i].weight == full.params.layers[i].weight);

  std::ifstream log(dir / "train_log.txt");
  int lines = 0;
  for (std::string line; std::getline(log, line);) ++lines;
  CHECK(lines == 3);

  auto other = tiny_config();
  other.luma_bins = 3;
  CHECK_THROWS_AS(fit(data, holdout, other, h, opt), ArgumentError);
}

TEST_CASE("toy overfit") {
  const auto data = make_samples(8, 64, 5);
  const DgnetConfig config;
  TrainHyper h;
  h.lr0 = 1e-4;
  h.batch_size = 8;
  h.epochs = 200;
  h.max_steps = 200;
  h.seed = 1;
  auto mean_loss = [&](const DgnetParams<float>& p) {
    double s = 0;
    for (const auto& d : data) s += example_loss(p, prepare_example<float>(d, h.alpha, config.bin_size));
    return s / data.size();
  };
  const double initial = mean_loss(init_params(config, h.seed));
  const auto r = fit(data, {}, config, h);
  CHECK(r.steps == 200);
  const double final_loss = mean_loss(r.params);
  MESSAGE("toy overfit: initial " << initial << " final " << final_loss);
  CHECK(final_loss < 0.25 * initial);
}

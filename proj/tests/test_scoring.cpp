#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "specan/dataset.hpp"
#include "specan/rng.hpp"
#include "specan/scoring.hpp"
#include "specan/vae.hpp"

using namespace specan;

namespace {

constexpr std::size_t kN = kImageSize * kImageSize;

Spectrogram flat_image(double value, double eps = 1e-3) {
  Spectrogram sp;
  sp.pixels.assign(kN, value);
  sp.epsilon = eps;
  return sp;
}

}  // namespace

TEST(Scores, WorkedExample) {
  // x = 0.5 everywhere, x_hat = 0.25: each pixel contributes 0.5 to the
  // relative score and 0.25 to the absolute one.
  const Spectrogram x = flat_image(0.5);
  const std::vector<double> x_hat(kN, 0.25);
  EXPECT_DOUBLE_EQ(noise_attention_score(x, x_hat), 2048.0);
  EXPECT_DOUBLE_EQ(reconstruction_error_score(x, x_hat), 1024.0);
}

TEST(Scores, PerfectReconstructionScoresZero) {
  const Spectrogram x = flat_image(0.7);
  EXPECT_DOUBLE_EQ(noise_attention_score(x, x.pixels), 0.0);
  EXPECT_DOUBLE_EQ(reconstruction_error_score(x, x.pixels), 0.0);
}

TEST(Scores, NoiseAttentionDominatesOnUnitIntervalInputs) {
  // With x <= 1 each relative term |d|/x is at least |d|, so N >= R.
  rng::SplitMix64 g(41);
  for (int trial = 0; trial < 1000; ++trial) {
    Spectrogram x;
    x.epsilon = 1e-3;
    x.pixels.resize(kN);
    std::vector<double> x_hat(kN);
    for (std::size_t i = 0; i < kN; ++i) {
      x.pixels[i] = g.uniform(1e-3, 1.0);
      x_hat[i] = g.next_double();
    }
    ASSERT_GE(noise_attention_score(x, x_hat), reconstruction_error_score(x, x_hat));
  }
}

TEST(Scores, LowAmplitudePixelsCarryMoreRelativeWeight) {
  // The same absolute error on a dim pixel outweighs it on a bright pixel.
  Spectrogram x = flat_image(1.0);
  x.pixels[0] = 0.01;
  std::vector<double> bright_err(x.pixels.begin(), x.pixels.end());
  bright_err[1] -= 0.005;
  std::vector<double> dim_err(x.pixels.begin(), x.pixels.end());
  dim_err[0] -= 0.005;
  EXPECT_NEAR(reconstruction_error_score(x, bright_err), reconstruction_error_score(x, dim_err),
              1e-15);
  EXPECT_GT(noise_attention_score(x, dim_err), noise_attention_score(x, bright_err) * 10);
}

TEST(Scores, ValidationAndContract) {
  const Spectrogram x = flat_image(0.5);
  EXPECT_THROW(noise_attention_score(x, std::vector<double>(10, 0.5)), std::invalid_argument);
  Spectrogram low = flat_image(0.5);
  low.pixels[7] = 1e-5;  // below the epsilon floor the pipeline guarantees
  EXPECT_THROW(noise_attention_score(low, std::vector<double>(kN, 0.5)), contract_error);
  EXPECT_THROW(reconstruction_error_score(low, std::vector<double>(kN, 0.5)), contract_error);
}

TEST(NoiseFloor, MatchesPercentileOracle) {
  rng::SplitMix64 g(17);
  std::vector<double> img(kN);
  for (auto& v : img) v = g.uniform(0.001, 1.0);
  EXPECT_DOUBLE_EQ(noise_floor_estimate(img, 0.2), percentile(img, 0.2));
  EXPECT_DOUBLE_EQ(noise_floor_estimate(img, 0.5), percentile(img, 0.5));
}

TEST(NoiseFloor, TranslationEquivariance) {
  rng::SplitMix64 g(23);
  std::vector<double> img(kN), shifted(kN);
  for (std::size_t i = 0; i < kN; ++i) {
    img[i] = g.uniform(0.0, 0.5);
    shifted[i] = img[i] + 0.25;
  }
  EXPECT_NEAR(noise_floor_estimate(shifted, 0.2), noise_floor_estimate(img, 0.2) + 0.25, 1e-12);
  EXPECT_THROW(noise_floor_estimate(std::vector<double>(10, 0.5), 0.2), std::invalid_argument);
}

namespace {

LabeledDataset tiny_dataset(std::size_t n, std::uint64_t seed) {
  LabeledDataset ds;
  ds.epsilon = 1e-3;
  ds.pixels = Mat(0, kN);
  rng::SplitMix64 g(seed);
  for (std::size_t i = 0; i < n; ++i) {
    Spectrogram sp;
    sp.epsilon = ds.epsilon;
    sp.pixels.resize(kN);
    for (auto& v : sp.pixels) v = g.uniform(1e-3, 1.0);
    append_sample(ds, sp, i % 2 == 0 ? Label::normal : Label::abnormal);
  }
  return ds;
}

}  // namespace

TEST(ScoreDataset, DeterministicInMeanMode) {
  const MlpVae model = init_model(5);
  const LabeledDataset ds = tiny_dataset(4, 11);
  const auto a = score_dataset(model, ds);
  const auto b = score_dataset(model, ds);
  ASSERT_EQ(a.size(), 4u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].sample_id, static_cast<std::uint32_t>(i));
    EXPECT_EQ(a[i].label, ds.labels[i]);
    EXPECT_EQ(a[i].noise_attention, b[i].noise_attention);
    EXPECT_EQ(a[i].reconstruction_error, b[i].reconstruction_error);
    EXPECT_EQ(a[i].noise_floor_in, b[i].noise_floor_in);
    EXPECT_EQ(a[i].noise_floor_out, b[i].noise_floor_out);
    ASSERT_GT(a[i].noise_attention, 0.0);
    ASSERT_GE(a[i].noise_attention, a[i].reconstruction_error);
  }
}

TEST(ScoreDataset, RecordsMatchDirectScoreCalls) {
  const MlpVae model = init_model(5);
  const LabeledDataset ds = tiny_dataset(3, 13);
  const auto recs = score_dataset(model, ds);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    std::vector<double> x(ds.pixels.row(i), ds.pixels.row(i) + kN);
    const auto [mu, sigma] = encode(model, x);
    const std::vector<double> x_hat = decode(model, mu);
    Spectrogram sp;
    sp.pixels = x;
    sp.epsilon = ds.epsilon;
    EXPECT_DOUBLE_EQ(recs[i].noise_attention, noise_attention_score(sp, x_hat));
    EXPECT_DOUBLE_EQ(recs[i].reconstruction_error, reconstruction_error_score(sp, x_hat));
    EXPECT_DOUBLE_EQ(recs[i].noise_floor_in, noise_floor_estimate(x, 0.2));
    EXPECT_DOUBLE_EQ(recs[i].noise_floor_out, noise_floor_estimate(x_hat, 0.2));
  }
}

TEST(ScoreDataset, SampleModeIsSeededAndSeedSensitive) {
  const MlpVae model = init_model(5);
  const LabeledDataset ds = tiny_dataset(3, 17);
  const auto a = score_dataset(model, ds, LatentMode::sample, 100);
  const auto b = score_dataset(model, ds, LatentMode::sample, 100);
  const auto c = score_dataset(model, ds, LatentMode::sample, 101);
  const auto mean = score_dataset(model, ds, LatentMode::mean);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(a[i].noise_attention, b[i].noise_attention);
    EXPECT_NE(a[i].noise_attention, c[i].noise_attention);
    EXPECT_NE(a[i].noise_attention, mean[i].noise_attention);
  }
}

TEST(ScoreDataset, RejectsMismatchedModel) {
  VaeConfig cfg;
  cfg.widths = {10, 8};
  cfg.latent_dim = 2;
  const MlpVae model = init_model(5, cfg);
  const LabeledDataset ds = tiny_dataset(2, 19);
  EXPECT_THROW(score_dataset(model, ds), std::invalid_argument);
}

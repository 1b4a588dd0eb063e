#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "specan/dataset.hpp"
#include "specan/errors.hpp"
#include "specan/rng.hpp"
#include "specan/spectrogram.hpp"
#include "specan/vae.hpp"

namespace specan {

struct ScoreRecord {
  std::uint32_t sample_id = 0;
  double noise_attention = 0;
  double reconstruction_error = 0;
  double noise_floor_in = 0;
  double noise_floor_out = 0;
  Label label = Label::unlabeled;
};

namespace detail {
inline void check_score_args(const Spectrogram& x, const std::vector<double>& x_hat) {
  require(x.pixels.size() == kImageSize * kImageSize, "score: bad spectrogram shape");
  require(x_hat.size() == x.pixels.size(), "score: x/x_hat shape mismatch");
  for (double p : x.pixels)
    if (!(p >= x.epsilon))
      throw contract_error("score: input pixel below epsilon floor");
}
}  // namespace detail

// Relative reconstruction error, summed per pixel: |x - x_hat| / x. The
// division upweights low-amplitude (noise) pixels; the epsilon floor of the
// normalization bounds each term by |x - x_hat| / epsilon.
inline double noise_attention_score(const Spectrogram& x, const std::vector<double>& x_hat) {
  detail::check_score_args(x, x_hat);
  double n = 0;
  for (std::size_t i = 0; i < x.pixels.size(); ++i)
    n += std::abs(x.pixels[i] - x_hat[i]) / x.pixels[i];
  return n;
}

// Plain absolute reconstruction error, summed per pixel.
inline double reconstruction_error_score(const Spectrogram& x, const std::vector<double>& x_hat) {
  detail::check_score_args(x, x_hat);
  double r = 0;
  for (std::size_t i = 0; i < x.pixels.size(); ++i) r += std::abs(x.pixels[i] - x_hat[i]);
  return r;
}

// Robust background level of one image: a low percentile of its pixels
// (default 20th), dominated by signal-free area in these scenes.
inline double noise_floor_estimate(const std::vector<double>& img, double q = 0.2) {
  require(img.size() == kImageSize * kImageSize, "noise_floor_estimate: wrong shape");
  for (double p : img) require(std::isfinite(p), "noise_floor_estimate: non-finite pixel");
  return percentile(img, q);
}

enum class LatentMode { mean, sample };

// Run every sample of `data` through the trained model and collect both
// anomaly scores plus the input/output noise floors. latent_mode mean (the
// default) makes records fully deterministic; sample mode draws one seeded
// z per sample.
inline std::vector<ScoreRecord> score_dataset(const MlpVae& model, const LabeledDataset& data,
                                              LatentMode latent_mode = LatentMode::mean,
                                              std::uint64_t seed = 0,
                                              double floor_percentile = 0.2) {
  data.validate();
  require(model.input_dim() == kImageSize * kImageSize, "score_dataset: model input mismatch");
  std::vector<ScoreRecord> out;
  out.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    std::vector<double> x(data.pixels.row(i), data.pixels.row(i) + data.pixels.cols);
    auto [mu, sigma] = encode(model, x);
    std::vector<double> z;
    if (latent_mode == LatentMode::mean) {
      z = mu;
    } else {
      rng::SplitMix64 g(rng::derive_seed(seed, i));
      z = reparameterize(mu, sigma, g);
    }
    const std::vector<double> x_hat = decode(model, z);

    Spectrogram sp;
    sp.pixels = x;
    sp.epsilon = data.epsilon;
    ScoreRecord rec;
    rec.sample_id = static_cast<std::uint32_t>(i);
    rec.noise_attention = noise_attention_score(sp, x_hat);
    rec.reconstruction_error = reconstruction_error_score(sp, x_hat);
    rec.noise_floor_in = noise_floor_estimate(x, floor_percentile);
    rec.noise_floor_out = noise_floor_estimate(x_hat, floor_percentile);
    rec.label = data.labels[i];
    out.push_back(rec);
  }
  return out;
}

}  // namespace specan

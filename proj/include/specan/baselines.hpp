#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "specan/errors.hpp"
#include "specan/mat.hpp"
#include "specan/mlp.hpp"
#include "specan/rng.hpp"
#include "specan/vae.hpp"

namespace specan {

// Deterministic deep auto-encoder: the VAE layer plan with the stochastic
// head replaced by a plain linear bottleneck. Trained on squared
// reconstruction error only.
struct MlpAutoencoder {
  std::vector<DenseLayer> layers;
  double leaky_slope = 0.2;

  std::size_t input_dim() const { return layers.front().fan_in(); }
};

inline MlpAutoencoder init_autoencoder(std::uint64_t seed, const VaeConfig& cfg = {}) {
  cfg.validate();
  rng::SplitMix64 g(seed);
  MlpAutoencoder m;
  m.leaky_slope = cfg.leaky_slope;
  for (std::size_t i = 0; i + 1 < cfg.widths.size(); ++i)
    m.layers.push_back(make_dense(cfg.widths[i], cfg.widths[i + 1], Activation::leaky_relu, g));
  m.layers.push_back(make_dense(cfg.widths.back(), cfg.latent_dim, Activation::identity, g));
  m.layers.push_back(make_dense(cfg.latent_dim, cfg.widths.back(), Activation::leaky_relu, g));
  for (std::size_t i = cfg.widths.size() - 1; i >= 1; --i) {
    const Activation act = (i == 1) ? Activation::tanh01 : Activation::leaky_relu;
    m.layers.push_back(make_dense(cfg.widths[i], cfg.widths[i - 1], act, g));
  }
  return m;
}

inline std::vector<double> ae_reconstruct(const MlpAutoencoder& m, const std::vector<double>& x) {
  require(x.size() == m.input_dim(), "ae_reconstruct: input length mismatch");
  Mat xm(1, x.size());
  std::copy(x.begin(), x.end(), xm.a.begin());
  std::vector<LayerCache> caches;
  return forward_stack(m.layers, xm, caches, m.leaky_slope).a;
}

// Mean squared error over pixels between input and reconstruction.
inline double autoencoder_score(const MlpAutoencoder& m, const std::vector<double>& x) {
  const std::vector<double> x_hat = ae_reconstruct(m, x);
  double acc = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - x_hat[i];
    acc += d * d;
  }
  return acc / static_cast<double>(x.size());
}

struct AeTrainResult {
  MlpAutoencoder model;
  std::vector<double> history;  // mean per-sample summed squared error per epoch
};

inline std::vector<TensorView> ae_param_views(MlpAutoencoder& m) {
  std::vector<TensorView> v;
  for (auto& l : m.layers) {
    v.push_back({l.w.a.data(), l.w.a.size()});
    v.push_back({l.b.data(), l.b.size()});
  }
  return v;
}

// Same training contract as the VAE: mini-batch Adam, per-epoch seeded
// shuffles, batch-mean gradients, fully deterministic under a fixed seed.
inline AeTrainResult train_autoencoder(const Mat& data, std::size_t epochs,
                                       std::size_t batch_size, std::uint64_t seed,
                                       const VaeConfig& cfg = {}) {
  require(data.rows > 0, "train_autoencoder: empty dataset");
  require(batch_size > 0, "train_autoencoder: batch_size must be > 0");
  require(epochs > 0, "train_autoencoder: epochs must be > 0");
  cfg.validate();
  require(data.cols == cfg.widths.front(), "train_autoencoder: sample width mismatch");

  AeTrainResult res;
  res.model = init_autoencoder(rng::derive_seed(seed, 1), cfg);
  rng::SplitMix64 shuffle_rng(rng::derive_seed(seed, 2));

  AdamState adam;
  auto params = ae_param_views(res.model);
  std::vector<std::size_t> order(data.rows);
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double loss_sum = 0;
    for (std::size_t start = 0; start < data.rows; start += batch_size) {
      const std::size_t b = std::min(batch_size, data.rows - start);
      Mat x(b, data.cols);
      for (std::size_t s = 0; s < b; ++s)
        std::copy_n(data.row(order[start + s]), data.cols, x.row(s));

      std::vector<LayerCache> caches;
      const Mat& x_hat = forward_stack(res.model.layers, x, caches, res.model.leaky_slope);
      const double inv_b = 1.0 / static_cast<double>(b);
      double batch_loss = 0;
      Mat dxhat(b, data.cols);
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x_hat.a[i] - x.a[i];
        batch_loss += d * d;
        dxhat.a[i] = 2.0 * d * inv_b;
      }
      if (!std::isfinite(batch_loss))
        throw numeric_error("train_autoencoder: non-finite loss at epoch " + std::to_string(epoch));
      std::vector<LayerGrads> grads;
      backward_stack(res.model.layers, x, caches, dxhat, grads, res.model.leaky_slope);
      std::vector<TensorView> gv;
      for (auto& lg : grads) {
        gv.push_back({lg.dw.a.data(), lg.dw.a.size()});
        gv.push_back({lg.db.data(), lg.db.size()});
      }
      adam_step(params, gv, adam);
      loss_sum += batch_loss;
    }
    res.history.push_back(loss_sum / static_cast<double>(data.rows));
  }
  return res;
}

enum class LofFeatureMode : std::uint8_t { raw_pixels = 0, downsampled_16x16 = 1 };

struct LofConfig {
  std::size_t k = 20;
  LofFeatureMode feature_mode = LofFeatureMode::downsampled_16x16;
};

// 4x4 average pooling of flattened 64x64 images down to 16x16 (256-dim LOF
// features; full 4096-dim Euclidean distances are noise-dominated).
inline Mat pool_features_16x16(const Mat& pixels) {
  require(pixels.cols == 64 * 64, "pool_features_16x16: expected 64x64 rows");
  Mat out(pixels.rows, 16 * 16);
  for (std::size_t s = 0; s < pixels.rows; ++s) {
    const double* src = pixels.row(s);
    double* dst = out.row(s);
    for (std::size_t r = 0; r < 16; ++r)
      for (std::size_t c = 0; c < 16; ++c) {
        double acc = 0;
        for (std::size_t dr = 0; dr < 4; ++dr)
          for (std::size_t dc = 0; dc < 4; ++dc) acc += src[(r * 4 + dr) * 64 + (c * 4 + dc)];
        dst[r * 16 + c] = acc / 16.0;
      }
  }
  return out;
}

namespace detail {

inline double euclid(const double* a, const double* b, std::size_t d) {
  double acc = 0;
#pragma omp simd reduction(+ : acc)
  for (std::size_t i = 0; i < d; ++i) {
    const double v = a[i] - b[i];
    acc += v * v;
  }
  return std::sqrt(acc);
}

// Reachability sums are floored so duplicate-heavy neighborhoods keep a
// finite local reachability density.
inline constexpr double kLofDistanceFloor = 1e-12;

}  // namespace detail

// Classical exact LOF of each test point against the training population:
// k-distance with ties included, reachability distance max(k-dist(o), d(p,o)),
// local reachability density, and the LOF ratio. O(n^2) distances, no
// approximate neighbor search.
inline std::vector<double> lof_scores(const Mat& train, const Mat& test, const LofConfig& cfg) {
  const std::size_t n = train.rows;
  const std::size_t d = train.cols;
  require(test.cols == d, "lof_scores: feature dimension mismatch");
  require(cfg.k >= 1 && cfg.k < n, "lof_scores: k must satisfy 1 <= k < train size");

  // Train-internal distances, k-distances and tie-inclusive neighborhoods.
  Mat dist(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    dist.at(i, i) = 0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = detail::euclid(train.row(i), train.row(j), d);
      dist.at(i, j) = v;
      dist.at(j, i) = v;
    }
  }

  std::vector<double> kdist(n);
  std::vector<std::vector<std::size_t>> nbrs(n);
  std::vector<double> buf;
  buf.reserve(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    buf.clear();
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) buf.push_back(dist.at(i, j));
    std::sort(buf.begin(), buf.end());
    kdist[i] = buf[cfg.k - 1];
    for (std::size_t j = 0; j < n; ++j)
      if (j != i && dist.at(i, j) <= kdist[i]) nbrs[i].push_back(j);
  }

  std::vector<double> lrd(n);
  for (std::size_t i = 0; i < n; ++i) {
    double reach_sum = 0;
    for (std::size_t j : nbrs[i]) reach_sum += std::max(kdist[j], dist.at(i, j));
    reach_sum = std::max(reach_sum,
                         detail::kLofDistanceFloor * static_cast<double>(nbrs[i].size()));
    lrd[i] = static_cast<double>(nbrs[i].size()) / reach_sum;
  }

  std::vector<double> out(test.rows);
  std::vector<double> dq(n);
  for (std::size_t q = 0; q < test.rows; ++q) {
    for (std::size_t j = 0; j < n; ++j) dq[j] = detail::euclid(test.row(q), train.row(j), d);
    buf.assign(dq.begin(), dq.end());
    std::sort(buf.begin(), buf.end());
    const double kd_q = buf[cfg.k - 1];
    double reach_sum = 0, lrd_nbr_sum = 0;
    std::size_t count = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (dq[j] <= kd_q) {
        reach_sum += std::max(kdist[j], dq[j]);
        lrd_nbr_sum += lrd[j];
        ++count;
      }
    }
    reach_sum = std::max(reach_sum, detail::kLofDistanceFloor * static_cast<double>(count));
    const double lrd_q = static_cast<double>(count) / reach_sum;
    out[q] = (lrd_nbr_sum / static_cast<double>(count)) / lrd_q;
  }
  return out;
}

}  // namespace specan

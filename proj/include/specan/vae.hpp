#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "specan/errors.hpp"
#include "specan/mat.hpp"
#include "specan/mlp.hpp"
#include "specan/rng.hpp"

namespace specan {

// Layer plan: widths lists the encoder body including the input width; the
// decoder mirrors it. Defaults follow the fully connected architecture used
// throughout: 4096 -> 1024 -> 256 -> 64 -> (mu, sigma) 8 -> 64 -> ... -> 4096.
struct VaeConfig {
  std::vector<std::size_t> widths{4096, 1024, 256, 64};
  std::size_t latent_dim = 8;
  double leaky_slope = 0.2;

  void validate() const {
    require(widths.size() >= 2, "VaeConfig: need at least input and one hidden width");
    for (std::size_t w : widths) require(w > 0, "VaeConfig: zero width");
    require(latent_dim > 0, "VaeConfig: zero latent dimension");
    require(leaky_slope > 0 && leaky_slope < 1, "VaeConfig: leaky slope outside (0,1)");
  }
};

struct MlpVae {
  std::vector<DenseLayer> encoder;  // widths chain, LeakyReLU
  DenseLayer mu_head;               // hidden -> latent, identity
  DenseLayer sigma_head;            // hidden -> latent, softplus (sigma > 0)
  std::vector<DenseLayer> decoder;  // latent -> reversed chain, tanh01 output
  std::size_t latent_dim = 8;
  double leaky_slope = 0.2;

  std::size_t input_dim() const { return encoder.front().fan_in(); }
};

inline MlpVae init_model(std::uint64_t seed, const VaeConfig& cfg = {}) {
  cfg.validate();
  rng::SplitMix64 g(seed);
  MlpVae m;
  m.latent_dim = cfg.latent_dim;
  m.leaky_slope = cfg.leaky_slope;
  for (std::size_t i = 0; i + 1 < cfg.widths.size(); ++i)
    m.encoder.push_back(make_dense(cfg.widths[i], cfg.widths[i + 1], Activation::leaky_relu, g));
  m.mu_head = make_dense(cfg.widths.back(), cfg.latent_dim, Activation::identity, g);
  m.sigma_head = make_dense(cfg.widths.back(), cfg.latent_dim, Activation::softplus, g);
  m.decoder.push_back(make_dense(cfg.latent_dim, cfg.widths.back(), Activation::leaky_relu, g));
  for (std::size_t i = cfg.widths.size() - 1; i >= 1; --i) {
    const Activation act = (i == 1) ? Activation::tanh01 : Activation::leaky_relu;
    m.decoder.push_back(make_dense(cfg.widths[i], cfg.widths[i - 1], act, g));
  }
  return m;
}

namespace detail {

inline void check_input(const MlpVae& m, const std::vector<double>& x) {
  require(x.size() == m.input_dim(), "encode: input length mismatch");
  for (double v : x)
    require(std::isfinite(v) && v >= 0.0 && v <= 1.0, "encode: input outside [0,1] or non-finite");
}

inline Mat row_view_copy(const std::vector<double>& v) {
  Mat m(1, v.size());
  std::copy(v.begin(), v.end(), m.a.begin());
  return m;
}

}  // namespace detail

// Batched encoder pass: mu and sigma for each row of x.
struct EncodeCache {
  std::vector<LayerCache> body;
  LayerCache mu, sigma;
};

inline void encode_batch(const MlpVae& m, const Mat& x, EncodeCache& c) {
  require(x.cols == m.input_dim(), "encode: input width mismatch");
  const Mat& h = forward_stack(m.encoder, x, c.body, m.leaky_slope);
  forward_layer(m.mu_head, h, c.mu, m.leaky_slope);
  forward_layer(m.sigma_head, h, c.sigma, m.leaky_slope);
}

inline std::pair<std::vector<double>, std::vector<double>> encode(const MlpVae& m,
                                                                  const std::vector<double>& x) {
  detail::check_input(m, x);
  EncodeCache c;
  encode_batch(m, detail::row_view_copy(x), c);
  return {c.mu.output.a, c.sigma.output.a};
}

// z = mu + sigma .* eps with eps drawn standard normal from `g`.
inline std::vector<double> reparameterize(const std::vector<double>& mu,
                                          const std::vector<double>& sigma,
                                          rng::SplitMix64& g) {
  require(mu.size() == sigma.size(), "reparameterize: mu/sigma length mismatch");
  for (double s : sigma) require(s > 0, "reparameterize: sigma must be > 0");
  std::vector<double> z(mu.size());
  for (std::size_t j = 0; j < z.size(); ++j) z[j] = mu[j] + sigma[j] * g.normal();
  return z;
}

inline Mat decode_batch(const MlpVae& m, const Mat& z, std::vector<LayerCache>& caches) {
  require(z.cols == m.latent_dim, "decode: latent width mismatch");
  return forward_stack(m.decoder, z, caches, m.leaky_slope);
}

inline std::vector<double> decode(const MlpVae& m, const std::vector<double>& z) {
  require(z.size() == m.latent_dim, "decode: latent length mismatch");
  for (double v : z) require(std::isfinite(v), "decode: non-finite latent");
  std::vector<LayerCache> caches;
  return decode_batch(m, detail::row_view_copy(z), caches).a;
}

struct LossBreakdown {
  double kl_term = 0;
  double recon_term = 0;
  double total = 0;
};

// Per-sample loss: KL(q(z|x) || N(0,I)) plus squared reconstruction error
// summed over pixels (single latent draw already folded into x_hat).
inline LossBreakdown loss(const std::vector<double>& x, const std::vector<double>& mu,
                          const std::vector<double>& sigma, const std::vector<double>& x_hat) {
  require(x.size() == x_hat.size(), "loss: x/x_hat length mismatch");
  require(mu.size() == sigma.size(), "loss: mu/sigma length mismatch");
  LossBreakdown out;
  for (std::size_t j = 0; j < mu.size(); ++j) {
    require(sigma[j] > 0, "loss: sigma must be > 0");
    out.kl_term += 0.5 * (mu[j] * mu[j] + sigma[j] * sigma[j] - 1.0 -
                          std::log(sigma[j] * sigma[j]));
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - x_hat[i];
    out.recon_term += d * d;
  }
  out.total = out.kl_term + out.recon_term;
  if (!std::isfinite(out.total)) throw numeric_error("loss: non-finite loss");
  return out;
}

struct VaeGradients {
  std::vector<LayerGrads> encoder;
  LayerGrads mu_head, sigma_head;
  std::vector<LayerGrads> decoder;
};

// Forward + analytic backward for a batch with an explicit latent draw
// (eps in standard-normal units, one row per sample). Gradients and the
// returned loss are means over the batch. The same draw drives both the loss
// and its gradients.
inline LossBreakdown vae_backward_batch(const MlpVae& m, const Mat& x, const Mat& eps,
                                        VaeGradients& grads, Mat* x_hat_out = nullptr) {
  require(x.cols == m.input_dim(), "backward: input width mismatch");
  require(eps.rows == x.rows && eps.cols == m.latent_dim, "backward: eps shape mismatch");
  const std::size_t batch = x.rows;
  const double inv_b = 1.0 / static_cast<double>(batch);

  EncodeCache ec;
  encode_batch(m, x, ec);
  const Mat& mu = ec.mu.output;
  const Mat& sigma = ec.sigma.output;

  Mat z(batch, m.latent_dim);
  for (std::size_t i = 0; i < z.size(); ++i) z.a[i] = mu.a[i] + sigma.a[i] * eps.a[i];

  std::vector<LayerCache> dec_caches;
  const Mat& x_hat = decode_batch(m, z, dec_caches);

  LossBreakdown mean_loss;
  double kl_sum = 0, recon_sum = 0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const double s = sigma.a[i];
    kl_sum += 0.5 * (mu.a[i] * mu.a[i] + s * s - 1.0 - std::log(s * s));
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x.a[i] - x_hat.a[i];
    recon_sum += d * d;
  }
  mean_loss.kl_term = kl_sum * inv_b;
  mean_loss.recon_term = recon_sum * inv_b;
  mean_loss.total = mean_loss.kl_term + mean_loss.recon_term;
  if (!std::isfinite(mean_loss.total)) throw numeric_error("backward: non-finite loss");

  // d(mean loss)/dx_hat = 2 (x_hat - x) / batch
  Mat dxhat(batch, x.cols);
  for (std::size_t i = 0; i < x.size(); ++i) dxhat.a[i] = 2.0 * (x_hat.a[i] - x.a[i]) * inv_b;

  Mat dz = backward_stack(m.decoder, z, dec_caches, dxhat, grads.decoder, m.leaky_slope);

  // Reparameterization splits dz into mu and sigma paths; KL adds its own.
  Mat dmu(batch, m.latent_dim), dsigma(batch, m.latent_dim);
  for (std::size_t i = 0; i < dz.size(); ++i) {
    dmu.a[i] = dz.a[i] + mu.a[i] * inv_b;
    dsigma.a[i] = dz.a[i] * eps.a[i] + (sigma.a[i] - 1.0 / sigma.a[i]) * inv_b;
  }

  const Mat& h = m.encoder.empty() ? x : ec.body.back().output;
  Mat dh_mu = backward_layer(m.mu_head, h, ec.mu, dmu, grads.mu_head, m.leaky_slope);
  Mat dh_sigma = backward_layer(m.sigma_head, h, ec.sigma, dsigma, grads.sigma_head, m.leaky_slope);
  Mat dh(dh_mu.rows, dh_mu.cols);
  for (std::size_t i = 0; i < dh.size(); ++i) dh.a[i] = dh_mu.a[i] + dh_sigma.a[i];

  backward_stack(m.encoder, x, ec.body, dh, grads.encoder, m.leaky_slope);

  for (const auto& lg : grads.encoder)
    for (double v : lg.dw.a)
      if (!std::isfinite(v)) throw numeric_error("backward: non-finite gradient");
  if (x_hat_out) *x_hat_out = x_hat;
  return mean_loss;
}

// Single-sample convenience; draws the latent sample from `g`.
inline LossBreakdown backward(const MlpVae& m, const std::vector<double>& x,
                              rng::SplitMix64& g, VaeGradients& grads) {
  detail::check_input(m, x);
  Mat eps(1, m.latent_dim);
  for (auto& e : eps.a) e = g.normal();
  return vae_backward_batch(m, detail::row_view_copy(x), eps, grads);
}

// Deterministic total loss for a fixed latent draw; the finite-difference
// oracle in the tests differentiates exactly this.
inline double loss_with_draw(const MlpVae& m, const std::vector<double>& x,
                             const std::vector<double>& eps) {
  require(x.size() == m.input_dim(), "loss_with_draw: input length mismatch");
  require(eps.size() == m.latent_dim, "loss_with_draw: eps length mismatch");
  EncodeCache ec;
  encode_batch(m, detail::row_view_copy(x), ec);
  std::vector<double> z(m.latent_dim);
  for (std::size_t j = 0; j < z.size(); ++j)
    z[j] = ec.mu.output.a[j] + ec.sigma.output.a[j] * eps[j];
  std::vector<LayerCache> caches;
  const Mat x_hat = decode_batch(m, detail::row_view_copy(z), caches);
  return loss(x, ec.mu.output.a, ec.sigma.output.a, x_hat.a).total;
}

inline std::vector<TensorView> param_views(MlpVae& m) {
  std::vector<TensorView> v;
  auto add = [&v](DenseLayer& l) {
    v.push_back({l.w.a.data(), l.w.a.size()});
    v.push_back({l.b.data(), l.b.size()});
  };
  for (auto& l : m.encoder) add(l);
  add(m.mu_head);
  add(m.sigma_head);
  for (auto& l : m.decoder) add(l);
  return v;
}

inline std::vector<TensorView> grad_views(VaeGradients& g) {
  std::vector<TensorView> v;
  auto add = [&v](LayerGrads& l) {
    v.push_back({l.dw.a.data(), l.dw.a.size()});
    v.push_back({l.db.data(), l.db.size()});
  };
  for (auto& l : g.encoder) add(l);
  add(g.mu_head);
  add(g.sigma_head);
  for (auto& l : g.decoder) add(l);
  return v;
}

struct TrainResult {
  MlpVae model;
  std::vector<LossBreakdown> history;  // mean per-sample loss per epoch
};

// Mini-batch Adam over normal-only data (one row per sample). Deterministic:
// model init, per-epoch shuffles and latent draws all derive from `seed`.
inline TrainResult train(const Mat& data, std::size_t epochs, std::size_t batch_size,
                         std::uint64_t seed, const VaeConfig& cfg = {}) {
  require(data.rows > 0, "train: empty dataset");
  require(batch_size > 0, "train: batch_size must be > 0");
  require(epochs > 0, "train: epochs must be > 0");
  cfg.validate();
  require(data.cols == cfg.widths.front(), "train: sample width does not match model input");

  TrainResult res;
  res.model = init_model(rng::derive_seed(seed, 1), cfg);
  rng::SplitMix64 shuffle_rng(rng::derive_seed(seed, 2));
  rng::SplitMix64 eps_rng(rng::derive_seed(seed, 3));

  AdamState adam;
  auto params = param_views(res.model);
  std::vector<std::size_t> order(data.rows);
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double kl_sum = 0, recon_sum = 0;
    for (std::size_t start = 0; start < data.rows; start += batch_size) {
      const std::size_t b = std::min(batch_size, data.rows - start);
      Mat x(b, data.cols);
      for (std::size_t s = 0; s < b; ++s)
        std::copy_n(data.row(order[start + s]), data.cols, x.row(s));
      Mat eps(b, res.model.latent_dim);
      for (auto& e : eps.a) e = eps_rng.normal();

      VaeGradients grads;
      LossBreakdown lb;
      try {
        lb = vae_backward_batch(res.model, x, eps, grads);
      } catch (const numeric_error& e) {
        throw numeric_error("train: aborted at epoch " + std::to_string(epoch) + ": " + e.what());
      }
      auto gv = grad_views(grads);
      adam_step(params, gv, adam);
      kl_sum += lb.kl_term * static_cast<double>(b);
      recon_sum += lb.recon_term * static_cast<double>(b);
    }
    LossBreakdown epoch_loss;
    epoch_loss.kl_term = kl_sum / static_cast<double>(data.rows);
    epoch_loss.recon_term = recon_sum / static_cast<double>(data.rows);
    epoch_loss.total = epoch_loss.kl_term + epoch_loss.recon_term;
    if (!std::isfinite(epoch_loss.total))
      throw numeric_error("train: non-finite epoch loss at epoch " + std::to_string(epoch));
    res.history.push_back(epoch_loss);
  }
  return res;
}

// Probability-weighted squared deviation of `values` from a scalar decode f.
inline double generation_error(const std::vector<double>& values,
                               const std::vector<double>& probs, double f) {
  require(!values.empty() && values.size() == probs.size(),
          "generation_error: values/probs mismatch");
  double sum = 0;
  for (double p : probs) {
    require(p >= 0, "generation_error: negative probability");
    sum += p;
  }
  require(std::abs(sum - 1.0) <= 1e-9, "generation_error: probabilities must sum to 1");
  double g = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double d = values[i] - f;
    g += probs[i] * d * d;
  }
  return g;
}

// The minimizer of generation_error over f: the probability-weighted mean.
inline double optimal_decoder_mean(const std::vector<double>& values,
                                   const std::vector<double>& probs) {
  require(!values.empty() && values.size() == probs.size(),
          "optimal_decoder_mean: values/probs mismatch");
  double sum = 0, wsum = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    require(probs[i] >= 0, "optimal_decoder_mean: negative probability");
    sum += probs[i];
    wsum += probs[i] * values[i];
  }
  require(std::abs(sum - 1.0) <= 1e-9, "optimal_decoder_mean: probabilities must sum to 1");
  return wsum / sum;
}

}  // namespace specan

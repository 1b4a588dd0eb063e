#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "specan/errors.hpp"
#include "specan/mat.hpp"
#include "specan/rng.hpp"

namespace specan {

enum class Activation : std::uint8_t {
  identity = 0,
  leaky_relu = 1,
  softplus = 2,
  tanh01 = 3,  // 0.5 * (1 + tanh(u)), bounded to (0, 1)
};

inline double activate(Activation act, double u, double leaky_slope) {
  switch (act) {
    case Activation::identity: return u;
    case Activation::leaky_relu: return u > 0 ? u : leaky_slope * u;
    case Activation::softplus:
      if (u > 35.0) return u;
      if (u < -35.0) return std::exp(u);
      return std::log1p(std::exp(u));
    case Activation::tanh01: return 0.5 * (1.0 + std::tanh(u));
  }
  throw std::invalid_argument("activate: unknown activation");
}

// Derivative as a function of the pre-activation.
inline double activate_grad(Activation act, double u, double leaky_slope) {
  switch (act) {
    case Activation::identity: return 1.0;
    case Activation::leaky_relu: return u > 0 ? 1.0 : (u < 0 ? leaky_slope : 1.0);
    case Activation::softplus: return 1.0 / (1.0 + std::exp(-u));
    case Activation::tanh01: {
      const double th = std::tanh(u);
      return 0.5 * (1.0 - th * th);
    }
  }
  throw std::invalid_argument("activate_grad: unknown activation");
}

// Fully connected layer. Weights are fan_in x fan_out row-major, so the
// forward pass and the weight-gradient both run axpy-style over contiguous
// rows; only the input-gradient needs the dot-product kernel.
struct DenseLayer {
  Mat w;                  // in x out
  std::vector<double> b;  // out
  Activation act = Activation::identity;

  std::size_t fan_in() const { return w.rows; }
  std::size_t fan_out() const { return w.cols; }
};

inline DenseLayer make_dense(std::size_t in, std::size_t out, Activation act,
                             rng::SplitMix64& g) {
  DenseLayer l;
  l.w = Mat(in, out);
  l.b.assign(out, 0.0);
  l.act = act;
  const double bound = std::sqrt(6.0 / static_cast<double>(in));
  for (auto& v : l.w.a) v = g.uniform(-bound, bound);
  return l;
}

struct LayerCache {
  Mat preact;  // batch x out
  Mat output;  // batch x out
};

inline void forward_layer(const DenseLayer& l, const Mat& x, LayerCache& c,
                          double leaky_slope) {
  require(x.cols == l.fan_in(), "forward_layer: input width mismatch");
  c.preact = Mat(x.rows, l.fan_out());
  mul_nn(x, l.w, c.preact);
  for (std::size_t s = 0; s < x.rows; ++s) {
    double* row = c.preact.row(s);
    for (std::size_t j = 0; j < l.fan_out(); ++j) row[j] += l.b[j];
  }
  c.output = Mat(x.rows, l.fan_out());
  for (std::size_t i = 0; i < c.preact.size(); ++i)
    c.output.a[i] = activate(l.act, c.preact.a[i], leaky_slope);
}

struct LayerGrads {
  Mat dw;                  // in x out
  std::vector<double> db;  // out
};

// Backprop one layer: dY is the gradient at the layer output. Writes the
// weight/bias gradients and returns the gradient at the layer input.
inline Mat backward_layer(const DenseLayer& l, const Mat& x, const LayerCache& c,
                          const Mat& dy, LayerGrads& g, double leaky_slope) {
  Mat dpre(dy.rows, dy.cols);
  for (std::size_t i = 0; i < dy.size(); ++i)
    dpre.a[i] = dy.a[i] * activate_grad(l.act, c.preact.a[i], leaky_slope);
  if (g.dw.size() == 0) {
    g.dw = Mat(l.fan_in(), l.fan_out());
    g.db.assign(l.fan_out(), 0.0);
  }
  mul_tn(x, dpre, g.dw);
  std::fill(g.db.begin(), g.db.end(), 0.0);
  for (std::size_t s = 0; s < dpre.rows; ++s) {
    const double* row = dpre.row(s);
    for (std::size_t j = 0; j < dpre.cols; ++j) g.db[j] += row[j];
  }
  Mat dx(x.rows, x.cols);
  mul_nt(dpre, l.w, dx);
  return dx;
}

// A chain of layers sharing one leaky slope.
inline const Mat& forward_stack(const std::vector<DenseLayer>& layers, const Mat& x,
                                std::vector<LayerCache>& caches, double leaky_slope) {
  caches.resize(layers.size());
  const Mat* cur = &x;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    forward_layer(layers[i], *cur, caches[i], leaky_slope);
    cur = &caches[i].output;
  }
  return *cur;
}

inline Mat backward_stack(const std::vector<DenseLayer>& layers, const Mat& x0,
                          const std::vector<LayerCache>& caches, const Mat& dout,
                          std::vector<LayerGrads>& grads, double leaky_slope) {
  grads.resize(layers.size());
  Mat dy = dout;
  for (std::size_t i = layers.size(); i-- > 0;) {
    const Mat& input = (i == 0) ? x0 : caches[i - 1].output;
    dy = backward_layer(layers[i], input, caches[i], dy, grads[i], leaky_slope);
  }
  return dy;  // gradient at x0
}

// Flat view over one parameter or gradient tensor.
struct TensorView {
  double* data = nullptr;
  std::size_t n = 0;
};

// Bias-corrected Adam. Moments are stored flat, concatenated over the tensor
// list in call order; the list must be identical across calls.
struct AdamState {
  double alpha = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps_hat = 1e-8;
  std::uint64_t t = 0;
  std::vector<double> m, v;
};

inline void adam_step(const std::vector<TensorView>& params,
                      const std::vector<TensorView>& grads, AdamState& st) {
  require(params.size() == grads.size(), "adam_step: tensor count mismatch");
  std::size_t total = 0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    require(params[i].n == grads[i].n, "adam_step: tensor shape mismatch");
    total += params[i].n;
  }
  if (st.m.empty()) {
    st.m.assign(total, 0.0);
    st.v.assign(total, 0.0);
  }
  require(st.m.size() == total, "adam_step: state sized for a different model");
  st.t += 1;
  const double bc1 = 1.0 - std::pow(st.beta1, static_cast<double>(st.t));
  const double bc2 = 1.0 - std::pow(st.beta2, static_cast<double>(st.t));
  std::size_t off = 0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    double* __restrict p = params[i].data;
    const double* __restrict g = grads[i].data;
    double* __restrict m = st.m.data() + off;
    double* __restrict v = st.v.data() + off;
    const std::size_t n = params[i].n;
    for (std::size_t j = 0; j < n; ++j) {
      m[j] = st.beta1 * m[j] + (1.0 - st.beta1) * g[j];
      v[j] = st.beta2 * v[j] + (1.0 - st.beta2) * g[j] * g[j];
      const double mhat = m[j] / bc1;
      const double vhat = v[j] / bc2;
      p[j] -= st.alpha * mhat / (std::sqrt(vhat) + st.eps_hat);
    }
    off += n;
  }
}

}  // namespace specan

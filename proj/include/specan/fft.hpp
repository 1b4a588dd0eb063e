#pragma once

#include <bit>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <vector>

#include "specan/errors.hpp"

namespace specan {

// Iterative radix-2 complex FFT with a precomputed plan (bit-reversal table
// and per-stage twiddles). forward() is the unscaled DFT with kernel
// e^{-i 2pi kn/N}; inverse() applies the conjugate kernel and the 1/N scale,
// so inverse(forward(x)) == x up to rounding.
class Fft {
 public:
  explicit Fft(std::size_t n) : n_(n) {
    require(n >= 2 && std::has_single_bit(n), "Fft: size must be a power of two >= 2");
    const int log2n = std::countr_zero(n);
    bitrev_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t r = 0;
      for (int b = 0; b < log2n; ++b) r |= ((i >> b) & 1u) << (log2n - 1 - b);
      bitrev_[i] = static_cast<std::uint32_t>(r);
    }
    // Twiddles for the largest stage; smaller stages stride through this table.
    twiddle_.resize(n / 2);
    for (std::size_t k = 0; k < n / 2; ++k) {
      const double a = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
      twiddle_[k] = {std::cos(a), std::sin(a)};
    }
  }

  std::size_t size() const { return n_; }

  void forward(std::complex<double>* data) const { transform(data, false); }
  void inverse(std::complex<double>* data) const {
    transform(data, true);
    const double s = 1.0 / static_cast<double>(n_);
    for (std::size_t i = 0; i < n_; ++i) data[i] *= s;
  }

  void forward(std::vector<std::complex<double>>& v) const {
    require(v.size() == n_, "Fft: buffer size mismatch");
    forward(v.data());
  }
  void inverse(std::vector<std::complex<double>>& v) const {
    require(v.size() == n_, "Fft: buffer size mismatch");
    inverse(v.data());
  }

 private:
  void transform(std::complex<double>* data, bool conj) const {
    for (std::size_t i = 0; i < n_; ++i) {
      const std::size_t j = bitrev_[i];
      if (i < j) std::swap(data[i], data[j]);
    }
    for (std::size_t len = 2; len <= n_; len <<= 1) {
      const std::size_t half = len >> 1;
      const std::size_t stride = n_ / len;
      for (std::size_t base = 0; base < n_; base += len) {
        for (std::size_t k = 0; k < half; ++k) {
          std::complex<double> w = twiddle_[k * stride];
          if (conj) w = std::conj(w);
          const std::complex<double> t = data[base + k + half] * w;
          const std::complex<double> u = data[base + k];
          data[base + k] = u + t;
          data[base + k + half] = u - t;
        }
      }
    }
  }

  std::size_t n_;
  std::vector<std::uint32_t> bitrev_;
  std::vector<std::complex<double>> twiddle_;
};

inline std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace specan

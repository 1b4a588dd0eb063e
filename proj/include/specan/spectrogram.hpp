#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "specan/errors.hpp"
#include "specan/fft.hpp"
#include "specan/mat.hpp"
#include "specan/signal.hpp"

namespace specan {

inline constexpr std::size_t kFftSize = 1024;
inline constexpr std::size_t kNumBlocks = 256;
inline constexpr std::size_t kImageSize = 64;
inline constexpr std::size_t kPool = 4;
inline constexpr std::size_t kCropRows = 256;                       // central 12.5 MHz
inline constexpr std::size_t kCropLow = (kFftSize - kCropRows) / 2;  // row 384
inline constexpr double kDbGuard = 1e-12;   // added before log10 so silence stays finite
inline constexpr double kEpsilonDefault = 1e-3;

inline constexpr double kFreqResolutionHz = kSampleRate / kFftSize * kPool;  // 195.3125 kHz
inline constexpr double kTimeResolutionS = kFftSize / kSampleRate * kPool;   // 81.92 us

// Normalized 64x64 time-frequency image; row = frequency (low to high),
// column = time. Pixels live in [epsilon, 1].
struct Spectrogram {
  std::vector<double> pixels;  // row-major 64x64
  double freq_resolution_hz = kFreqResolutionHz;
  double time_resolution_s = kTimeResolutionS;
  double epsilon = kEpsilonDefault;

  double at(std::size_t row, std::size_t col) const { return pixels[row * kImageSize + col]; }

  void validate() const {
    require(pixels.size() == kImageSize * kImageSize, "Spectrogram: wrong pixel count");
    for (double p : pixels)
      require(std::isfinite(p) && p >= epsilon - 1e-15 && p <= 1.0 + 1e-15,
              "Spectrogram: pixel outside [epsilon, 1]");
  }
};

// dB normalization window, fit on the training split only.
struct NormStats {
  double min_db = 0;
  double max_db = 0;
};

// Linear-interpolation percentile (q in [0,1]) of an unsorted sample.
inline double percentile(std::vector<double> v, double q) {
  require(!v.empty(), "percentile: empty sample");
  require(q >= 0.0 && q <= 1.0, "percentile: q outside [0,1]");
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  if (lo + 1 >= v.size()) return v.back();
  const double frac = pos - static_cast<double>(lo);
  return v[lo] + (v[lo + 1] - v[lo]) * frac;
}

// Magnitudes of 256 consecutive non-overlapping 1024-point DFTs (rectangular
// window), rows reordered so row 0 = -fs/2 and row 1023 = +fs/2 - one bin.
inline Mat stft_magnitude(const IQFrame& frame) {
  require(frame.size() == kFftSize * kNumBlocks,
          "stft_magnitude: frame must hold exactly 256 blocks of 1024 samples");
  static const Fft fft(kFftSize);
  Mat out(kFftSize, kNumBlocks);
  std::vector<std::complex<double>> buf(kFftSize);
  for (std::size_t b = 0; b < kNumBlocks; ++b) {
    std::copy_n(frame.samples.begin() + static_cast<std::ptrdiff_t>(b * kFftSize), kFftSize,
                buf.begin());
    fft.forward(buf);
    for (std::size_t r = 0; r < kFftSize; ++r) {
      const std::size_t k = (r + kFftSize / 2) & (kFftSize - 1);  // fftshift
      out.at(r, b) = std::abs(buf[k]);
    }
  }
  return out;
}

// Crop the central 256 frequency rows, then 4x4 non-overlapping average
// pooling down to 64x64.
inline Mat pool_crop(const Mat& mag) {
  check_shape(mag, kFftSize, kNumBlocks, "pool_crop");
  Mat out(kImageSize, kImageSize);
  for (std::size_t r = 0; r < kImageSize; ++r) {
    for (std::size_t c = 0; c < kImageSize; ++c) {
      double acc = 0;
      for (std::size_t dr = 0; dr < kPool; ++dr)
        for (std::size_t dc = 0; dc < kPool; ++dc)
          acc += mag.at(kCropLow + r * kPool + dr, c * kPool + dc);
      out.at(r, c) = acc / static_cast<double>(kPool * kPool);
    }
  }
  return out;
}

inline double amplitude_to_db(double mag) { return 20.0 * std::log10(mag + kDbGuard); }

inline Mat mag_to_db(const Mat& mag64) {
  check_shape(mag64, kImageSize, kImageSize, "mag_to_db");
  Mat out(kImageSize, kImageSize);
  for (std::size_t i = 0; i < mag64.size(); ++i) out.a[i] = amplitude_to_db(mag64.a[i]);
  return out;
}

// Robust normalization window: 1st / 99th percentile over every pixel of the
// training dB images.
inline NormStats fit_norm_stats(const std::vector<Mat>& train_db) {
  require(!train_db.empty(), "fit_norm_stats: empty collection");
  std::vector<double> all;
  all.reserve(train_db.size() * kImageSize * kImageSize);
  for (const Mat& m : train_db) {
    check_shape(m, kImageSize, kImageSize, "fit_norm_stats");
    all.insert(all.end(), m.a.begin(), m.a.end());
  }
  NormStats s;
  s.min_db = percentile(all, 0.01);
  s.max_db = percentile(std::move(all), 0.99);
  require(s.max_db > s.min_db, "fit_norm_stats: degenerate stats (max_db <= min_db)");
  return s;
}

// Affine map [min_db, max_db] -> [epsilon, 1], clamped. Input already in dB.
inline Spectrogram normalize_db(const Mat& db64, const NormStats& stats,
                                double epsilon = kEpsilonDefault) {
  check_shape(db64, kImageSize, kImageSize, "normalize_db");
  require(stats.max_db > stats.min_db, "normalize_db: degenerate stats");
  require(epsilon > 0 && epsilon <= 0.1, "normalize_db: epsilon outside (0, 0.1]");
  Spectrogram sp;
  sp.epsilon = epsilon;
  sp.pixels.resize(kImageSize * kImageSize);
  const double span = stats.max_db - stats.min_db;
  for (std::size_t i = 0; i < sp.pixels.size(); ++i) {
    const double v = epsilon + (db64.a[i] - stats.min_db) / span * (1.0 - epsilon);
    sp.pixels[i] = std::clamp(v, epsilon, 1.0);
  }
  return sp;
}

// dB conversion then the affine map above.
inline Spectrogram to_decibel_normalize(const Mat& mag64, const NormStats& stats,
                                        double epsilon = kEpsilonDefault) {
  check_shape(mag64, kImageSize, kImageSize, "to_decibel_normalize");
  return normalize_db(mag_to_db(mag64), stats, epsilon);
}

// Full pipeline for one frame, stopping before normalization (the dB image is
// what NormStats are fit on).
inline Mat frame_to_db_image(const IQFrame& frame) { return mag_to_db(pool_crop(stft_magnitude(frame))); }

}  // namespace specan

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <vector>

#include "specan/errors.hpp"
#include "specan/fft.hpp"
#include "specan/rng.hpp"

namespace specan {

inline constexpr double kSampleRate = 50e6;        // 50 MS/s complex baseband
inline constexpr std::size_t kFrameSamples = 262144;  // 256 STFT blocks of 1024

// A finite stream of complex baseband samples. Scene- and chirp-level
// generators emit full frames of kFrameSamples; gen_noise may produce any
// length (it doubles as a plain noise source in tests).
struct IQFrame {
  std::vector<std::complex<double>> samples;
  double sample_rate = kSampleRate;

  std::size_t size() const { return samples.size(); }
  double duration() const { return static_cast<double>(samples.size()) / sample_rate; }
};

struct SceneConfig {
  std::int64_t burst_count_min = 1;
  std::int64_t burst_count_max = 5;
  double burst_bw_min_hz = 0.5e6;
  double burst_bw_max_hz = 3.0e6;
  double burst_dur_min_s = 0.3e-3;
  double burst_dur_max_s = 2.0e-3;
  double burst_snr_min_db = 10.0;
  double burst_snr_max_db = 25.0;
  double noise_sigma = 1.0;  // per-component std of the white background
  std::uint64_t seed = 0;

  void validate() const {
    require(burst_count_min >= 0 && burst_count_min <= burst_count_max,
            "SceneConfig: bad burst count range");
    require(burst_bw_min_hz > 0 && burst_bw_min_hz <= burst_bw_max_hz,
            "SceneConfig: bad bandwidth range");
    require(burst_dur_min_s >= 0 && burst_dur_min_s <= burst_dur_max_s,
            "SceneConfig: bad duration range");
    require(burst_snr_min_db <= burst_snr_max_db, "SceneConfig: bad SNR range");
    require(noise_sigma > 0, "SceneConfig: noise_sigma must be > 0");
  }
};

struct ChirpParams {
  double f_start_hz = 0;   // baseband, within [-fs/2, fs/2]
  double f_end_hz = 0;
  double t_start_s = 0;
  double duration_s = 0;
  double amplitude = 1.0;  // linear, > 0 (0 allowed: silent chirp)

  void validate(double sample_rate, std::size_t frame_len) const {
    const double half = sample_rate / 2;
    require(std::abs(f_start_hz) <= half && std::abs(f_end_hz) <= half,
            "ChirpParams: frequency outside [-fs/2, fs/2]");
    require(t_start_s >= 0, "ChirpParams: t_start < 0");
    require(duration_s >= 0, "ChirpParams: duration < 0");
    const double frame_dur = static_cast<double>(frame_len) / sample_rate;
    require(t_start_s + duration_s <= frame_dur + 1e-12,
            "ChirpParams: gate exceeds frame");
    require(amplitude >= 0, "ChirpParams: negative amplitude");
  }
};

// n i.i.d. complex Gaussian samples, each component N(0, sigma^2).
inline IQFrame gen_noise(std::size_t n, double sigma, std::uint64_t seed,
                         double sample_rate = kSampleRate) {
  require(n > 0, "gen_noise: n must be > 0");
  require(sigma > 0, "gen_noise: sigma must be > 0");
  rng::SplitMix64 g(seed);
  IQFrame f;
  f.sample_rate = sample_rate;
  f.samples.resize(n);
  for (auto& s : f.samples) s = g.normal_complex(sigma);
  return f;
}

namespace detail {

// Hamming-windowed sinc low-pass. cutoff is in cycles/sample, taps odd.
inline std::vector<double> windowed_sinc_taps(double cutoff, std::size_t taps) {
  std::vector<double> h(taps);
  const auto mid = static_cast<double>(taps - 1) / 2.0;
  double sum = 0;
  for (std::size_t m = 0; m < taps; ++m) {
    const double t = static_cast<double>(m) - mid;
    const double x = 2.0 * cutoff * t;
    double v = (std::abs(x) < 1e-12) ? 1.0 : std::sin(std::numbers::pi * x) / (std::numbers::pi * x);
    v *= 2.0 * cutoff;
    v *= 0.54 + 0.46 * std::cos(2.0 * std::numbers::pi * t / static_cast<double>(taps - 1));
    h[m] = v;
    sum += v;
  }
  for (auto& v : h) v /= sum;  // unity gain at DC
  return h;
}

}  // namespace detail

// Band-limited noise burst: complex white noise through a Hamming-windowed
// sinc low-pass (applied by FFT as an exact linear convolution, keeping only
// the filter's steady-state span), shifted to f_center and gated to
// [t_start, t_start+duration]. Average power inside the gate is scaled to
// `power` exactly; samples outside the gate are zero.
inline IQFrame gen_burst(double f_center_hz, double bandwidth_hz, double t_start_s,
                         double duration_s, double power, std::uint64_t seed,
                         double sample_rate = kSampleRate,
                         std::size_t frame_len = kFrameSamples) {
  const double half = sample_rate / 2;
  require(bandwidth_hz > 0, "gen_burst: bandwidth must be > 0");
  require(f_center_hz - bandwidth_hz / 2 >= -half && f_center_hz + bandwidth_hz / 2 <= half,
          "gen_burst: band outside [-fs/2, fs/2]");
  require(power >= 0, "gen_burst: negative power");
  require(t_start_s >= 0 && duration_s >= 0, "gen_burst: negative time");
  const double frame_dur = static_cast<double>(frame_len) / sample_rate;
  require(t_start_s + duration_s <= frame_dur + 1e-12, "gen_burst: gate exceeds frame");

  IQFrame out;
  out.sample_rate = sample_rate;
  out.samples.assign(frame_len, {0.0, 0.0});

  const auto s0 = static_cast<std::size_t>(std::llround(t_start_s * sample_rate));
  const auto gate = static_cast<std::size_t>(std::llround(duration_s * sample_rate));
  if (gate == 0 || power == 0.0) return out;
  require(s0 + gate <= frame_len, "gen_burst: gate exceeds frame");

  // Tap count scales with bandwidth so the transition band stays a small
  // fraction of the burst band (Hamming transition ~ 3.3/M cycles/sample).
  const double trans = bandwidth_hz / 4.0;
  auto taps = static_cast<std::size_t>(std::ceil(3.3 * sample_rate / trans));
  taps = std::min<std::size_t>(taps | 1u, 4097);
  const double cutoff = std::max(bandwidth_hz / 2.0 - trans / 2.0, bandwidth_hz / 8.0) / sample_rate;
  const std::vector<double> h = detail::windowed_sinc_taps(cutoff, taps);

  // White noise long enough that the filter is fully primed over the gate.
  const std::size_t in_len = gate + taps - 1;
  const std::size_t fft_len = next_pow2(in_len + taps - 1);
  Fft fft(fft_len);
  std::vector<std::complex<double>> x(fft_len, {0.0, 0.0});
  rng::SplitMix64 g(seed);
  for (std::size_t i = 0; i < in_len; ++i) x[i] = g.normal_complex(1.0);
  std::vector<std::complex<double>> hf(fft_len, {0.0, 0.0});
  for (std::size_t i = 0; i < taps; ++i) hf[i] = h[i];
  fft.forward(x);
  fft.forward(hf);
  for (std::size_t i = 0; i < fft_len; ++i) x[i] *= hf[i];
  fft.inverse(x);

  // Steady-state span starts at taps-1; modulate with an incremental rotator.
  const double dphi = 2.0 * std::numbers::pi * f_center_hz / sample_rate;
  const std::complex<double> rot{std::cos(dphi), std::sin(dphi)};
  double phase0 = dphi * static_cast<double>(s0);
  phase0 = std::remainder(phase0, 2.0 * std::numbers::pi);
  std::complex<double> ph{std::cos(phase0), std::sin(phase0)};
  double acc = 0;
  for (std::size_t i = 0; i < gate; ++i) {
    const std::complex<double> v = x[taps - 1 + i];
    out.samples[s0 + i] = v * ph;
    acc += std::norm(v);
    ph *= rot;
    if ((i & 1023u) == 1023u) ph /= std::abs(ph);
  }
  const double mean_pow = acc / static_cast<double>(gate);
  const double scale = (mean_pow > 0) ? std::sqrt(power / mean_pow) : 0.0;
  for (std::size_t i = 0; i < gate; ++i) out.samples[s0 + i] *= scale;
  return out;
}

// Complex linear chirp gated to [t_start, t_start+duration], zero elsewhere.
// Phase inside the gate: 2pi (f_start t + (f_end-f_start)/(2 dur) t^2).
inline IQFrame gen_chirp(const ChirpParams& p, double sample_rate = kSampleRate,
                         std::size_t n = kFrameSamples) {
  p.validate(sample_rate, n);
  IQFrame out;
  out.sample_rate = sample_rate;
  out.samples.assign(n, {0.0, 0.0});
  const auto s0 = static_cast<std::size_t>(std::llround(p.t_start_s * sample_rate));
  const auto gate = static_cast<std::size_t>(std::llround(p.duration_s * sample_rate));
  if (gate == 0 || p.amplitude == 0.0) return out;
  require(s0 + gate <= n, "gen_chirp: gate exceeds frame");
  const double rate = (gate > 1) ? (p.f_end_hz - p.f_start_hz) / p.duration_s : 0.0;
  for (std::size_t i = 0; i < gate; ++i) {
    const double t = static_cast<double>(i) / sample_rate;
    const double phi = 2.0 * std::numbers::pi * (p.f_start_hz * t + 0.5 * rate * t * t);
    out.samples[s0 + i] = std::polar(p.amplitude, phi);
  }
  return out;
}

// Element-wise sum; the additive anomaly model.
inline IQFrame inject_anomaly(const IQFrame& frame, const ChirpParams& p) {
  IQFrame chirp = gen_chirp(p, frame.sample_rate, frame.size());
  IQFrame out = frame;
  for (std::size_t i = 0; i < out.size(); ++i) out.samples[i] += chirp.samples[i];
  return out;
}

// Background noise plus k bursts, k and every burst parameter drawn uniformly
// from the configured ranges; a pure function of the config (incl. seed).
// Burst centers are confined to the +-6.25 MHz band the spectrogram keeps.
inline IQFrame gen_normal_scene(const SceneConfig& cfg, double sample_rate = kSampleRate,
                                std::size_t frame_len = kFrameSamples) {
  cfg.validate();
  rng::SplitMix64 g(cfg.seed);
  IQFrame frame = gen_noise(frame_len, cfg.noise_sigma, rng::derive_seed(cfg.seed, 0), sample_rate);
  const auto k = g.uniform_int(cfg.burst_count_min, cfg.burst_count_max);
  const double frame_dur = static_cast<double>(frame_len) / sample_rate;
  const double visible_half = sample_rate / 8.0;  // band kept by the crop stage
  const double noise_power = 2.0 * cfg.noise_sigma * cfg.noise_sigma;
  for (std::int64_t b = 0; b < k; ++b) {
    const double bw = g.uniform(cfg.burst_bw_min_hz, cfg.burst_bw_max_hz);
    const double fmax = visible_half - bw / 2;
    const double fc = g.uniform(-fmax, fmax);
    const double dur = std::min(g.uniform(cfg.burst_dur_min_s, cfg.burst_dur_max_s), frame_dur);
    const double t0 = g.uniform(0.0, frame_dur - dur);
    const double snr_db = g.uniform(cfg.burst_snr_min_db, cfg.burst_snr_max_db);
    const double power = noise_power * std::pow(10.0, snr_db / 10.0);
    IQFrame burst = gen_burst(fc, bw, t0, dur, power,
                              rng::derive_seed(cfg.seed, 1 + static_cast<std::uint64_t>(b)),
                              sample_rate, frame_len);
    for (std::size_t i = 0; i < frame_len; ++i) frame.samples[i] += burst.samples[i];
  }
  return frame;
}

}  // namespace specan

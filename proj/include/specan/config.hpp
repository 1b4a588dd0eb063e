#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>

#include "specan/baselines.hpp"
#include "specan/errors.hpp"
#include "specan/io.hpp"
#include "specan/scoring.hpp"
#include "specan/signal.hpp"

namespace specan {

// Everything an experiment run needs, with the desk-scale defaults. Configs
// are flat key=value files; '#' starts a comment, unknown keys are errors.
struct RunConfig {
  std::uint64_t seed = 42;
  std::size_t train_count = 2000;
  std::size_t test_count = 400;
  std::size_t epochs = 20;
  std::size_t batch_size = 32;

  // Normal-scene synthesis.
  std::size_t burst_count_min = 1;
  std::size_t burst_count_max = 5;
  double burst_bw_min_hz = 0.5e6;
  double burst_bw_max_hz = 3.0e6;
  double burst_dur_min_s = 0.3e-3;
  double burst_dur_max_s = 2.0e-3;
  double burst_snr_min_db = 10.0;
  double burst_snr_max_db = 25.0;
  double noise_sigma = 1.0;

  // Injected chirp anomalies.
  double chirp_sweep_min_hz = 1.0e6;
  double chirp_sweep_max_hz = 10.0e6;
  double chirp_dur_frac_min = 0.2;
  double chirp_dur_frac_max = 0.8;
  double chirp_snr_min_db = 5.0;
  double chirp_snr_max_db = 15.0;

  double epsilon = kEpsilonDefault;
  std::string latent_mode = "mean";  // mean | sample
  double noise_floor_percentile = 0.2;

  std::size_t lof_k = 20;
  std::string lof_features = "downsampled_16x16";  // or raw_pixels

  bool run_vae = true;
  bool run_deep_ae = true;
  bool run_lof = true;

  std::string train_model = "vae";  // cmd_train target: vae | deep_ae

  SceneConfig scene_config() const {
    SceneConfig s;
    s.burst_count_min = static_cast<std::int64_t>(burst_count_min);
    s.burst_count_max = static_cast<std::int64_t>(burst_count_max);
    s.burst_bw_min_hz = burst_bw_min_hz;
    s.burst_bw_max_hz = burst_bw_max_hz;
    s.burst_dur_min_s = burst_dur_min_s;
    s.burst_dur_max_s = burst_dur_max_s;
    s.burst_snr_min_db = burst_snr_min_db;
    s.burst_snr_max_db = burst_snr_max_db;
    s.noise_sigma = noise_sigma;
    return s;
  }

  LatentMode latent() const {
    if (latent_mode == "mean") return LatentMode::mean;
    if (latent_mode == "sample") return LatentMode::sample;
    throw std::invalid_argument("latent_mode must be mean or sample");
  }

  LofConfig lof_config() const {
    LofConfig c;
    c.k = lof_k;
    if (lof_features == "downsampled_16x16")
      c.feature_mode = LofFeatureMode::downsampled_16x16;
    else if (lof_features == "raw_pixels")
      c.feature_mode = LofFeatureMode::raw_pixels;
    else
      throw std::invalid_argument("lof_features must be downsampled_16x16 or raw_pixels");
    return c;
  }

  void validate() const {
    require(train_count > 0, "train_count must be positive");
    require(test_count >= 2, "test_count must be at least 2");
    require(epochs > 0, "epochs must be positive");
    require(batch_size > 0, "batch_size must be positive");
    scene_config().validate();
    require(chirp_sweep_min_hz > 0 && chirp_sweep_max_hz >= chirp_sweep_min_hz,
            "bad chirp sweep range");
    require(chirp_sweep_max_hz <= kSampleRate / 4.0,
            "chirp sweep exceeds the visible band");
    require(chirp_dur_frac_min > 0 && chirp_dur_frac_max <= 1.0 &&
                chirp_dur_frac_max >= chirp_dur_frac_min,
            "bad chirp duration range");
    require(chirp_snr_max_db >= chirp_snr_min_db, "bad chirp snr range");
    require(epsilon > 0 && epsilon < 1, "epsilon must be in (0,1)");
    require(noise_floor_percentile > 0 && noise_floor_percentile < 1,
            "noise_floor_percentile must be in (0,1)");
    require(lof_k > 0, "lof_k must be positive");
    latent();
    lof_config();
    require(train_model == "vae" || train_model == "deep_ae",
            "train_model must be vae or deep_ae");
  }
};

namespace detail {

struct ConfigField {
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

inline std::uint64_t parse_u64(const std::string& s) {
  std::size_t pos = 0;
  unsigned long long v = std::stoull(s, &pos);
  if (pos != s.size()) throw format_error("bad integer '" + s + "'");
  return v;
}

inline bool parse_bool(const std::string& s) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw format_error("bad boolean '" + s + "' (use true/false)");
}

// std::map keeps serialization order alphabetical and stable.
inline const std::map<std::string, ConfigField>& config_fields() {
  static const std::map<std::string, ConfigField> fields = [] {
    std::map<std::string, ConfigField> f;
    auto u64 = [&](const std::string& k, std::uint64_t RunConfig::* p) {
      f[k] = {[p](RunConfig& c, const std::string& v) { c.*p = parse_u64(v); },
              [p](const RunConfig& c) { return std::to_string(c.*p); }};
    };
    auto sz = [&](const std::string& k, std::size_t RunConfig::* p) {
      f[k] = {[p](RunConfig& c, const std::string& v) { c.*p = parse_u64(v); },
              [p](const RunConfig& c) { return std::to_string(c.*p); }};
    };
    auto dbl = [&](const std::string& k, double RunConfig::* p) {
      f[k] = {[p](RunConfig& c, const std::string& v) { c.*p = parse_double(v, "config"); },
              [p](const RunConfig& c) { return fmt_g17(c.*p); }};
    };
    auto bl = [&](const std::string& k, bool RunConfig::* p) {
      f[k] = {[p](RunConfig& c, const std::string& v) { c.*p = parse_bool(v); },
              [p](const RunConfig& c) { return c.*p ? "true" : "false"; }};
    };
    auto str = [&](const std::string& k, std::string RunConfig::* p) {
      f[k] = {[p](RunConfig& c, const std::string& v) { c.*p = v; },
              [p](const RunConfig& c) { return c.*p; }};
    };
    u64("seed", &RunConfig::seed);
    sz("train_count", &RunConfig::train_count);
    sz("test_count", &RunConfig::test_count);
    sz("epochs", &RunConfig::epochs);
    sz("batch_size", &RunConfig::batch_size);
    sz("burst_count_min", &RunConfig::burst_count_min);
    sz("burst_count_max", &RunConfig::burst_count_max);
    dbl("burst_bw_min_hz", &RunConfig::burst_bw_min_hz);
    dbl("burst_bw_max_hz", &RunConfig::burst_bw_max_hz);
    dbl("burst_dur_min_s", &RunConfig::burst_dur_min_s);
    dbl("burst_dur_max_s", &RunConfig::burst_dur_max_s);
    dbl("burst_snr_min_db", &RunConfig::burst_snr_min_db);
    dbl("burst_snr_max_db", &RunConfig::burst_snr_max_db);
    dbl("noise_sigma", &RunConfig::noise_sigma);
    dbl("chirp_sweep_min_hz", &RunConfig::chirp_sweep_min_hz);
    dbl("chirp_sweep_max_hz", &RunConfig::chirp_sweep_max_hz);
    dbl("chirp_dur_frac_min", &RunConfig::chirp_dur_frac_min);
    dbl("chirp_dur_frac_max", &RunConfig::chirp_dur_frac_max);
    dbl("chirp_snr_min_db", &RunConfig::chirp_snr_min_db);
    dbl("chirp_snr_max_db", &RunConfig::chirp_snr_max_db);
    dbl("epsilon", &RunConfig::epsilon);
    str("latent_mode", &RunConfig::latent_mode);
    dbl("noise_floor_percentile", &RunConfig::noise_floor_percentile);
    sz("lof_k", &RunConfig::lof_k);
    str("lof_features", &RunConfig::lof_features);
    bl("run_vae", &RunConfig::run_vae);
    bl("run_deep_ae", &RunConfig::run_deep_ae);
    bl("run_lof", &RunConfig::run_lof);
    str("train_model", &RunConfig::train_model);
    return f;
  }();
  return fields;
}

inline std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace detail

inline RunConfig parse_config(std::istream& is, const std::string& what) {
  RunConfig cfg;
  const auto& fields = detail::config_fields();
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw format_error(what + ":" + std::to_string(lineno) + ": expected key=value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string val = detail::trim(line.substr(eq + 1));
    auto it = fields.find(key);
    if (it == fields.end())
      throw format_error(what + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
    try {
      it->second.set(cfg, val);
    } catch (const format_error&) {
      throw;
    } catch (const std::exception& e) {
      throw format_error(what + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return cfg;
}

inline RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw format_error("cannot open: " + path.string());
  return parse_config(is, path.string());
}

// Full echo of the effective configuration, every key on its own line in a
// fixed order, so runs are self-describing and reruns diff clean.
inline std::string serialize_config(const RunConfig& cfg) {
  std::ostringstream os;
  for (const auto& [key, field] : detail::config_fields())
    os << key << "=" << field.get(cfg) << "\n";
  return os.str();
}

}  // namespace specan

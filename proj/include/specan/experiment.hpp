#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "specan/baselines.hpp"
#include "specan/config.hpp"
#include "specan/dataset.hpp"
#include "specan/evaluation.hpp"
#include "specan/io.hpp"
#include "specan/scoring.hpp"
#include "specan/signal.hpp"
#include "specan/spectrogram.hpp"
#include "specan/vae.hpp"

namespace specan {

namespace detail {

// Disjoint seed stream bases; each sample gets its own derived seed so frame
// generation order never matters.
inline constexpr std::uint64_t kStreamTrainFrame = 0x100000000ull;
inline constexpr std::uint64_t kStreamTestNormal = 0x200000000ull;
inline constexpr std::uint64_t kStreamTestAbnormal = 0x300000000ull;
inline constexpr std::uint64_t kStreamChirpParams = 0x400000000ull;

inline ChirpParams draw_chirp(const RunConfig& cfg, rng::SplitMix64& g, double frame_dur) {
  ChirpParams p;
  const double sweep = g.uniform(cfg.chirp_sweep_min_hz, cfg.chirp_sweep_max_hz);
  const bool up = g.uniform_int(0, 1) == 1;
  const double frac = g.uniform(cfg.chirp_dur_frac_min, cfg.chirp_dur_frac_max);
  p.duration_s = frac * frame_dur;
  p.t_start_s = g.uniform(0.0, frame_dur - p.duration_s);
  const double visible_half = kSampleRate / 8.0;  // band kept by the crop stage
  if (up) {
    p.f_start_hz = g.uniform(-visible_half, visible_half - sweep);
    p.f_end_hz = p.f_start_hz + sweep;
  } else {
    p.f_start_hz = g.uniform(-visible_half + sweep, visible_half);
    p.f_end_hz = p.f_start_hz - sweep;
  }
  const double snr_db = g.uniform(cfg.chirp_snr_min_db, cfg.chirp_snr_max_db);
  // Time-domain power relative to the complex noise power 2*sigma^2.
  p.amplitude = cfg.noise_sigma * std::sqrt(2.0) * std::pow(10.0, snr_db / 20.0);
  return p;
}

}  // namespace detail

struct SynthOutput {
  LabeledDataset train;  // all normal
  LabeledDataset test;   // normals first, then chirp-injected abnormals
  NormStats stats;       // fitted on the training images only
};

// Generate the full train/test corpus for one run. Training scenes are
// normal-only; the test set is half normal, half with a linear chirp added
// on top of an otherwise normal scene. Both sets are normalized with the
// training-set percentile stats.
inline SynthOutput synth_datasets(const RunConfig& cfg) {
  cfg.validate();
  const double frame_dur = static_cast<double>(kFrameSamples) / kSampleRate;
  const std::size_t n_abn = cfg.test_count / 2;
  const std::size_t n_norm = cfg.test_count - n_abn;

  std::vector<Mat> train_db;
  train_db.reserve(cfg.train_count);
  SceneConfig scene = cfg.scene_config();
  for (std::size_t i = 0; i < cfg.train_count; ++i) {
    scene.seed = rng::derive_seed(cfg.seed, detail::kStreamTrainFrame + i);
    train_db.push_back(frame_to_db_image(gen_normal_scene(scene)));
  }

  std::vector<Mat> test_db;
  std::vector<Label> test_labels;
  test_db.reserve(cfg.test_count);
  for (std::size_t i = 0; i < n_norm; ++i) {
    scene.seed = rng::derive_seed(cfg.seed, detail::kStreamTestNormal + i);
    test_db.push_back(frame_to_db_image(gen_normal_scene(scene)));
    test_labels.push_back(Label::normal);
  }
  for (std::size_t i = 0; i < n_abn; ++i) {
    scene.seed = rng::derive_seed(cfg.seed, detail::kStreamTestAbnormal + i);
    IQFrame frame = gen_normal_scene(scene);
    rng::SplitMix64 g(rng::derive_seed(cfg.seed, detail::kStreamChirpParams + i));
    const ChirpParams p = detail::draw_chirp(cfg, g, frame_dur);
    test_db.push_back(frame_to_db_image(inject_anomaly(frame, p)));
    test_labels.push_back(Label::abnormal);
  }

  SynthOutput out;
  out.stats = fit_norm_stats(train_db);
  out.train.epsilon = cfg.epsilon;
  out.train.pixels = Mat(0, kImageSize * kImageSize);
  for (const Mat& db : train_db)
    append_sample(out.train, normalize_db(db, out.stats, cfg.epsilon), Label::normal);
  out.test.epsilon = cfg.epsilon;
  out.test.pixels = Mat(0, kImageSize * kImageSize);
  for (std::size_t i = 0; i < test_db.size(); ++i)
    append_sample(out.test, normalize_db(test_db[i], out.stats, cfg.epsilon), test_labels[i]);
  return out;
}

// --- scoring to rows ---------------------------------------------------------

inline constexpr const char* kDetectorVae = "vae";
inline constexpr const char* kDetectorDeepAe = "deep_ae";
inline constexpr const char* kDetectorLof = "lof";
inline constexpr const char* kScoreNoiseAttention = "noise_attention";
inline constexpr const char* kScoreReconstruction = "reconstruction_error";
inline constexpr const char* kScoreMse = "mse";
inline constexpr const char* kScoreLof = "lof";

inline std::vector<ScoreCsvRow> vae_rows(const std::vector<ScoreRecord>& recs) {
  std::vector<ScoreCsvRow> rows;
  rows.reserve(recs.size() * 2);
  for (const auto& r : recs)
    rows.push_back({r.sample_id, r.label, kDetectorVae, kScoreNoiseAttention, r.noise_attention,
                    r.noise_floor_in, r.noise_floor_out});
  for (const auto& r : recs)
    rows.push_back({r.sample_id, r.label, kDetectorVae, kScoreReconstruction,
                    r.reconstruction_error, r.noise_floor_in, r.noise_floor_out});
  return rows;
}

inline std::vector<ScoreCsvRow> deep_ae_rows(const MlpAutoencoder& m, const LabeledDataset& data,
                                             double floor_percentile) {
  std::vector<ScoreCsvRow> rows;
  rows.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    std::vector<double> x(data.pixels.row(i), data.pixels.row(i) + data.pixels.cols);
    const std::vector<double> x_hat = ae_reconstruct(m, x);
    double mse = 0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double dv = x[j] - x_hat[j];
      mse += dv * dv;
    }
    mse /= static_cast<double>(x.size());
    rows.push_back({static_cast<std::uint32_t>(i), data.labels[i], kDetectorDeepAe, kScoreMse,
                    mse, noise_floor_estimate(x, floor_percentile),
                    noise_floor_estimate(x_hat, floor_percentile)});
  }
  return rows;
}

inline std::vector<ScoreCsvRow> lof_rows(const LabeledDataset& train, const LabeledDataset& test,
                                         const LofConfig& cfg) {
  const bool pool = cfg.feature_mode == LofFeatureMode::downsampled_16x16;
  const Mat train_f = pool ? pool_features_16x16(train.pixels) : train.pixels;
  const Mat test_f = pool ? pool_features_16x16(test.pixels) : test.pixels;
  const std::vector<double> s = lof_scores(train_f, test_f, cfg);
  std::vector<ScoreCsvRow> rows;
  rows.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i)
    rows.push_back({static_cast<std::uint32_t>(i), test.labels[i], kDetectorLof, kScoreLof, s[i],
                    std::nullopt, std::nullopt});
  return rows;
}

// --- evaluation --------------------------------------------------------------

struct DetectorEval {
  std::string detector;
  std::string score_name;
  RocCurve roc;
  std::size_t samples = 0;
};

// Reconstruction noise-floor shift statistics over the detector rows that
// carry floors (the VAE rows); quantifies how much brighter the reconstructed
// background is than the input background, per class.
struct FloorStats {
  double mean_delta_abnormal = 0;
  double mean_delta_normal = 0;
  double frac_positive_abnormal = 0;  // share of abnormal rows with out > in
  std::size_t n_abnormal = 0;
  std::size_t n_normal = 0;
};

struct EvalReport {
  std::vector<DetectorEval> detectors;  // ordered by (detector, score_name)
  std::optional<FloorStats> floor_stats;
};

inline EvalReport evaluate_rows(const std::vector<ScoreCsvRow>& rows) {
  require(!rows.empty(), "evaluate_rows: no rows");
  std::map<std::pair<std::string, std::string>, std::pair<std::vector<double>, std::vector<Label>>>
      groups;
  for (const auto& r : rows) {
    auto& g = groups[{r.detector, r.score_name}];
    g.first.push_back(r.score);
    g.second.push_back(r.label);
  }
  EvalReport rep;
  for (const auto& [key, g] : groups) {
    DetectorEval ev;
    ev.detector = key.first;
    ev.score_name = key.second;
    ev.roc = roc_curve(g.first, g.second);
    ev.samples = g.first.size();
    rep.detectors.push_back(std::move(ev));
  }

  FloorStats fs;
  double sum_abn = 0, sum_norm = 0;
  std::size_t pos_abn = 0;
  for (const auto& r : rows) {
    if (r.detector != kDetectorVae || r.score_name != kScoreNoiseAttention) continue;
    if (!r.noise_floor_in || !r.noise_floor_out) continue;
    const double delta = *r.noise_floor_out - *r.noise_floor_in;
    if (r.label == Label::abnormal) {
      sum_abn += delta;
      ++fs.n_abnormal;
      if (delta > 0) ++pos_abn;
    } else if (r.label == Label::normal) {
      sum_norm += delta;
      ++fs.n_normal;
    }
  }
  if (fs.n_abnormal > 0 && fs.n_normal > 0) {
    fs.mean_delta_abnormal = sum_abn / static_cast<double>(fs.n_abnormal);
    fs.mean_delta_normal = sum_norm / static_cast<double>(fs.n_normal);
    fs.frac_positive_abnormal =
        static_cast<double>(pos_abn) / static_cast<double>(fs.n_abnormal);
    rep.floor_stats = fs;
  }
  return rep;
}

inline std::optional<double> auc_of(const EvalReport& rep, const std::string& detector,
                                    const std::string& score_name) {
  for (const auto& d : rep.detectors)
    if (d.detector == detector && d.score_name == score_name) return d.roc.auc;
  return std::nullopt;
}

inline std::string summary_text(const EvalReport& rep) {
  std::ostringstream os;
  for (const auto& d : rep.detectors) {
    os << "auc_" << d.detector << "_" << d.score_name << "=" << fmt_g17(d.roc.auc) << "\n";
    os << "samples_" << d.detector << "_" << d.score_name << "=" << d.samples << "\n";
  }
  if (rep.floor_stats) {
    const auto& f = *rep.floor_stats;
    os << "floor_delta_mean_abnormal=" << fmt_g17(f.mean_delta_abnormal) << "\n";
    os << "floor_delta_mean_normal=" << fmt_g17(f.mean_delta_normal) << "\n";
    os << "floor_delta_positive_frac_abnormal=" << fmt_g17(f.frac_positive_abnormal) << "\n";
  }
  return os.str();
}

namespace detail {

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw format_error("cannot open for write: " + path.string());
  os << text;
  if (!os) throw format_error("write failed: " + path.string());
}

inline void write_eval_files(const std::filesystem::path& out, const EvalReport& rep,
                             const std::vector<ScoreCsvRow>& rows) {
  for (const auto& d : rep.detectors) {
    write_roc_csv(out / ("roc_" + d.detector + "_" + d.score_name + ".csv"), d.roc);
    std::vector<double> scores;
    std::vector<Label> labels;
    for (const auto& r : rows) {
      if (r.detector != d.detector || r.score_name != d.score_name) continue;
      scores.push_back(r.score);
      labels.push_back(r.label);
    }
    write_histogram_csv(out / ("hist_" + d.detector + "_" + d.score_name + ".csv"), scores,
                        labels);
  }
  write_text(out / "summary.txt", summary_text(rep));
}

}  // namespace detail

// --- commands ----------------------------------------------------------------

inline void cmd_synth(const RunConfig& cfg, const std::filesystem::path& out) {
  std::filesystem::create_directories(out);
  detail::write_text(out / "config_echo.txt", serialize_config(cfg));
  SynthOutput s = synth_datasets(cfg);
  save_dataset(out / "train.spgd", s.train);
  save_dataset(out / "test.spgd", s.test);
  detail::write_text(out / "norm_stats.txt", "min_db=" + fmt_g17(s.stats.min_db) +
                                                 "\nmax_db=" + fmt_g17(s.stats.max_db) + "\n");
}

// Trains cfg.train_model on the normal rows of the given dataset.
inline void cmd_train(const RunConfig& cfg, const std::filesystem::path& dataset_path,
                      const std::filesystem::path& out) {
  cfg.validate();
  std::filesystem::create_directories(out);
  detail::write_text(out / "config_echo.txt", serialize_config(cfg));
  const LabeledDataset ds = load_dataset(dataset_path);
  std::size_t n_normal = 0;
  for (Label l : ds.labels)
    if (l == Label::normal) ++n_normal;
  require(n_normal > 0, "cmd_train: dataset has no normal samples");
  Mat data(n_normal, ds.pixels.cols);
  for (std::size_t i = 0, r = 0; i < ds.size(); ++i) {
    if (ds.labels[i] != Label::normal) continue;
    std::copy(ds.pixels.row(i), ds.pixels.row(i) + ds.pixels.cols, data.row(r++));
  }
  if (cfg.train_model == "vae") {
    TrainResult res = train(data, cfg.epochs, cfg.batch_size, cfg.seed);
    save_model(out / "vae_model.vaem", res.model);
    write_vae_loss_csv(out / "vae_loss.csv", res.history);
  } else {
    AeTrainResult res = train_autoencoder(data, cfg.epochs, cfg.batch_size, cfg.seed);
    save_model(out / "deep_ae_model.vaem", res.model);
    write_ae_loss_csv(out / "deep_ae_loss.csv", res.history);
  }
}

inline void cmd_score(const RunConfig& cfg, const std::filesystem::path& model_path,
                      const std::filesystem::path& dataset_path,
                      const std::filesystem::path& out) {
  cfg.validate();
  std::filesystem::create_directories(out);
  const LabeledDataset ds = load_dataset(dataset_path);
  const AnyModel model = load_any_model(model_path);
  std::vector<ScoreCsvRow> rows;
  if (std::holds_alternative<MlpVae>(model)) {
    rows = vae_rows(score_dataset(std::get<MlpVae>(model), ds, cfg.latent(), cfg.seed,
                                  cfg.noise_floor_percentile));
  } else {
    rows = deep_ae_rows(std::get<MlpAutoencoder>(model), ds, cfg.noise_floor_percentile);
  }
  write_scores_csv(out / "scores.csv", rows);
}

inline EvalReport cmd_eval(const std::filesystem::path& scores_path,
                           const std::filesystem::path& out) {
  std::filesystem::create_directories(out);
  const std::vector<ScoreCsvRow> rows = read_scores_csv(scores_path);
  EvalReport rep = evaluate_rows(rows);
  detail::write_eval_files(out, rep, rows);
  return rep;
}

struct ExperimentResult {
  EvalReport eval;
  NormStats stats;
  std::vector<ScoreCsvRow> rows;
};

// End-to-end deterministic run: synth -> train -> score -> eval, with every
// intermediate written under `out`. Rerunning with the same config yields
// byte-identical files. On error a FAILED.txt marker is left next to
// whatever partial outputs were already flushed.
inline ExperimentResult run_experiment(const RunConfig& cfg, const std::filesystem::path& out) {
  cfg.validate();
  std::filesystem::create_directories(out);
  try {
    detail::write_text(out / "config_echo.txt", serialize_config(cfg));
    SynthOutput s = synth_datasets(cfg);
    save_dataset(out / "train.spgd", s.train);
    save_dataset(out / "test.spgd", s.test);
    detail::write_text(out / "norm_stats.txt", "min_db=" + fmt_g17(s.stats.min_db) +
                                                   "\nmax_db=" + fmt_g17(s.stats.max_db) + "\n");

    std::vector<ScoreCsvRow> rows;
    if (cfg.run_vae) {
      TrainResult res = train(s.train.pixels, cfg.epochs, cfg.batch_size, cfg.seed);
      save_model(out / "vae_model.vaem", res.model);
      write_vae_loss_csv(out / "vae_loss.csv", res.history);
      auto recs =
          score_dataset(res.model, s.test, cfg.latent(), cfg.seed, cfg.noise_floor_percentile);
      auto vr = vae_rows(recs);
      rows.insert(rows.end(), vr.begin(), vr.end());
    }
    if (cfg.run_deep_ae) {
      AeTrainResult res = train_autoencoder(s.train.pixels, cfg.epochs, cfg.batch_size, cfg.seed);
      save_model(out / "deep_ae_model.vaem", res.model);
      write_ae_loss_csv(out / "deep_ae_loss.csv", res.history);
      auto ar = deep_ae_rows(res.model, s.test, cfg.noise_floor_percentile);
      rows.insert(rows.end(), ar.begin(), ar.end());
    }
    if (cfg.run_lof) {
      auto lr = lof_rows(s.train, s.test, cfg.lof_config());
      rows.insert(rows.end(), lr.begin(), lr.end());
    }
    require(!rows.empty(), "run_experiment: all detectors disabled");
    write_scores_csv(out / "scores.csv", rows);

    ExperimentResult result;
    result.eval = evaluate_rows(rows);
    detail::write_eval_files(out, result.eval, rows);
    result.stats = s.stats;
    result.rows = std::move(rows);
    return result;
  } catch (const std::exception& e) {
    detail::write_text(out / "FAILED.txt", std::string(e.what()) + "\n");
    throw;
  }
}

}  // namespace specan

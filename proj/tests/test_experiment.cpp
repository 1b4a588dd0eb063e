#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "specan/experiment.hpp"

namespace fs = std::filesystem;

namespace {

using specan::Label;
using specan::RunConfig;

RunConfig tiny_config() {
  RunConfig cfg;
  cfg.seed = 7;
  cfg.train_count = 12;
  cfg.test_count = 6;
  cfg.epochs = 1;
  cfg.batch_size = 4;
  cfg.lof_k = 3;
  return cfg;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "specan_experiment_test" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  EXPECT_TRUE(is.good()) << p;
  return std::string(std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>());
}

void expect_same_bytes(const fs::path& a, const fs::path& b) {
  EXPECT_EQ(slurp(a), slurp(b)) << a << " vs " << b;
}

TEST(SynthDatasets, LayoutBoundsAndQuantization) {
  const auto cfg = tiny_config();
  const auto out = specan::synth_datasets(cfg);

  ASSERT_EQ(out.train.size(), cfg.train_count);
  for (Label l : out.train.labels) EXPECT_EQ(l, Label::normal);

  // Normals fill the front half (rounded up), chirped scenes the back half.
  ASSERT_EQ(out.test.size(), cfg.test_count);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(out.test.labels[i], Label::normal);
  for (std::size_t i = 3; i < 6; ++i) EXPECT_EQ(out.test.labels[i], Label::abnormal);

  EXPECT_LT(out.stats.min_db, out.stats.max_db);
  for (const auto* ds : {&out.train, &out.test}) {
    for (double p : ds->pixels.a) {
      ASSERT_GE(p, cfg.epsilon);
      ASSERT_LE(p, 1.0);
      // Stored pixels already sit on the float32 grid.
      ASSERT_EQ(p, static_cast<double>(static_cast<float>(p)));
    }
  }
}

TEST(SynthDatasets, DeterministicAndSeedSensitive) {
  const auto cfg = tiny_config();
  const auto a = specan::synth_datasets(cfg);
  const auto b = specan::synth_datasets(cfg);
  EXPECT_EQ(a.stats.min_db, b.stats.min_db);
  EXPECT_EQ(a.stats.max_db, b.stats.max_db);
  EXPECT_EQ(a.train.pixels.a, b.train.pixels.a);
  EXPECT_EQ(a.test.pixels.a, b.test.pixels.a);

  auto cfg2 = cfg;
  cfg2.seed = 8;
  const auto c = specan::synth_datasets(cfg2);
  EXPECT_NE(a.train.pixels.a, c.train.pixels.a);
}

TEST(RunExperiment, ProducesAllDetectorsAndFiles) {
  const auto dir = fresh_dir("full");
  const auto res = specan::run_experiment(tiny_config(), dir);

  // Map order: (detector, score_name) sorted lexicographically.
  ASSERT_EQ(res.eval.detectors.size(), 4u);
  EXPECT_EQ(res.eval.detectors[0].detector, "deep_ae");
  EXPECT_EQ(res.eval.detectors[0].score_name, "mse");
  EXPECT_EQ(res.eval.detectors[1].detector, "lof");
  EXPECT_EQ(res.eval.detectors[2].score_name, "noise_attention");
  EXPECT_EQ(res.eval.detectors[3].score_name, "reconstruction_error");
  for (const auto& d : res.eval.detectors) {
    EXPECT_EQ(d.samples, 6u);
    EXPECT_GE(d.roc.auc, 0.0);
    EXPECT_LE(d.roc.auc, 1.0);
  }
  // 2 VAE score rows per sample + 1 AE + 1 LOF.
  EXPECT_EQ(res.rows.size(), 6u * 4u);
  ASSERT_TRUE(res.eval.floor_stats.has_value());
  EXPECT_EQ(res.eval.floor_stats->n_abnormal, 3u);
  EXPECT_EQ(res.eval.floor_stats->n_normal, 3u);

  for (const char* name :
       {"config_echo.txt", "train.spgd", "test.spgd", "norm_stats.txt", "vae_model.vaem",
        "vae_loss.csv", "deep_ae_model.vaem", "deep_ae_loss.csv", "scores.csv", "summary.txt",
        "roc_vae_noise_attention.csv", "roc_vae_reconstruction_error.csv", "roc_deep_ae_mse.csv",
        "roc_lof_lof.csv", "hist_vae_noise_attention.csv", "hist_lof_lof.csv"}) {
    EXPECT_TRUE(fs::exists(dir / name)) << name;
  }
  EXPECT_FALSE(fs::exists(dir / "FAILED.txt"));

  const std::string summary = slurp(dir / "summary.txt");
  for (const char* key : {"auc_vae_noise_attention=", "auc_vae_reconstruction_error=",
                          "auc_deep_ae_mse=", "auc_lof_lof=", "samples_lof_lof=6",
                          "floor_delta_mean_abnormal=", "floor_delta_positive_frac_abnormal="}) {
    EXPECT_NE(summary.find(key), std::string::npos) << key;
  }
}

TEST(RunExperiment, RerunIsByteIdentical) {
  const auto cfg = tiny_config();
  const auto dir_a = fresh_dir("rerun_a");
  const auto dir_b = fresh_dir("rerun_b");
  specan::run_experiment(cfg, dir_a);
  specan::run_experiment(cfg, dir_b);
  for (const char* name : {"config_echo.txt", "train.spgd", "test.spgd", "norm_stats.txt",
                           "vae_model.vaem", "deep_ae_model.vaem", "vae_loss.csv", "scores.csv",
                           "summary.txt", "roc_vae_noise_attention.csv", "roc_lof_lof.csv"}) {
    expect_same_bytes(dir_a / name, dir_b / name);
  }
}

TEST(RunExperiment, StandaloneCommandsReproduceThePipeline) {
  const auto cfg = tiny_config();
  const auto dir_ref = fresh_dir("cmd_ref");
  const auto res = specan::run_experiment(cfg, dir_ref);

  const auto dir_synth = fresh_dir("cmd_synth");
  specan::cmd_synth(cfg, dir_synth);
  expect_same_bytes(dir_synth / "train.spgd", dir_ref / "train.spgd");
  expect_same_bytes(dir_synth / "test.spgd", dir_ref / "test.spgd");
  expect_same_bytes(dir_synth / "norm_stats.txt", dir_ref / "norm_stats.txt");

  // cmd_train keeps only the normal rows; the training set is all normal, so
  // it fits the identical model.
  const auto dir_train = fresh_dir("cmd_train");
  specan::cmd_train(cfg, dir_synth / "train.spgd", dir_train);
  expect_same_bytes(dir_train / "vae_model.vaem", dir_ref / "vae_model.vaem");
  expect_same_bytes(dir_train / "vae_loss.csv", dir_ref / "vae_loss.csv");

  auto ae_cfg = cfg;
  ae_cfg.train_model = "deep_ae";
  const auto dir_train_ae = fresh_dir("cmd_train_ae");
  specan::cmd_train(ae_cfg, dir_synth / "train.spgd", dir_train_ae);
  expect_same_bytes(dir_train_ae / "deep_ae_model.vaem", dir_ref / "deep_ae_model.vaem");

  const auto dir_score = fresh_dir("cmd_score");
  specan::cmd_score(cfg, dir_train / "vae_model.vaem", dir_synth / "test.spgd", dir_score);
  const auto vae_only = specan::read_scores_csv(dir_score / "scores.csv");
  ASSERT_EQ(vae_only.size(), 12u);
  for (std::size_t i = 0; i < vae_only.size(); ++i) {
    EXPECT_EQ(vae_only[i].sample_id, res.rows[i].sample_id);
    EXPECT_EQ(vae_only[i].label, res.rows[i].label);
    EXPECT_EQ(vae_only[i].detector, res.rows[i].detector);
    EXPECT_EQ(vae_only[i].score_name, res.rows[i].score_name);
    EXPECT_EQ(vae_only[i].score, res.rows[i].score);
    EXPECT_EQ(vae_only[i].noise_floor_in, res.rows[i].noise_floor_in);
    EXPECT_EQ(vae_only[i].noise_floor_out, res.rows[i].noise_floor_out);
  }

  const auto dir_eval = fresh_dir("cmd_eval");
  const auto rep = specan::cmd_eval(dir_score / "scores.csv", dir_eval);
  ASSERT_EQ(rep.detectors.size(), 2u);
  EXPECT_EQ(specan::auc_of(rep, "vae", "noise_attention"),
            specan::auc_of(res.eval, "vae", "noise_attention"));
  EXPECT_EQ(specan::auc_of(rep, "vae", "reconstruction_error"),
            specan::auc_of(res.eval, "vae", "reconstruction_error"));
  EXPECT_TRUE(fs::exists(dir_eval / "summary.txt"));
}

TEST(RunExperiment, FailureLeavesMarkerFile) {
  auto cfg = tiny_config();
  cfg.run_vae = false;
  cfg.run_deep_ae = false;
  cfg.lof_k = cfg.train_count;  // k must stay below the train size
  const auto dir = fresh_dir("failure");
  EXPECT_THROW(specan::run_experiment(cfg, dir), std::invalid_argument);
  ASSERT_TRUE(fs::exists(dir / "FAILED.txt"));
  EXPECT_NE(slurp(dir / "FAILED.txt").find("lof"), std::string::npos);
}

TEST(EvaluateRows, FloorStatsArithmetic) {
  using specan::ScoreCsvRow;
  std::vector<ScoreCsvRow> rows;
  rows.push_back({0, Label::abnormal, "vae", "noise_attention", 9.0, 1.0, 1.5});
  rows.push_back({1, Label::abnormal, "vae", "noise_attention", 8.0, 1.0, 0.8});
  rows.push_back({2, Label::normal, "vae", "noise_attention", 1.0, 1.0, 1.1});
  // Floors on other detectors or missing floors must not contribute.
  rows.push_back({3, Label::abnormal, "deep_ae", "mse", 5.0, 1.0, 9.0});
  rows.push_back({4, Label::normal, "deep_ae", "mse", 1.0, 1.0, 9.0});

  const auto rep = specan::evaluate_rows(rows);
  ASSERT_TRUE(rep.floor_stats.has_value());
  const auto& f = *rep.floor_stats;
  EXPECT_EQ(f.n_abnormal, 2u);
  EXPECT_EQ(f.n_normal, 1u);
  EXPECT_DOUBLE_EQ(f.mean_delta_abnormal, ((1.5 - 1.0) + (0.8 - 1.0)) / 2.0);
  EXPECT_DOUBLE_EQ(f.mean_delta_normal, 1.1 - 1.0);
  EXPECT_DOUBLE_EQ(f.frac_positive_abnormal, 0.5);
}

TEST(EvaluateRows, FloorStatsNeedBothClasses) {
  using specan::ScoreCsvRow;
  std::vector<ScoreCsvRow> rows;
  rows.push_back({0, Label::abnormal, "vae", "noise_attention", 9.0, 1.0, 1.5});
  // The normal row carries no floors, so the floor population is one-sided.
  rows.push_back({1, Label::normal, "vae", "noise_attention", 1.0, std::nullopt, std::nullopt});
  const auto rep = specan::evaluate_rows(rows);
  EXPECT_FALSE(rep.floor_stats.has_value());
  ASSERT_EQ(rep.detectors.size(), 1u);
  EXPECT_DOUBLE_EQ(rep.detectors[0].roc.auc, 1.0);
}

TEST(EvaluateRows, RejectsEmptyAndMissingDetector) {
  EXPECT_THROW(specan::evaluate_rows({}), std::invalid_argument);
  std::vector<specan::ScoreCsvRow> rows;
  rows.push_back({0, Label::abnormal, "lof", "lof", 2.0, std::nullopt, std::nullopt});
  rows.push_back({1, Label::normal, "lof", "lof", 1.0, std::nullopt, std::nullopt});
  const auto rep = specan::evaluate_rows(rows);
  EXPECT_FALSE(specan::auc_of(rep, "vae", "noise_attention").has_value());
  EXPECT_TRUE(specan::auc_of(rep, "lof", "lof").has_value());
}

}  // namespace

// Command-line front end: synth | train | score | eval | experiment.

#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "specan/specan.hpp"

namespace {

specan::RunConfig load_effective_config(const std::string& config_path, bool seed_set,
                                        std::uint64_t seed) {
  specan::RunConfig cfg;
  if (!config_path.empty()) cfg = specan::load_config(config_path);
  if (seed_set) cfg.seed = seed;
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spectrum anomaly detection pipeline"};
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out_dir = "out";
  std::string model_path;
  std::string dataset_path;
  std::string scores_path;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "key=value config file (defaults when omitted)");
    sub->add_option("--out", out_dir, "output directory")->capture_default_str();
    sub->add_option("--seed", seed, "override the config seed")
        ->each([&](const std::string&) { seed_set = true; });
  };

  CLI::App* synth = app.add_subcommand("synth", "generate train/test spectrogram datasets");
  add_common(synth);

  CLI::App* train = app.add_subcommand("train", "train a detector on a dataset");
  add_common(train);
  train->add_option("--dataset", dataset_path, "input .spgd dataset")->required();

  CLI::App* score = app.add_subcommand("score", "score a dataset with a trained model");
  add_common(score);
  score->add_option("--model", model_path, "trained .vaem model")->required();
  score->add_option("--dataset", dataset_path, "input .spgd dataset")->required();

  CLI::App* eval = app.add_subcommand("eval", "compute ROC curves and summary from scores");
  add_common(eval);
  eval->add_option("--scores", scores_path, "scores.csv produced by score/experiment")
      ->required();

  CLI::App* experiment =
      app.add_subcommand("experiment", "full synth -> train -> score -> eval run");
  add_common(experiment);

  CLI11_PARSE(app, argc, argv);

  try {
    const specan::RunConfig cfg = load_effective_config(config_path, seed_set, seed);
    if (synth->parsed()) {
      specan::cmd_synth(cfg, out_dir);
    } else if (train->parsed()) {
      specan::cmd_train(cfg, dataset_path, out_dir);
    } else if (score->parsed()) {
      specan::cmd_score(cfg, model_path, dataset_path, out_dir);
    } else if (eval->parsed()) {
      specan::cmd_eval(scores_path, out_dir);
    } else if (experiment->parsed()) {
      const specan::ExperimentResult res = specan::run_experiment(cfg, out_dir);
      std::fputs(specan::summary_text(res.eval).c_str(), stdout);
    }
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "invalid argument: %s\n", e.what());
    return 1;
  } catch (const specan::format_error& e) {
    std::fprintf(stderr, "format error: %s\n", e.what());
    return 1;
  } catch (const specan::numeric_error& e) {
    std::fprintf(stderr, "numeric error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}

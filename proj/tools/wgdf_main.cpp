// Command-line front end: train, eval, predict, decompose, gradcheck.

#include <iostream>

#include "CLI11.hpp"
#include "wgdf/harness.hpp"
#include "wgdf/model.hpp"

namespace {

struct CommonFlags {
  std::string config;
  std::string out;
  int64_t seed = -1;
  std::string precision;
};

wgdf::RunConfig load_run_config(const CommonFlags& f) {
  wgdf::RunConfig cfg;
  if (!f.config.empty()) cfg = wgdf::RunConfig::from_file(f.config);
  if (f.seed >= 0) cfg.seed = uint64_t(f.seed);
  if (!f.out.empty()) cfg.output_dir = f.out;
  if (!f.precision.empty()) {
    if (f.precision == "f32")
      cfg.precision = wgdf::Precision::kF32;
    else if (f.precision == "f64")
      cfg.precision = wgdf::Precision::kF64;
    else
      throw wgdf::ConfigError("precision must be f32|f64");
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wavelet-guided dual-frequency change detection"};
  app.require_subcommand(1);

  CommonFlags flags;

  auto* train = app.add_subcommand("train", "Train a model");
  train->add_option("--config", flags.config, "Run config file (key = value)");
  train->add_option("--seed", flags.seed, "Run seed (overrides config)");
  train->add_option("--out", flags.out, "Output directory");
  train->add_option("--precision", flags.precision, "f32 or f64");

  wgdf::EvalOptions eopt;
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint");
  eval->add_option("--checkpoint", eopt.checkpoint, "Checkpoint path")
      ->required();
  eval->add_option("--config", flags.config,
                   "Run config supplying the data source");
  eval->add_option("--seed", flags.seed, "Run seed for synthetic data");
  eval->add_option("--data", eopt.dataset_dir, "Dataset directory (A/B/label)");
  eval->add_option("--threshold", eopt.threshold, "Decision threshold");
  eval->add_option("--out", eopt.output_dir, "Directory for report.tsv");

  wgdf::PredictOptions popt;
  auto* predict = app.add_subcommand("predict", "Predict a change mask");
  predict->add_option("--checkpoint", popt.checkpoint, "Checkpoint path")
      ->required();
  predict->add_option("--image-a", popt.image_a, "First image (P5/P6 netpbm)")
      ->required();
  predict->add_option("--image-b", popt.image_b, "Second image")->required();
  predict->add_option("--out", popt.output_dir, "Output directory")->required();
  predict->add_option("--threshold", popt.threshold, "Decision threshold");

  wgdf::DecomposeOptions dopt;
  auto* decompose =
      app.add_subcommand("decompose", "Write wavelet subbands of an image");
  decompose->add_option("--image", dopt.image, "Input image")->required();
  decompose->add_option("--out", dopt.output_dir, "Output directory")
      ->required();

  std::string gscale = "ops";
  auto* gradcheck =
      app.add_subcommand("gradcheck", "Finite-difference gradient validation");
  gradcheck->add_option("--scale", gscale, "ops | blocks | model");
  gradcheck->add_option("--precision", flags.precision, "must be f64");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) {
      wgdf::cmd_train(load_run_config(flags));
    } else if (eval->parsed()) {
      if (!flags.config.empty()) {
        wgdf::RunConfig cfg = wgdf::RunConfig::from_file(flags.config);
        eopt.synth = cfg.synth;
        eopt.synth_count = cfg.synth_count;
        if (eopt.dataset_dir.empty()) eopt.dataset_dir = cfg.dataset_dir;
        eopt.seed = cfg.seed;
      }
      if (flags.seed >= 0) eopt.seed = uint64_t(flags.seed);
      wgdf::cmd_eval(eopt, std::cout);
    } else if (predict->parsed()) {
      wgdf::cmd_predict(popt);
    } else if (decompose->parsed()) {
      wgdf::cmd_decompose(dopt);
    } else if (gradcheck->parsed()) {
      if (!flags.precision.empty() && flags.precision != "f64")
        throw wgdf::ConfigError("gradcheck requires 64-bit mode");
      wgdf::GradcheckScale scale;
      if (gscale == "ops")
        scale = wgdf::GradcheckScale::kOps;
      else if (gscale == "blocks")
        scale = wgdf::GradcheckScale::kBlocks;
      else if (gscale == "model")
        scale = wgdf::GradcheckScale::kModel;
      else
        throw wgdf::ConfigError("gradcheck scale must be ops|blocks|model");
      if (wgdf::cmd_gradcheck(scale, std::cout) != 0) {
        std::cerr << "error: numeric: gradient check failed\n";
        return 1;
      }
    }
  } catch (const wgdf::Error& e) {
    std::cerr << "error: " << e.kind() << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

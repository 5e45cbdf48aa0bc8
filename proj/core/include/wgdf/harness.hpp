#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "wgdf/metrics.hpp"
#include "wgdf/runconfig.hpp"

namespace wgdf {

struct EpochStats {
  int epoch = 0;
  int steps = 0;
  double mean_loss = 0;
  double f1 = 0, iou = 0, edge_miou = 0;
};

struct TrainOutcome {
  std::filesystem::path metrics_path, checkpoint_path, best_checkpoint_path,
      config_path;
  std::vector<EpochStats> epochs;
  const EpochStats& final_epoch() const { return epochs.back(); }
};

// Full training run: deterministic in (config, seed); writes config echo,
// per-epoch TSV metrics log, final checkpoint and best-F1 checkpoint into
// cfg.output_dir.
TrainOutcome cmd_train(const RunConfig& cfg);

struct EvalOptions {
  std::filesystem::path checkpoint;
  SynthConfig synth;
  int synth_count = 8;
  std::string dataset_dir;  // overrides synthetic data when set
  // Run seed; synthetic data derives from it exactly as in cmd_train, so an
  // eval with the training seed sees the training set.
  uint64_t seed = 0;
  double threshold = 0.5;
  std::string output_dir;  // writes report.tsv when set
};

// Confusion counts are summed over the whole set; Edge mIoU is averaged over
// images. Prints one key<TAB>value line per field.
MetricsReport cmd_eval(const EvalOptions& opt, std::ostream& out);

// Aggregation used by eval and the per-epoch train metrics: confusion summed
// globally, Edge mIoU averaged per image.
MetricsReport aggregate_masks(const std::vector<Mask>& preds,
                              const std::vector<Mask>& gts);

struct PredictOptions {
  std::filesystem::path checkpoint, image_a, image_b;
  std::string output_dir;
  double threshold = 0.5;
};

// Writes probability.pgm (sigmoid * 255, rounded) and mask.pgm (0/255).
void cmd_predict(const PredictOptions& opt);

struct DecomposeOptions {
  std::filesystem::path image;
  std::string output_dir;
};

struct DecomposeSummary {
  // Band order: ll, lh, hl, hh.
  double band_min[4] = {0, 0, 0, 0};
  double band_max[4] = {0, 0, 0, 0};
  double energy_fraction[4] = {0, 0, 0, 0};
  double source_energy = 0;
};

// Writes ll/lh/hl/hh.pgm (min-max normalized) plus summary.txt with the
// normalization bounds and per-band energy fractions.
DecomposeSummary cmd_decompose(const DecomposeOptions& opt);

enum class GradcheckScale { kOps, kBlocks, kModel };

struct GradCheckEntry {
  std::string name;
  double max_err = 0;
  double threshold = 0;
  bool pass() const { return max_err < threshold; }
};

// 64-bit finite-difference validation at the requested granularity.
std::vector<GradCheckEntry> gradcheck_suite(GradcheckScale scale);

// Prints one line per check; returns the number of failures.
int cmd_gradcheck(GradcheckScale scale, std::ostream& out);

}  // namespace wgdf

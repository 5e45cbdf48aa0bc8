#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "wgdf/data.hpp"
#include "wgdf/losses.hpp"
#include "wgdf/model.hpp"
#include "wgdf/optimizer.hpp"

namespace wgdf {

enum class Precision { kF32, kF64 };

// One training/eval run. Serialized as flat `section.key = value` text and
// echoed into the output directory for provenance.
struct RunConfig {
  ModelConfig model;
  LossWeights loss;
  AdamWConfig opt;

  // Exactly one data source: synthetic (default) or a dataset directory.
  SynthConfig synth;
  int synth_count = 8;
  std::string dataset_dir;
  bool augment = false;

  int epochs = 50;
  int batch_size = 8;
  uint64_t seed = 0;
  std::string output_dir = "runs/out";
  Precision precision = Precision::kF32;

  void validate() const;

  // Parses `key = value` lines ('#' comments). Unknown keys are errors.
  static RunConfig from_file(const std::filesystem::path& path);
  static RunConfig from_kv(const std::map<std::string, std::string>& kv);
  std::string to_text() const;
};

std::map<std::string, std::string> parse_kv_file(
    const std::filesystem::path& path);

}  // namespace wgdf

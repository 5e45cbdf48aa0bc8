#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "wgdf/model.hpp"
#include "wgdf/optimizer.hpp"

namespace wgdf {

// Container layout: 8-byte magic, little-endian u64 manifest length, JSON
// manifest (format version, creator, precision, model config, optimizer
// config, ordered entries of name/shape/dtype/offset/nbytes), then the raw
// little-endian tensor payload. Round-trips are bitwise.
inline constexpr char kCheckpointMagic[8] = {'W', 'G', 'D', 'F',
                                             'C', 'K', 'P', 'T'};
inline constexpr int kCheckpointVersion = 1;

struct CheckpointInfo {
  std::string precision;  // "f32" or "f64"
  ModelConfig model;
  bool has_opt_state = false;
};

// Manifest-only read, used to pick the scalar type before a full load.
CheckpointInfo checkpoint_peek(const std::filesystem::path& path);

template <class S>
void checkpoint_save(const std::filesystem::path& path,
                     const WgdfParams<S>& params, const ModelConfig& cfg,
                     const OptState<S>* opt = nullptr);

template <class S>
struct LoadedCheckpoint {
  ModelConfig model;
  WgdfParams<S> params;
  std::optional<OptState<S>> opt;
};

template <class S>
LoadedCheckpoint<S> checkpoint_load(const std::filesystem::path& path);

}  // namespace wgdf

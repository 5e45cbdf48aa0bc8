#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "wgdf/high_freq.hpp"
#include "wgdf/low_freq.hpp"
#include "wgdf/mask.hpp"
#include "wgdf/tensor.hpp"
#include "wgdf/wavelet.hpp"

namespace wgdf {

struct ModelConfig {
  int c_img = 3;
  int c_hf = 32;
  int c_lf = 64;
  int heads = 4;
  int stages = 3;  // DFFE stage count == TR block count
  bool fdid_shared = true;
  Eq2Combine eq2_combine = Eq2Combine::kConcat;
  PcdmCombine pcdm_combine = PcdmCombine::kGate;
  bool positional_encoding = false;
  double classifier_threshold = 0.5;
  uint64_t seed = 0;

  // Throws ConfigError on invalid combinations.
  void validate() const;
};

// The complete learnable set, addressable by hierarchical name (for example
// "hf.dffe.0.conv7x7.w"). Structured fields alias the same storage as the
// named registry.
template <class S>
struct WgdfParams {
  Tensor<S> hf_stem_w, hf_stem_b;             // 3*c_img -> c_hf, 3x3
  std::vector<DffeParams<S>> dffe;            // one per stage
  Tensor<S> head_lh_w, head_lh_b;             // 1x1 subband heads
  Tensor<S> head_hl_w, head_hl_b;
  Tensor<S> head_hh_w, head_hh_b;
  std::vector<FdidParams<S>> fdid;            // size 1 (shared) or 3 (lh,hl,hh)
  Tensor<S> out_lh_w, out_lh_b;               // 1x1, c_hf -> c_img
  Tensor<S> out_hl_w, out_hl_b;
  Tensor<S> out_hh_w, out_hh_b;
  Tensor<S> lf_stem_w, lf_stem_b;             // 1x1, c_img -> c_lf
  std::vector<TrBlockParams<S>> tr;
  PcdmParams<S> pcdm;
  Tensor<S> lf_out_w, lf_out_b;               // 1x1, c_lf -> c_img
  Tensor<S> cls1_w, cls1_b;                   // 3x3, c_img -> 16
  Tensor<S> cls2_w, cls2_b;                   // 1x1, 16 -> 1

  std::vector<std::pair<std::string, Tensor<S>>> named;

  const Tensor<S>* find(std::string_view name) const;
  void zero_grad();
  int64_t param_count() const;
};

// Deterministic from cfg.seed: weights uniform in +-sqrt(6/(fan_in+fan_out)),
// biases 0, layer-norm gain 1 / bias 0.
template <class S>
WgdfParams<S> init_params(const ModelConfig& cfg);

// Optional activation dump: named tensors mirroring the branch structure
// (subbands, stage activations, per-band differences, fused map, logits).
template <class S>
struct ForwardTrace {
  std::vector<std::pair<std::string, Tensor<S>>> entries;
  void put(std::string name, const Tensor<S>& t) {
    entries.emplace_back(std::move(name), t);
  }
  const Tensor<S>* find(std::string_view name) const;
};

// Full assembly: DWT -> dual-branch encoding -> per-band differences ->
// IDWT -> classifier. Returns logits (N, 1, H, W).
template <class S>
Tensor<S> wgdf_forward(const Tensor<S>& a, const Tensor<S>& b,
                       const WgdfParams<S>& params, const ModelConfig& cfg,
                       ForwardTrace<S>* trace = nullptr);

// sigma(logit) > threshold per pixel, one mask per batch item.
template <class S>
std::vector<Mask> classify(const Tensor<S>& logits, double threshold);

// Human-readable parameter table; ends with the total count.
std::string describe(const ModelConfig& cfg);
int64_t param_count(const ModelConfig& cfg);

}  // namespace wgdf

#pragma once

#include <cstdint>
#include <vector>

#include "wgdf/mask.hpp"

namespace wgdf {

struct ConfusionCounts {
  int64_t tp = 0, fp = 0, fn = 0, tn = 0;
  int64_t total() const { return tp + fp + fn + tn; }
  ConfusionCounts& operator+=(const ConfusionCounts& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    tn += o.tn;
    return *this;
  }
  bool operator==(const ConfusionCounts&) const = default;
};

struct Scores {
  double oa = 0, precision = 0, recall = 0, f1 = 0, iou = 0;
};

// Exact pixel counts; inputs must be binary and equally shaped.
ConfusionCounts confusion(const Mask& pred, const Mask& gt);

// Standard ratios with the 0/0 -> 0 convention.
Scores scores(const ConfusionCounts& c);

// Gradient magnitude of the 3x3 Sobel pair under replicate padding,
// thresholded at > 0. Flat fields (all zeros or all ones) produce no edges.
Mask sobel_edges(const Mask& mask);

// One ground-truth change region with the edge maps restricted to its
// dilated bounding box.
struct RegionEdgePair {
  int region_id = 0;
  int y0 = 0, x0 = 0, y1 = 0, x1 = 0;  // inclusive window bounds
  int64_t inter = 0, uni = 0;
  double iou = 0.0;
};

struct EdgeMiouResult {
  double value = 0.0;
  std::vector<RegionEdgePair> regions;
};

// Mean, over the 8-connected components of gt, of the IoU between the Sobel
// edges of pred and gt restricted to each component's bounding box dilated by
// 2 px. Empty gt: 1.0 when pred has no edges either, else 0.0.
EdgeMiouResult edge_miou(const Mask& pred, const Mask& gt);

struct MetricsReport {
  int64_t samples = 0;
  ConfusionCounts counts;  // summed over the whole set
  Scores s;
  double edge_miou = 0.0;  // averaged over images
};

}  // namespace wgdf

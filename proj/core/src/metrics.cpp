#include "wgdf/metrics.hpp"

#include <algorithm>

#include "wgdf/errors.hpp"

namespace wgdf {

ConfusionCounts confusion(const Mask& pred, const Mask& gt) {
  require(pred.h == gt.h && pred.w == gt.w,
          "confusion: mask sizes must match");
  ConfusionCounts c;
  for (size_t i = 0; i < pred.v.size(); ++i) {
    const uint8_t p = pred.v[i], g = gt.v[i];
    require(p <= 1 && g <= 1, "confusion: masks must be binary");
    if (p && g)
      ++c.tp;
    else if (p && !g)
      ++c.fp;
    else if (!p && g)
      ++c.fn;
    else
      ++c.tn;
  }
  return c;
}

Scores scores(const ConfusionCounts& c) {
  require(c.total() > 0, "scores: total count must be positive");
  auto ratio = [](int64_t num, int64_t den) {
    return den == 0 ? 0.0 : double(num) / double(den);
  };
  Scores s;
  s.oa = ratio(c.tp + c.tn, c.total());
  s.precision = ratio(c.tp, c.tp + c.fp);
  s.recall = ratio(c.tp, c.tp + c.fn);
  s.f1 = (s.precision + s.recall) == 0.0
             ? 0.0
             : 2.0 * s.precision * s.recall / (s.precision + s.recall);
  s.iou = ratio(c.tp, c.tp + c.fp + c.fn);
  return s;
}

Mask sobel_edges(const Mask& mask) {
  static constexpr int kGx[3][3] = {{-1, 0, 1}, {-2, 0, 2}, {-1, 0, 1}};
  static constexpr int kGy[3][3] = {{-1, -2, -1}, {0, 0, 0}, {1, 2, 1}};
  Mask out(mask.h, mask.w);
  auto sample = [&](int y, int x) {
    y = std::clamp(y, 0, mask.h - 1);
    x = std::clamp(x, 0, mask.w - 1);
    return int(mask.at(y, x));
  };
  for (int y = 0; y < mask.h; ++y) {
    for (int x = 0; x < mask.w; ++x) {
      int gx = 0, gy = 0;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int v = sample(y + dy, x + dx);
          gx += kGx[dy + 1][dx + 1] * v;
          gy += kGy[dy + 1][dx + 1] * v;
        }
      }
      out.set(y, x, (gx != 0 || gy != 0) ? 1 : 0);
    }
  }
  return out;
}

namespace {

struct Region {
  int y0, x0, y1, x1;  // inclusive bbox
};

// 8-connected components in raster order (deterministic labeling).
std::vector<Region> components8(const Mask& m) {
  std::vector<Region> regions;
  std::vector<int> label(m.v.size(), -1);
  std::vector<int64_t> stack;
  for (int y = 0; y < m.h; ++y) {
    for (int x = 0; x < m.w; ++x) {
      const int64_t start = int64_t(y) * m.w + x;
      if (!m.v[size_t(start)] || label[size_t(start)] >= 0) continue;
      const int id = int(regions.size());
      Region r{y, x, y, x};
      label[size_t(start)] = id;
      stack.assign(1, start);
      while (!stack.empty()) {
        const int64_t cur = stack.back();
        stack.pop_back();
        const int cy = int(cur / m.w), cx = int(cur % m.w);
        r.y0 = std::min(r.y0, cy);
        r.y1 = std::max(r.y1, cy);
        r.x0 = std::min(r.x0, cx);
        r.x1 = std::max(r.x1, cx);
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int ny = cy + dy, nx = cx + dx;
            if (ny < 0 || ny >= m.h || nx < 0 || nx >= m.w) continue;
            const int64_t ni = int64_t(ny) * m.w + nx;
            if (m.v[size_t(ni)] && label[size_t(ni)] < 0) {
              label[size_t(ni)] = id;
              stack.push_back(ni);
            }
          }
        }
      }
      regions.push_back(r);
    }
  }
  return regions;
}

}  // namespace

EdgeMiouResult edge_miou(const Mask& pred, const Mask& gt) {
  require(pred.h == gt.h && pred.w == gt.w, "edge_miou: mask sizes must match");
  EdgeMiouResult res;
  const Mask ep = sobel_edges(pred);
  const Mask eg = sobel_edges(gt);
  const std::vector<Region> regions = components8(gt);
  if (regions.empty()) {
    res.value = ep.count() == 0 ? 1.0 : 0.0;
    return res;
  }
  double sum = 0.0;
  for (size_t i = 0; i < regions.size(); ++i) {
    const Region& r = regions[i];
    RegionEdgePair pair;
    pair.region_id = int(i);
    pair.y0 = std::max(0, r.y0 - 2);
    pair.x0 = std::max(0, r.x0 - 2);
    pair.y1 = std::min(gt.h - 1, r.y1 + 2);
    pair.x1 = std::min(gt.w - 1, r.x1 + 2);
    for (int y = pair.y0; y <= pair.y1; ++y) {
      for (int x = pair.x0; x <= pair.x1; ++x) {
        const bool p = ep.at(y, x) != 0, g = eg.at(y, x) != 0;
        pair.inter += (p && g) ? 1 : 0;
        pair.uni += (p || g) ? 1 : 0;
      }
    }
    pair.iou = pair.uni == 0 ? 0.0 : double(pair.inter) / double(pair.uni);
    sum += pair.iou;
    res.regions.push_back(pair);
  }
  res.value = sum / double(regions.size());
  return res;
}

}  // namespace wgdf

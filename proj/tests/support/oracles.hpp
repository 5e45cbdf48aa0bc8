#pragma once

// Straight-line reference implementations used as independent oracles.
// Everything here works on plain double buffers with explicit loops and no
// calls into the library's tensor engine.

#include <array>
#include <cstdint>
#include <vector>

#include "wgdf/mask.hpp"

namespace oracle {

// Dense 4-d array (n, c, h, w), row-major.
struct Arr {
  int n = 1, c = 1, h = 1, w = 1;
  std::vector<double> v;

  Arr() = default;
  Arr(int n_, int c_, int h_, int w_)
      : n(n_), c(c_), h(h_), w(w_), v(size_t(n_) * c_ * h_ * w_, 0.0) {}

  double& at(int i, int ch, int y, int x) {
    return v[((size_t(i) * c + ch) * h + y) * w + x];
  }
  double at(int i, int ch, int y, int x) const {
    return v[((size_t(i) * c + ch) * h + y) * w + x];
  }
  int64_t numel() const { return int64_t(v.size()); }
};

// Sliding-window convolution, zero padding.
Arr conv2d(const Arr& x, const Arr& w, const std::vector<double>& b,
           int stride, int pad, int dil);

Arr channel_max(const Arr& x);
Arr channel_avg(const Arr& x);
Arr global_avg(const Arr& x);
Arr global_max(const Arr& x);
Arr sigmoid(const Arr& x);
Arr relu(const Arr& x);
Arr absdiff(const Arr& a, const Arr& b);
Arr add(const Arr& a, const Arr& b);
Arr mul(const Arr& a, const Arr& b);
// Broadcast helpers mirroring the attention-map patterns.
Arr mul_spatial_map(const Arr& x, const Arr& map);   // map (n,1,h,w)
Arr mul_channel_map(const Arr& x, const Arr& gates); // gates (n,c,1,1)
Arr concat_channels(const std::vector<Arr>& parts);

// y = x W + b over rows of x; x is (rows, in), w (in, out), b (out).
std::vector<double> dense(const std::vector<double>& x, int rows, int in,
                          const std::vector<double>& w, int out,
                          const std::vector<double>& b);

// Orthonormal Haar analysis via the separable filter pair, rows then
// columns; returns {ll, lh, hl, hh}.
std::array<Arr, 4> haar_filter_bank(const Arr& x);
Arr haar_inverse(const std::array<Arr, 4>& bands);

struct DffeOracleParams {
  Arr conv1x1_w;
  std::vector<double> conv1x1_b;
  Arr conv7x7_w;  // (1, 2, 7, 7)
  std::vector<double> conv7x7_b;
};

// Difference -> compress -> pooled pair -> 7x7 -> sigmoid -> recalibrate.
std::pair<Arr, Arr> dffe(const Arr& t1, const Arr& t2,
                         const DffeOracleParams& p);

struct CbamOracleParams {
  std::vector<double> mlp1_w, mlp1_b;  // (c x hidden), hidden
  std::vector<double> mlp2_w, mlp2_b;  // (hidden x c), c
  int hidden = 1;
  Arr spatial_w;  // (1, 2, 7, 7)
  std::vector<double> spatial_b;
};

Arr cbam(const Arr& x, const CbamOracleParams& p);

struct FdidOracleParams {
  Arr conv3_w, conv5_w, conv7_w;
  std::vector<double> conv3_b, conv5_b, conv7_b;
  CbamOracleParams cbam3, cbam5, cbam7;
  std::vector<double> mlp1_w, mlp1_b, mlp2_w, mlp2_b;
  int mlp_hidden = 1;
  Arr proj_w;
  std::vector<double> proj_b;
};

Arr fdid(const Arr& h1, const Arr& h2, const FdidOracleParams& p);

struct TrOracleParams {
  std::vector<double> ln1_g, ln1_b, ln2_g, ln2_b;
  std::vector<double> wq, wk, wv, wo;  // (c x c)
  std::vector<double> fc1_w, fc1_b;    // (c x 2c)
  std::vector<double> fc2_w, fc2_b;    // (2c x c)
  int heads = 4;
};

// Pre-norm block with explicit per-head attention loops.
Arr tr_block(const Arr& x, const TrOracleParams& p);

struct PcdmOracleParams {
  Arr diff_w, dil7_w, dil5_w, dil3_w, dil1_w, fuse_w, proj_w;
  std::vector<double> diff_b, dil7_b, dil5_b, dil3_b, dil1_b, fuse_b, proj_b;
};

Arr pcdm(const Arr& f1, const Arr& f2, const PcdmOracleParams& p, bool gate);

// ---- metric oracles --------------------------------------------------------

struct Counts {
  int64_t tp = 0, fp = 0, fn = 0, tn = 0;
};
Counts count_pixels(const wgdf::Mask& pred, const wgdf::Mask& gt);

wgdf::Mask sobel(const wgdf::Mask& m);

// Brute-force per-region edge IoU mean; components labeled in raster order.
double edge_miou(const wgdf::Mask& pred, const wgdf::Mask& gt);

}  // namespace oracle

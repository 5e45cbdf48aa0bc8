#pragma once

// Random leaf-backed block parameters and converters to the oracle
// structures, shared by the unit suites and the acceptance runner.

#include <algorithm>

#include "helpers.hpp"
#include "oracles.hpp"
#include "wgdf/high_freq.hpp"
#include "wgdf/low_freq.hpp"

namespace testutil {

template <class S>
wgdf::DffeParams<S> random_dffe(wgdf::Rng& rng, int c) {
  wgdf::DffeParams<S> p;
  p.conv1x1_w = random_tensor<S>(rng, {c / 2, c, 1, 1});
  p.conv1x1_b = random_tensor<S>(rng, {c / 2});
  p.conv7x7_w = random_tensor<S>(rng, {1, 2, 7, 7});
  p.conv7x7_b = random_tensor<S>(rng, {1});
  return p;
}

template <class S>
wgdf::CbamParams<S> random_cbam(wgdf::Rng& rng, int c, int hidden) {
  wgdf::CbamParams<S> p;
  p.mlp1_w = random_tensor<S>(rng, {c, hidden});
  p.mlp1_b = random_tensor<S>(rng, {hidden});
  p.mlp2_w = random_tensor<S>(rng, {hidden, c});
  p.mlp2_b = random_tensor<S>(rng, {c});
  p.spatial_w = random_tensor<S>(rng, {1, 2, 7, 7});
  p.spatial_b = random_tensor<S>(rng, {1});
  return p;
}

template <class S>
wgdf::FdidParams<S> random_fdid(wgdf::Rng& rng, int c) {
  wgdf::FdidParams<S> p;
  p.conv3_w = random_tensor<S>(rng, {c, c, 3, 3});
  p.conv3_b = random_tensor<S>(rng, {c});
  p.conv5_w = random_tensor<S>(rng, {c, c, 5, 5});
  p.conv5_b = random_tensor<S>(rng, {c});
  p.conv7_w = random_tensor<S>(rng, {c, c, 7, 7});
  p.conv7_b = random_tensor<S>(rng, {c});
  const int chid = std::max(1, c / 4);
  p.cbam3 = random_cbam<S>(rng, c, chid);
  p.cbam5 = random_cbam<S>(rng, c, chid);
  p.cbam7 = random_cbam<S>(rng, c, chid);
  const int hid = std::max(1, 3 * c / 4);
  p.mlp1_w = random_tensor<S>(rng, {3 * c, hid});
  p.mlp1_b = random_tensor<S>(rng, {hid});
  p.mlp2_w = random_tensor<S>(rng, {hid, 3 * c});
  p.mlp2_b = random_tensor<S>(rng, {3 * c});
  p.proj_w = random_tensor<S>(rng, {c, 3 * c, 1, 1});
  p.proj_b = random_tensor<S>(rng, {c});
  return p;
}

template <class S>
wgdf::TrBlockParams<S> random_tr(wgdf::Rng& rng, int c, int heads) {
  wgdf::TrBlockParams<S> p;
  p.heads = heads;
  p.ln1_g = random_tensor<S>(rng, {c}, 0.5, 1.5);
  p.ln1_b = random_tensor<S>(rng, {c});
  p.wq = random_tensor<S>(rng, {c, c});
  p.wk = random_tensor<S>(rng, {c, c});
  p.wv = random_tensor<S>(rng, {c, c});
  p.wo = random_tensor<S>(rng, {c, c});
  p.ln2_g = random_tensor<S>(rng, {c}, 0.5, 1.5);
  p.ln2_b = random_tensor<S>(rng, {c});
  p.fc1_w = random_tensor<S>(rng, {c, 2 * c});
  p.fc1_b = random_tensor<S>(rng, {2 * c});
  p.fc2_w = random_tensor<S>(rng, {2 * c, c});
  p.fc2_b = random_tensor<S>(rng, {c});
  return p;
}

template <class S>
wgdf::PcdmParams<S> random_pcdm(wgdf::Rng& rng, int c) {
  wgdf::PcdmParams<S> p;
  p.diff_w = random_tensor<S>(rng, {c, c, 3, 3});
  p.diff_b = random_tensor<S>(rng, {c});
  p.dil7_w = random_tensor<S>(rng, {c, c, 3, 3});
  p.dil7_b = random_tensor<S>(rng, {c});
  p.dil5_w = random_tensor<S>(rng, {c, c, 3, 3});
  p.dil5_b = random_tensor<S>(rng, {c});
  p.dil3_w = random_tensor<S>(rng, {c, c, 3, 3});
  p.dil3_b = random_tensor<S>(rng, {c});
  p.dil1_w = random_tensor<S>(rng, {c, c, 3, 3});
  p.dil1_b = random_tensor<S>(rng, {c});
  p.fuse_w = random_tensor<S>(rng, {c, 2 * c, 3, 3});
  p.fuse_b = random_tensor<S>(rng, {c});
  p.proj_w = random_tensor<S>(rng, {c, c, 1, 1});
  p.proj_b = random_tensor<S>(rng, {c});
  return p;
}

inline std::vector<double> to_vec(const wgdf::Tensor<double>& t) {
  return std::vector<double>(t.data().begin(), t.data().end());
}

inline oracle::DffeOracleParams to_oracle(const wgdf::DffeParams<double>& p) {
  oracle::DffeOracleParams o;
  o.conv1x1_w = to_arr(p.conv1x1_w);
  o.conv1x1_b = to_vec(p.conv1x1_b);
  o.conv7x7_w = to_arr(p.conv7x7_w);
  o.conv7x7_b = to_vec(p.conv7x7_b);
  return o;
}

inline oracle::CbamOracleParams to_oracle(const wgdf::CbamParams<double>& p) {
  oracle::CbamOracleParams o;
  o.mlp1_w = to_vec(p.mlp1_w);
  o.mlp1_b = to_vec(p.mlp1_b);
  o.mlp2_w = to_vec(p.mlp2_w);
  o.mlp2_b = to_vec(p.mlp2_b);
  o.hidden = p.mlp1_w.dim(1);
  o.spatial_w = to_arr(p.spatial_w);
  o.spatial_b = to_vec(p.spatial_b);
  return o;
}

inline oracle::FdidOracleParams to_oracle(const wgdf::FdidParams<double>& p) {
  oracle::FdidOracleParams o;
  o.conv3_w = to_arr(p.conv3_w);
  o.conv3_b = to_vec(p.conv3_b);
  o.conv5_w = to_arr(p.conv5_w);
  o.conv5_b = to_vec(p.conv5_b);
  o.conv7_w = to_arr(p.conv7_w);
  o.conv7_b = to_vec(p.conv7_b);
  o.cbam3 = to_oracle(p.cbam3);
  o.cbam5 = to_oracle(p.cbam5);
  o.cbam7 = to_oracle(p.cbam7);
  o.mlp1_w = to_vec(p.mlp1_w);
  o.mlp1_b = to_vec(p.mlp1_b);
  o.mlp2_w = to_vec(p.mlp2_w);
  o.mlp2_b = to_vec(p.mlp2_b);
  o.mlp_hidden = p.mlp1_w.dim(1);
  o.proj_w = to_arr(p.proj_w);
  o.proj_b = to_vec(p.proj_b);
  return o;
}

inline oracle::TrOracleParams to_oracle(const wgdf::TrBlockParams<double>& p) {
  oracle::TrOracleParams o;
  o.ln1_g = to_vec(p.ln1_g);
  o.ln1_b = to_vec(p.ln1_b);
  o.ln2_g = to_vec(p.ln2_g);
  o.ln2_b = to_vec(p.ln2_b);
  o.wq = to_vec(p.wq);
  o.wk = to_vec(p.wk);
  o.wv = to_vec(p.wv);
  o.wo = to_vec(p.wo);
  o.fc1_w = to_vec(p.fc1_w);
  o.fc1_b = to_vec(p.fc1_b);
  o.fc2_w = to_vec(p.fc2_w);
  o.fc2_b = to_vec(p.fc2_b);
  o.heads = p.heads;
  return o;
}

inline oracle::PcdmOracleParams to_oracle(const wgdf::PcdmParams<double>& p) {
  oracle::PcdmOracleParams o;
  o.diff_w = to_arr(p.diff_w);
  o.diff_b = to_vec(p.diff_b);
  o.dil7_w = to_arr(p.dil7_w);
  o.dil7_b = to_vec(p.dil7_b);
  o.dil5_w = to_arr(p.dil5_w);
  o.dil5_b = to_vec(p.dil5_b);
  o.dil3_w = to_arr(p.dil3_w);
  o.dil3_b = to_vec(p.dil3_b);
  o.dil1_w = to_arr(p.dil1_w);
  o.dil1_b = to_vec(p.dil1_b);
  o.fuse_w = to_arr(p.fuse_w);
  o.fuse_b = to_vec(p.fuse_b);
  o.proj_w = to_arr(p.proj_w);
  o.proj_b = to_vec(p.proj_b);
  return o;
}

}  // namespace testutil

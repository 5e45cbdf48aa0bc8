#include <ostream>

#include "wgdf/gradcheck.hpp"
#include "wgdf/harness.hpp"
#include "wgdf/losses.hpp"
#include "wgdf/model.hpp"
#include "wgdf/ops.hpp"
#include "wgdf/rng.hpp"
#include "wgdf/wavelet.hpp"

namespace wgdf {

namespace {

using T = Tensor<double>;
using Fn = std::function<T(const std::vector<T>&)>;

T randt(Rng& rng, const Shape& shape, double lo = -1.0, double hi = 1.0) {
  std::vector<double> v(size_t(shape_numel(shape)));
  for (double& x : v) x = rng.uniform(lo, hi);
  return T::from_vector(shape, std::move(v), false);
}

// Random projection to a scalar so every output element influences the loss.
// Takes the generator by value: the projection must be the same fixed tensor
// on every re-evaluation inside grad_check or finite differences would
// compare different functions.
T project(const T& t, Rng rng) {
  return sum_all(hadamard(t, randt(rng, t.shape())));
}

struct Suite {
  std::vector<GradCheckEntry> entries;
  Rng rng{20240901};

  // Runs `instances` random repetitions and keeps the worst error.
  void check(const std::string& name, double threshold, int instances,
             const std::function<double(Rng&)>& run) {
    double worst = 0;
    for (int i = 0; i < instances; ++i) worst = std::max(worst, run(rng));
    entries.push_back({name, worst, threshold});
  }
};

constexpr double kOpTol = 1e-4;
constexpr double kBlockTol = 1e-3;
constexpr int kOpInstances = 20;

void ops_scale(Suite& s) {
  s.check("op.add", kOpTol, kOpInstances, [](Rng& rng) {
    T a = randt(rng, {2, 3, 4, 4}), b = randt(rng, {2, 3, 4, 4});
    Rng prj(rng.next_u64());
    return grad_check(
        [&](const std::vector<T>& in) {
          return project(add(in[0], in[1]), prj);
        },
        {a, b});
  });
  s.check("op.add.broadcast_spatial", kOpTol, kOpInstances, [](Rng& rng) {
    T a = randt(rng, {2, 3, 4, 4}), b = randt(rng, {2, 1, 4, 4});
    Rng prj(rng.next_u64());
    return grad_check(
        [&](const std::vector<T>& in) {
          return project(add(in[0], in[1]), prj);
        },
        {a, b});
  });
  s.check("op.sub", kOpTol, kOpInstances, [](Rng& rng) {
    T a = randt(rng, {2, 3, 4, 4}), b = randt(rng, {2, 3, 4, 4});
    Rng prj(rng.next_u64());
    return grad_check(
        [&](const std::vector<T>& in) {
          return project(sub(in[0], in[1]), prj);
        },
        {a, b});
  });
  s.check("op.hadamard.broadcast_channel", kOpTol, kOpInstances, [](Rng& rng) {
    T a = randt(rng, {2, 3, 4, 4}), b = randt(rng, {2, 3, 1, 1});
    Rng prj(rng.next_u64());
    return grad_check(
        [&](const std::vector<T>& in) {
          return project(hadamard(in[0], in[1]), prj);
        },
        {a, b});
  });
  s.check("op.divide", kOpTol, kOpInstances, [](Rng& rng) {
    T a = randt(rng, {8}), b = randt(rng, {8}, 0.5, 2.0);
    Rng prj(rng.next_u64());
    return grad_check(
        [&](const std::vector<T>& in) {
          return project(divide(in[0], in[1]), prj);
        },
        {a, b});
  });
  s.check("op.abs", kOpTol, kOpInstances, [](Rng& rng) {
    // Keep clear of the kink at zero where the subgradient is defined as 0.
    T a = randt(rng, {3, 5}, 0.2, 1.0);
    T sign = randt(rng, {3, 5});
    std::vector<double> v(a.data().begin(), a.data().end());
    for (size_t i = 0; i < v.size(); ++i)
      if (sign.data()[i] < 0) v[i] = -v[i];
    a = T::from_vector(a.shape(), std::move(v), false);
    Rng prj(rng.next_u64());
    return grad_check(
        [&](const std::vector<T>& in) { return project(abs(in[0]), prj); },
        {a});
  });
  s.check("op.sigmoid", kOpTol, kOpInstances, [](Rng& rng) {
    T a = randt(rng, {4, 4}, -3.0, 3.0);
    Rng prj(rng.next_u64());
    return grad_check(
        [&](const std::vector<T>& in) { return project(sigmoid(in[0]), prj); },
        {a});
  });
  s.check("op.relu", kOpTol, kOpInstances, [](Rng& rng) {
    T a = randt(rng, {4, 4}, 0.2, 1.0);
    T sign = randt(rng, {4, 4});
    std::vector<double> v(a.data().begin(), a.data().end());
    for (size_t i = 0; i < v.size(); ++i)
      if (sign.data()[i] < 0) v[i] = -v[i];
    a = T::from_vector(a.shape(), std::move(v), false);
    Rng prj(rng.next_u64());
    return grad_check(
        [&](const std::vector<T>& in) { return project(relu(in[0]), prj); },
        {a});
  });
  s.check("op.log", kOpTol, kOpInstances, [](Rng& rng) {
    T a = randt(rng, {6}, 0.2, 3.0);
    Rng prj(rng.next_u64());
    return grad_check(
        [&](const std::vector<T>& in) { return project(log(in[0]), prj); },
        {a});
  });
  s.check("op.clamp", kOpTol, kOpInstances, [](Rng& rng) {
    T a = randt(rng, {6}, 0.3, 0.7);  // interior of [0.1, 0.9]
    Rng prj(rng.next_u64());
    return grad_check(
        [&](const std::vector<T>& in) {
          return project(clamp(in[0], 0.1, 0.9), prj);
        },
        {a});
  });
  s.check("op.pool.channel_max", kOpTol, kOpInstances, [](Rng& rng) {
    T a = randt(rng, {2, 4, 3, 3});
    Rng prj(rng.next_u64());
    return grad_check(
        [&](const std::vector<T>& in) {
          return project(pool(in[0], PoolMode::kChannelMax), prj);
        },
        {a});
  });
  s.check("op.pool.channel_avg", kOpTol, kOpInstances, [](Rng& rng) {
    T a = randt(rng, {2, 4, 3, 3});
    Rng prj(rng.next_u64());
    return grad_check(
        [&](const std::vector<T>& in) {
          return project(pool(in[0], PoolMode::kChannelAvg), prj);
        },
        {a});
  });
  s.check("op.pool.global_avg", kOpTol, kOpInstances, [](Rng& rng) {
    T a = randt(rng, {2, 4, 3, 3});
    Rng prj(rng.next_u64());
    return grad_check(
        [&](const std::vector<T>& in) {
          return project(pool(in[0], PoolMode::kGlobalAvg), prj);
        },
        {a});
  });
  s.check("op.pool.global_max", kOpTol, kOpInstances, [](Rng& rng) {
    T a = randt(rng, {2, 4, 3, 3});
    Rng prj(rng.next_u64());
    return grad_check(
        [&](const std::vector<T>& in) {
          return project(pool(in[0], PoolMode::kGlobalMax), prj);
        },
        {a});
  });
  s.check("op.dense", kOpTol, kOpInstances, [](Rng& rng) {
    T x = randt(rng, {3, 5}), w = randt(rng, {5, 4}), b = randt(rng, {4});
    Rng prj(rng.next_u64());
    return grad_check(
        [&](const std::vector<T>& in) {
          return project(dense(in[0], in[1], in[2]), prj);
        },
        {x, w, b});
  });
  s.check("op.matmul.batched", kOpTol, kOpInstances, [](Rng& rng) {
    T a = randt(rng, {2, 2, 3, 4}), b = randt(rng, {2, 2, 4, 3});
    Rng prj(rng.next_u64());
    return grad_check(
        [&](const std::vector<T>& in) {
          return project(matmul(in[0], in[1]), prj);
        },
        {a, b});
  });
  s.check("op.matmul.shared_rhs", kOpTol, kOpInstances, [](Rng& rng) {
    T a = randt(rng, {3, 4, 5}), b = randt(rng, {5, 2});
    Rng prj(rng.next_u64());
    return grad_check(
        [&](const std::vector<T>& in) {
          return project(matmul(in[0], in[1]), prj);
        },
        {a, b});
  });
  s.check("op.concat", kOpTol, kOpInstances, [](Rng& rng) {
    T a = randt(rng, {1, 2, 3, 3}), b = randt(rng, {1, 3, 3, 3});
    Rng prj(rng.next_u64());
    return grad_check(
        [&](const std::vector<T>& in) {
          return project(concat<double>({in[0], in[1]}, 1), prj);
        },
        {a, b});
  });
  s.check("op.softmax", kOpTol, kOpInstances, [](Rng& rng) {
    T a = randt(rng, {3, 6}, -2.0, 2.0);
    Rng prj(rng.next_u64());
    return grad_check(
        [&](const std::vector<T>& in) { return project(softmax(in[0], 1), prj); },
        {a});
  });
  s.check("op.layer_norm", kOpTol, kOpInstances, [](Rng& rng) {
    T x = randt(rng, {4, 6}), g = randt(rng, {6}, 0.5, 1.5),
      b = randt(rng, {6});
    Rng prj(rng.next_u64());
    return grad_check(
        [&](const std::vector<T>& in) {
          return project(layer_norm(in[0], in[1], in[2]), prj);
        },
        {x, g, b});
  });
  s.check("op.reshape_permute", kOpTol, kOpInstances, [](Rng& rng) {
    T a = randt(rng, {2, 3, 4});
    Rng prj(rng.next_u64());
    return grad_check(
        [&](const std::vector<T>& in) {
          return project(permute(reshape(in[0], {2, 12}), {1, 0}), prj);
        },
        {a});
  });
  s.check("op.conv2d.k3", kOpTol, kOpInstances, [](Rng& rng) {
    T x = randt(rng, {1, 2, 6, 6}), w = randt(rng, {3, 2, 3, 3}),
      b = randt(rng, {3});
    Rng prj(rng.next_u64());
    return grad_check(
        [&](const std::vector<T>& in) {
          return project(conv2d(in[0], in[1], in[2], 1, 1, 1), prj);
        },
        {x, w, b});
  });
  s.check("op.conv2d.stride2", kOpTol, kOpInstances, [](Rng& rng) {
    T x = randt(rng, {1, 2, 7, 7}), w = randt(rng, {2, 2, 3, 3}),
      b = randt(rng, {2});
    Rng prj(rng.next_u64());
    return grad_check(
        [&](const std::vector<T>& in) {
          return project(conv2d(in[0], in[1], in[2], 2, 1, 1), prj);
        },
        {x, w, b});
  });
  s.check("op.conv2d.dilated", kOpTol, kOpInstances, [](Rng& rng) {
    T x = randt(rng, {1, 2, 8, 8}), w = randt(rng, {2, 2, 3, 3}),
      b = randt(rng, {2});
    Rng prj(rng.next_u64());
    return grad_check(
        [&](const std::vector<T>& in) {
          return project(conv2d(in[0], in[1], in[2], 1, 3, 3), prj);
        },
        {x, w, b});
  });
  s.check("op.attention", kOpTol, kOpInstances, [](Rng& rng) {
    T q = randt(rng, {1, 2, 5, 3}), k = randt(rng, {1, 2, 5, 3}),
      v = randt(rng, {1, 2, 5, 3});
    Rng prj(rng.next_u64());
    return grad_check(
        [&](const std::vector<T>& in) {
          return project(attention(in[0], in[1], in[2]), prj);
        },
        {q, k, v});
  });
  s.check("op.dwt2", kOpTol, kOpInstances, [](Rng& rng) {
    T x = randt(rng, {1, 2, 6, 6});
    Rng prj(rng.next_u64());
    return grad_check(
        [&](const std::vector<T>& in) {
          auto sb = dwt2(in[0]);
          return add(add(project(sb.ll, prj), project(sb.lh, prj)),
                     add(project(sb.hl, prj), project(sb.hh, prj)));
        },
        {x});
  });
  s.check("op.idwt2", kOpTol, kOpInstances, [](Rng& rng) {
    T ll = randt(rng, {1, 2, 3, 3}), lh = randt(rng, {1, 2, 3, 3}),
      hl = randt(rng, {1, 2, 3, 3}), hh = randt(rng, {1, 2, 3, 3});
    Rng prj(rng.next_u64());
    return grad_check(
        [&](const std::vector<T>& in) {
          return project(idwt2(Subbands<double>{in[0], in[1], in[2], in[3]}),
                         prj);
        },
        {ll, lh, hl, hh});
  });
  s.check("op.losses", kOpTol, kOpInstances, [](Rng& rng) {
    T y = randt(rng, {2, 1, 4, 4}, 0.0, 1.0);
    T yhat = randt(rng, {2, 1, 4, 4}, 0.05, 0.95);
    return grad_check(
        [&](const std::vector<T>& in) {
          return total_loss(in[0], in[1], LossWeights{});
        },
        {y, yhat});
  });
}

// Builds leaf-backed block parameters so finite differences cover them.
void blocks_scale(Suite& s) {
  constexpr int kBlockInstances = 3;
  s.check("block.dffe", kBlockTol, kBlockInstances, [](Rng& rng) {
    const int c = 4;
    T t1 = randt(rng, {1, c, 6, 6}), t2 = randt(rng, {1, c, 6, 6});
    T cw = randt(rng, {c / 2, c, 1, 1}), cb = randt(rng, {c / 2});
    T sw = randt(rng, {1, 2, 7, 7}), sb = randt(rng, {1});
    Rng prj(rng.next_u64());
    return grad_check(
        [&](const std::vector<T>& in) {
          DffeParams<double> p{in[2], in[3], in[4], in[5]};
          auto r = dffe_forward(in[0], in[1], p);
          return add(project(r.out1, prj), project(r.out2, prj));
        },
        {t1, t2, cw, cb, sw, sb});
  });
  s.check("block.cbam", kBlockTol, kBlockInstances, [](Rng& rng) {
    const int c = 4, hidden = 1;
    T x = randt(rng, {1, c, 6, 6});
    T m1w = randt(rng, {c, hidden}), m1b = randt(rng, {hidden});
    T m2w = randt(rng, {hidden, c}), m2b = randt(rng, {c});
    T spw = randt(rng, {1, 2, 7, 7}), spb = randt(rng, {1});
    Rng prj(rng.next_u64());
    return grad_check(
        [&](const std::vector<T>& in) {
          CbamParams<double> p{in[1], in[2], in[3], in[4], in[5], in[6]};
          return project(cbam(in[0], p), prj);
        },
        {x, m1w, m1b, m2w, m2b, spw, spb});
  });
  s.check("block.fdid", kBlockTol, kBlockInstances, [](Rng& rng) {
    const int c = 4, c3 = 12, hid = 3, chid = 1;
    T h1 = randt(rng, {1, c, 6, 6}), h2 = randt(rng, {1, c, 6, 6});
    std::vector<T> leaves = {h1, h2};
    auto push = [&](const Shape& shape) {
      leaves.push_back(randt(rng, shape));
      return leaves.back();
    };
    // conv3/5/7 + 3 cbams + channel mlp + proj, in forward order.
    push({c, c, 3, 3}); push({c});
    push({c, c, 5, 5}); push({c});
    push({c, c, 7, 7}); push({c});
    for (int i = 0; i < 3; ++i) {
      push({c, chid}); push({chid});
      push({chid, c}); push({c});
      push({1, 2, 7, 7}); push({1});
    }
    push({c3, hid}); push({hid});
    push({hid, c3}); push({c3});
    push({c, c3, 1, 1}); push({c});
    Rng prj(rng.next_u64());
    return grad_check(
        [&](const std::vector<T>& in) {
          size_t i = 2;
          auto next = [&]() { return in[i++]; };
          FdidParams<double> p;
          p.conv3_w = next(); p.conv3_b = next();
          p.conv5_w = next(); p.conv5_b = next();
          p.conv7_w = next(); p.conv7_b = next();
          for (CbamParams<double>* cp : {&p.cbam3, &p.cbam5, &p.cbam7}) {
            cp->mlp1_w = next(); cp->mlp1_b = next();
            cp->mlp2_w = next(); cp->mlp2_b = next();
            cp->spatial_w = next(); cp->spatial_b = next();
          }
          p.mlp1_w = next(); p.mlp1_b = next();
          p.mlp2_w = next(); p.mlp2_b = next();
          p.proj_w = next(); p.proj_b = next();
          return project(fdid_forward(in[0], in[1], p).h_diff, prj);
        },
        leaves);
  });
  s.check("block.tr", kBlockTol, kBlockInstances, [](Rng& rng) {
    const int c = 8;
    T x = randt(rng, {1, c, 4, 4});
    std::vector<T> leaves = {x};
    auto push = [&](const Shape& shape, double lo = -1.0, double hi = 1.0) {
      leaves.push_back(randt(rng, shape, lo, hi));
    };
    push({c}, 0.5, 1.5); push({c});            // ln1
    push({c, c}); push({c, c}); push({c, c}); push({c, c});  // q k v o
    push({c}, 0.5, 1.5); push({c});            // ln2
    push({c, 2 * c}); push({2 * c});           // fc1
    push({2 * c, c}); push({c});               // fc2
    Rng prj(rng.next_u64());
    return grad_check(
        [&](const std::vector<T>& in) {
          TrBlockParams<double> p;
          size_t i = 1;
          auto next = [&]() { return in[i++]; };
          p.ln1_g = next(); p.ln1_b = next();
          p.wq = next(); p.wk = next(); p.wv = next(); p.wo = next();
          p.ln2_g = next(); p.ln2_b = next();
          p.fc1_w = next(); p.fc1_b = next();
          p.fc2_w = next(); p.fc2_b = next();
          p.heads = 4;
          return project(tr_block(in[0], p), prj);
        },
        leaves);
  });
  s.check("block.pcdm", kBlockTol, kBlockInstances, [](Rng& rng) {
    const int c = 4;
    T f1 = randt(rng, {1, c, 6, 6}), f2 = randt(rng, {1, c, 6, 6});
    std::vector<T> leaves = {f1, f2};
    auto push = [&](const Shape& shape) { leaves.push_back(randt(rng, shape)); };
    push({c, c, 3, 3}); push({c});      // diff
    push({c, c, 3, 3}); push({c});      // dil7
    push({c, c, 3, 3}); push({c});      // dil5
    push({c, c, 3, 3}); push({c});      // dil3
    push({c, c, 3, 3}); push({c});      // dil1
    push({c, 2 * c, 3, 3}); push({c});  // fuse
    push({c, c, 1, 1}); push({c});      // proj
    Rng prj(rng.next_u64());
    return grad_check(
        [&](const std::vector<T>& in) {
          PcdmParams<double> p;
          size_t i = 2;
          auto next = [&]() { return in[i++]; };
          p.diff_w = next(); p.diff_b = next();
          p.dil7_w = next(); p.dil7_b = next();
          p.dil5_w = next(); p.dil5_b = next();
          p.dil3_w = next(); p.dil3_b = next();
          p.dil1_w = next(); p.dil1_b = next();
          p.fuse_w = next(); p.fuse_b = next();
          p.proj_w = next(); p.proj_b = next();
          return project(pcdm_forward(in[0], in[1], p).d_ll, prj);
        },
        leaves);
  });
}

void model_scale(Suite& s) {
  s.check("model.loss_input_grad", kBlockTol, 1, [](Rng& rng) {
    ModelConfig cfg;
    cfg.c_hf = 4;
    cfg.c_lf = 8;
    cfg.heads = 4;
    cfg.stages = 3;
    cfg.seed = 7;
    auto params = init_params<double>(cfg);
    T a = randt(rng, {1, 3, 16, 16}, 0.0, 1.0);
    T b = randt(rng, {1, 3, 16, 16}, 0.0, 1.0);
    std::vector<double> gt(size_t(16 * 16));
    for (double& g : gt) g = rng.uniform() < 0.3 ? 1.0 : 0.0;
    T y = T::from_vector({1, 1, 16, 16}, std::move(gt), false);
    return grad_check(
        [&](const std::vector<T>& in) {
          Tensor<double> logits = wgdf_forward(in[0], in[1], params, cfg);
          return total_loss(y, sigmoid(logits), LossWeights{});
        },
        {a, b});
  });
}

}  // namespace

std::vector<GradCheckEntry> gradcheck_suite(GradcheckScale scale) {
  Suite s;
  switch (scale) {
    case GradcheckScale::kOps: ops_scale(s); break;
    case GradcheckScale::kBlocks: blocks_scale(s); break;
    case GradcheckScale::kModel: model_scale(s); break;
  }
  return std::move(s.entries);
}

int cmd_gradcheck(GradcheckScale scale, std::ostream& out) {
  auto entries = gradcheck_suite(scale);
  int failures = 0;
  for (const auto& e : entries) {
    out << (e.pass() ? "pass" : "FAIL") << "\t" << e.name << "\tmax_err="
        << e.max_err << "\tthreshold=" << e.threshold << "\n";
    if (!e.pass()) ++failures;
  }
  return failures;
}

}  // namespace wgdf

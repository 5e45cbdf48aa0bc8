#include "wgdf/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <ostream>

#include "wgdf/checkpoint.hpp"
#include "wgdf/image_io.hpp"
#include "wgdf/losses.hpp"
#include "wgdf/ops.hpp"
#include "wgdf/wavelet.hpp"

namespace wgdf {

namespace {

// Fixed-width numeric formatting keeps logs byte-stable across runs.
std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

// Sub-stream tags for deriving independent generators from the run seed.
enum : uint64_t { kStreamModel = 1, kStreamData = 2, kStreamShuffle = 3, kStreamAugment = 4 };

template <class S>
std::vector<Sample<S>> load_samples(const SynthConfig& synth, int synth_count,
                                    const std::string& dataset_dir,
                                    uint64_t run_seed) {
  std::vector<Sample<S>> samples;
  if (!dataset_dir.empty()) {
    samples = load_dataset<S>(dataset_dir);
  } else {
    SynthConfig sc = synth;
    sc.seed = Rng::mix(run_seed + kStreamData, synth.seed);
    for (int i = 0; i < synth_count; ++i)
      samples.push_back(synth_pair<S>(sc, i));
  }
  if (samples.empty()) throw IoError("data source produced no samples");
  const int h = samples[0].a.dim(1), w = samples[0].a.dim(2);
  for (const auto& s : samples)
    if (s.a.dim(1) != h || s.a.dim(2) != w)
      throw IoError("all samples must share one size; sample " + s.id +
                    " differs");
  if (h % 2 != 0 || w % 2 != 0)
    throw ContractError("sample size must be even for the wavelet stage");
  return samples;
}

// Stacks samples into batch tensors: a/b (B,3,H,W) and gt (B,1,H,W).
template <class S>
struct Batch {
  Tensor<S> a, b, gt;
  std::vector<const Mask*> masks;
};

template <class S>
Batch<S> make_batch(const std::vector<Sample<S>>& samples,
                    const std::vector<int>& idx, size_t lo, size_t hi) {
  const int c = samples[0].a.dim(0), h = samples[0].a.dim(1),
            w = samples[0].a.dim(2);
  const int bn = int(hi - lo);
  std::vector<S> av(size_t(bn) * c * h * w), bv(av.size());
  std::vector<S> gv(size_t(bn) * h * w);
  Batch<S> out;
  for (int i = 0; i < bn; ++i) {
    const Sample<S>& s = samples[size_t(idx[lo + size_t(i)])];
    std::copy_n(s.a.data().data(), s.a.numel(),
                av.data() + int64_t(i) * c * h * w);
    std::copy_n(s.b.data().data(), s.b.numel(),
                bv.data() + int64_t(i) * c * h * w);
    for (int64_t p = 0; p < int64_t(h) * w; ++p)
      gv[size_t(int64_t(i) * h * w + p)] = S(s.gt.v[size_t(p)]);
    out.masks.push_back(&s.gt);
  }
  out.a = Tensor<S>::from_vector({bn, c, h, w}, std::move(av), false);
  out.b = Tensor<S>::from_vector({bn, c, h, w}, std::move(bv), false);
  out.gt = Tensor<S>::from_vector({bn, 1, h, w}, std::move(gv), false);
  return out;
}

template <class S>
struct EvalAccum {
  ConfusionCounts counts;
  double edge_sum = 0;
  int64_t images = 0;

  void add(const std::vector<Mask>& preds, const std::vector<const Mask*>& gts) {
    for (size_t i = 0; i < preds.size(); ++i) {
      counts += confusion(preds[i], *gts[i]);
      edge_sum += edge_miou(preds[i], *gts[i]).value;
      ++images;
    }
  }
  MetricsReport report() const {
    MetricsReport r;
    r.samples = images;
    r.counts = counts;
    r.s = scores(counts);
    r.edge_miou = images == 0 ? 0.0 : edge_sum / double(images);
    return r;
  }
};

// Forward over the whole set without recording gradients.
template <class S>
MetricsReport evaluate_set(const std::vector<Sample<S>>& samples,
                           const WgdfParams<S>& params, const ModelConfig& cfg,
                           int batch_size, double threshold) {
  NoGradGuard no_grad;
  std::vector<int> idx(samples.size());
  std::iota(idx.begin(), idx.end(), 0);
  EvalAccum<S> acc;
  for (size_t lo = 0; lo < samples.size(); lo += size_t(batch_size)) {
    const size_t hi = std::min(samples.size(), lo + size_t(batch_size));
    Batch<S> batch = make_batch(samples, idx, lo, hi);
    Tensor<S> logits = wgdf_forward(batch.a, batch.b, params, cfg);
    acc.add(classify(logits, threshold), batch.masks);
  }
  return acc.report();
}

template <class S>
TrainOutcome train_impl(const RunConfig& cfg) {
  namespace fs = std::filesystem;
  fs::create_directories(cfg.output_dir);
  TrainOutcome out;
  out.config_path = fs::path(cfg.output_dir) / "config.txt";
  out.metrics_path = fs::path(cfg.output_dir) / "metrics.tsv";
  out.checkpoint_path = fs::path(cfg.output_dir) / "checkpoint.wgdf";
  out.best_checkpoint_path = fs::path(cfg.output_dir) / "best.wgdf";

  {
    std::ofstream cf(out.config_path);
    if (!cf) throw IoError("cannot write " + out.config_path.string());
    cf << cfg.to_text();
  }

  auto samples = load_samples<S>(cfg.synth, cfg.synth_count, cfg.dataset_dir,
                                 cfg.seed);

  ModelConfig mcfg = cfg.model;
  mcfg.seed = Rng::mix(cfg.seed + kStreamModel, cfg.model.seed);
  WgdfParams<S> params = init_params<S>(mcfg);
  OptState<S> opt = OptState<S>::init(cfg.opt, params);

  std::ofstream log(out.metrics_path);
  if (!log) throw IoError("cannot write " + out.metrics_path.string());
  log << "epoch\tsteps\tmean_loss\tf1\tiou\tedge_miou\n";

  double best_f1 = -1.0;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::vector<int> idx(samples.size());
    std::iota(idx.begin(), idx.end(), 0);
    Rng shuffle_rng(Rng::mix(cfg.seed + kStreamShuffle, uint64_t(epoch)));
    for (size_t i = idx.size(); i > 1; --i)
      std::swap(idx[i - 1], idx[size_t(shuffle_rng.uniform_int(0, int(i) - 1))]);

    Rng aug_rng(Rng::mix(cfg.seed + kStreamAugment, uint64_t(epoch)));
    std::vector<Sample<S>> epoch_samples;
    const std::vector<Sample<S>>* source = &samples;
    if (cfg.augment) {
      epoch_samples.reserve(samples.size());
      for (const auto& s : samples)
        epoch_samples.push_back(augment(s, aug_rng));
      source = &epoch_samples;
    }

    int steps = 0;
    double loss_sum = 0;
    int64_t seen = 0;
    EvalAccum<S> acc;
    for (size_t lo = 0; lo < idx.size(); lo += size_t(cfg.batch_size)) {
      const size_t hi = std::min(idx.size(), lo + size_t(cfg.batch_size));
      try {
        Batch<S> batch = make_batch(*source, idx, lo, hi);
        Tensor<S> logits = wgdf_forward(batch.a, batch.b, params, mcfg);
        Tensor<S> loss = total_loss(batch.gt, sigmoid(logits), cfg.loss);
        if (!std::isfinite(double(loss.item())))
          throw NumericError("loss is not finite");
        // Train metrics come from the same forward that produces the update.
        acc.add(classify(logits, cfg.model.classifier_threshold), batch.masks);
        params.zero_grad();
        GradTape<S> tape(loss);
        tape.backward();
        adamw_step(params, opt);
        loss_sum += double(loss.item()) * double(hi - lo);
        seen += int64_t(hi - lo);
        ++steps;
      } catch (const Error& e) {
        throw TrainError("epoch " + std::to_string(epoch) + " step " +
                         std::to_string(steps + 1) + ": " + e.what());
      }
    }

    MetricsReport rep = acc.report();
    if (epoch == cfg.epochs) {
      // The last row reports the finished model: a fresh pass over the clean
      // training set with the post-update parameters, matching what an eval
      // of the final checkpoint sees.
      rep = evaluate_set(samples, params, mcfg, cfg.batch_size,
                         cfg.model.classifier_threshold);
    }
    EpochStats st;
    st.epoch = epoch;
    st.steps = steps;
    st.mean_loss = loss_sum / double(seen);
    st.f1 = rep.s.f1;
    st.iou = rep.s.iou;
    st.edge_miou = rep.edge_miou;
    out.epochs.push_back(st);

    const std::string line = std::to_string(epoch) + "\t" +
                             std::to_string(steps) + "\t" + fmt(st.mean_loss) +
                             "\t" + fmt(st.f1) + "\t" + fmt(st.iou) + "\t" +
                             fmt(st.edge_miou);
    log << line << "\n";
    log.flush();
    std::printf("%s\n", line.c_str());
    std::fflush(stdout);

    if (st.f1 > best_f1) {
      best_f1 = st.f1;
      checkpoint_save(out.best_checkpoint_path, params, mcfg, &opt);
    }
  }
  checkpoint_save(out.checkpoint_path, params, mcfg, &opt);
  return out;
}

}  // namespace

TrainOutcome cmd_train(const RunConfig& cfg) {
  cfg.validate();
  return cfg.precision == Precision::kF32 ? train_impl<float>(cfg)
                                          : train_impl<double>(cfg);
}

MetricsReport aggregate_masks(const std::vector<Mask>& preds,
                              const std::vector<Mask>& gts) {
  require(preds.size() == gts.size(),
          "aggregate_masks: mask counts must match");
  EvalAccum<float> acc;
  std::vector<const Mask*> ptrs;
  ptrs.reserve(gts.size());
  for (const Mask& g : gts) ptrs.push_back(&g);
  acc.add(preds, ptrs);
  return acc.report();
}

namespace {

template <class S>
MetricsReport eval_impl(const EvalOptions& opt) {
  auto loaded = checkpoint_load<S>(opt.checkpoint);
  auto samples = load_samples<S>(opt.synth, opt.synth_count, opt.dataset_dir,
                                 opt.seed);
  return evaluate_set(samples, loaded.params, loaded.model, 8, opt.threshold);
}

}  // namespace

MetricsReport cmd_eval(const EvalOptions& opt, std::ostream& os) {
  if (!(opt.threshold > 0.0 && opt.threshold < 1.0))
    throw ConfigError("threshold must be in (0,1)");
  CheckpointInfo info = checkpoint_peek(opt.checkpoint);
  MetricsReport r = info.precision == "f32" ? eval_impl<float>(opt)
                                            : eval_impl<double>(opt);
  std::string text;
  text += "samples\t" + std::to_string(r.samples) + "\n";
  text += "tp\t" + std::to_string(r.counts.tp) + "\n";
  text += "fp\t" + std::to_string(r.counts.fp) + "\n";
  text += "fn\t" + std::to_string(r.counts.fn) + "\n";
  text += "tn\t" + std::to_string(r.counts.tn) + "\n";
  text += "oa\t" + fmt(r.s.oa) + "\n";
  text += "precision\t" + fmt(r.s.precision) + "\n";
  text += "recall\t" + fmt(r.s.recall) + "\n";
  text += "f1\t" + fmt(r.s.f1) + "\n";
  text += "iou\t" + fmt(r.s.iou) + "\n";
  text += "edge_miou\t" + fmt(r.edge_miou) + "\n";
  os << text;
  if (!opt.output_dir.empty()) {
    std::filesystem::create_directories(opt.output_dir);
    const auto path = std::filesystem::path(opt.output_dir) / "report.tsv";
    std::ofstream f(path);
    if (!f) throw IoError("cannot write " + path.string());
    f << text;
  }
  return r;
}

namespace {

template <class S>
Tensor<S> image_to_batch(const ImageU8& img) {
  std::vector<S> data(size_t(3) * img.h * img.w);
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < img.h; ++y)
      for (int x = 0; x < img.w; ++x)
        data[(size_t(c) * img.h + y) * img.w + x] =
            S(img.at(y, x, img.channels == 3 ? c : 0) / 255.0);
  return Tensor<S>::from_vector({1, 3, img.h, img.w}, std::move(data), false);
}

template <class S>
void predict_impl(const PredictOptions& opt) {
  auto loaded = checkpoint_load<S>(opt.checkpoint);
  const ImageU8 ia = read_pnm(opt.image_a);
  const ImageU8 ib = read_pnm(opt.image_b);
  if (ia.w != ib.w || ia.h != ib.h)
    throw IoError("input images must have identical sizes");
  if (ia.w % 2 != 0 || ia.h % 2 != 0)
    throw IoError("input images must have even width and height");
  NoGradGuard no_grad;
  Tensor<S> logits = wgdf_forward(image_to_batch<S>(ia), image_to_batch<S>(ib),
                                  loaded.params, loaded.model);
  ImageU8 prob{ia.w, ia.h, 1, {}};
  ImageU8 mask{ia.w, ia.h, 1, {}};
  prob.pixels.resize(size_t(ia.w) * ia.h);
  mask.pixels.resize(prob.pixels.size());
  auto lv = logits.data();
  for (size_t i = 0; i < prob.pixels.size(); ++i) {
    const double x = double(lv[i]);
    const double p = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x))
                              : std::exp(x) / (1.0 + std::exp(x));
    prob.pixels[i] = uint8_t(std::lround(p * 255.0));
    mask.pixels[i] = p > opt.threshold ? 255 : 0;
  }
  std::filesystem::create_directories(opt.output_dir);
  write_pnm(std::filesystem::path(opt.output_dir) / "probability.pgm", prob);
  write_pnm(std::filesystem::path(opt.output_dir) / "mask.pgm", mask);
}

}  // namespace

void cmd_predict(const PredictOptions& opt) {
  if (!(opt.threshold > 0.0 && opt.threshold < 1.0))
    throw ConfigError("threshold must be in (0,1)");
  CheckpointInfo info = checkpoint_peek(opt.checkpoint);
  if (info.precision == "f32")
    predict_impl<float>(opt);
  else
    predict_impl<double>(opt);
}

DecomposeSummary cmd_decompose(const DecomposeOptions& opt) {
  const ImageU8 img = read_pnm(opt.image);
  if (img.w % 2 != 0 || img.h % 2 != 0)
    throw IoError("input image must have even width and height");
  // Bands are computed on the luminance (channel mean) in 64-bit.
  std::vector<double> gray(size_t(img.h) * img.w);
  for (int y = 0; y < img.h; ++y)
    for (int x = 0; x < img.w; ++x) {
      double acc = 0;
      for (int c = 0; c < img.channels; ++c) acc += img.at(y, x, c) / 255.0;
      gray[size_t(y) * img.w + x] = acc / img.channels;
    }
  NoGradGuard no_grad;
  Tensor<double> x = Tensor<double>::from_vector({1, 1, img.h, img.w},
                                                 std::move(gray), false);
  Subbands<double> bands = dwt2(x);

  double source_energy = 0;
  for (double v : x.data()) source_energy += v * v;

  DecomposeSummary sum;
  sum.source_energy = source_energy;
  const Tensor<double>* band_tensors[4] = {&bands.ll, &bands.lh, &bands.hl,
                                           &bands.hh};
  const char* names[4] = {"ll", "lh", "hl", "hh"};
  std::filesystem::create_directories(opt.output_dir);
  for (int bi = 0; bi < 4; ++bi) {
    auto bv = band_tensors[bi]->data();
    double mn = bv[0], mx = bv[0], energy = 0;
    for (double v : bv) {
      mn = std::min(mn, v);
      mx = std::max(mx, v);
      energy += v * v;
    }
    sum.band_min[bi] = mn;
    sum.band_max[bi] = mx;
    sum.energy_fraction[bi] = source_energy == 0 ? 0.0 : energy / source_energy;
    ImageU8 vis{img.w / 2, img.h / 2, 1, {}};
    vis.pixels.resize(size_t(vis.w) * vis.h);
    const double span = mx - mn;
    for (size_t i = 0; i < vis.pixels.size(); ++i)
      vis.pixels[i] =
          span == 0 ? 0 : uint8_t(std::lround((bv[i] - mn) / span * 255.0));
    write_pnm(std::filesystem::path(opt.output_dir) /
                  (std::string(names[bi]) + ".pgm"),
              vis);
  }
  const auto spath = std::filesystem::path(opt.output_dir) / "summary.txt";
  std::ofstream f(spath);
  if (!f) throw IoError("cannot write " + spath.string());
  f << "band\tmin\tmax\tenergy_fraction\n";
  double frac_sum = 0;
  for (int bi = 0; bi < 4; ++bi) {
    f << names[bi] << "\t" << fmt(sum.band_min[bi]) << "\t"
      << fmt(sum.band_max[bi]) << "\t" << fmt(sum.energy_fraction[bi]) << "\n";
    frac_sum += sum.energy_fraction[bi];
  }
  f << "fraction_sum\t" << fmt(frac_sum) << "\n";
  f << "source_energy\t" << fmt(sum.source_energy) << "\n";
  return sum;
}

}  // namespace wgdf

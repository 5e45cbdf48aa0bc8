#include "wgdf/data.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "wgdf/image_io.hpp"

namespace wgdf {

void SynthConfig::validate() const {
  if (size < 4 || size % 2 != 0)
    throw ConfigError("synth size must be even and >= 4");
  if (n_objects_min < 0 || n_objects_max < n_objects_min)
    throw ConfigError("synth object count range is invalid");
  if (change_fraction < 0.0 || change_fraction > 1.0)
    throw ConfigError("synth change_fraction must be in [0,1]");
  if (noise_sigma < 0.0) throw ConfigError("synth noise_sigma must be >= 0");
  if (texture_scale <= 0.0) throw ConfigError("synth texture_scale must be > 0");
}

SynthScene synth_scene(const SynthConfig& cfg, int index) {
  cfg.validate();
  Rng rng(Rng::mix(cfg.seed, uint64_t(index)));
  SynthScene sc;
  sc.size = cfg.size;
  for (double& c : sc.base_color) c = rng.uniform(0.2, 0.5);
  sc.texture_amp = 0.08;
  sc.texture_cells = std::max(2, int(std::lround(cfg.size / cfg.texture_scale)));
  sc.texture.resize(size_t(sc.texture_cells) * sc.texture_cells);
  for (double& t : sc.texture) t = rng.uniform();

  const int n = rng.uniform_int(cfg.n_objects_min, cfg.n_objects_max);
  sc.objects.reserve(size_t(n));
  for (int i = 0; i < n; ++i) {
    SceneObject o;
    o.kind = rng.coin() ? ObjectKind::kRect : ObjectKind::kEllipse;
    o.cx = rng.uniform(0.15, 0.85) * cfg.size;
    o.cy = rng.uniform(0.15, 0.85) * cfg.size;
    o.half_w = rng.uniform(0.1, 0.2) * cfg.size;
    o.half_h = rng.uniform(0.1, 0.2) * cfg.size;
    o.angle = rng.uniform(0.0, 3.141592653589793);
    // Alternate bright and dark so stacked objects keep contrasting.
    const bool bright = i % 2 == 0;
    for (double& c : o.color)
      c = bright ? rng.uniform(0.75, 1.0) : rng.uniform(0.0, 0.25);
    if (rng.uniform() < cfg.change_fraction) {
      switch (rng.uniform_int(0, 2)) {
        case 0: o.role = ChangeRole::kRemoved; break;
        case 1: o.role = ChangeRole::kAdded; break;
        default:
          // Shift far enough that the before/after footprints separate into
          // clean regions instead of hairline crescents.
          o.role = ChangeRole::kShifted;
          o.dx = (rng.coin() ? 1 : -1) * rng.uniform(0.15, 0.3) * cfg.size;
          o.dy = (rng.coin() ? 1 : -1) * rng.uniform(0.15, 0.3) * cfg.size;
          break;
      }
    }
    sc.objects.push_back(o);
  }
  sc.noise_sigma = cfg.noise_sigma;
  sc.noise_seed_a = rng.next_u64();
  sc.noise_seed_b = rng.next_u64();
  char buf[32];
  std::snprintf(buf, sizeof buf, "synth-%06d", index);
  sc.id = buf;
  return sc;
}

bool object_covers(const SceneObject& obj, double px, double py, bool shifted) {
  const double cx = obj.cx + (shifted ? obj.dx : 0.0);
  const double cy = obj.cy + (shifted ? obj.dy : 0.0);
  const double tx = px - cx, ty = py - cy;
  const double cs = std::cos(obj.angle), sn = std::sin(obj.angle);
  const double u = cs * tx + sn * ty;
  const double v = -sn * tx + cs * ty;
  if (obj.kind == ObjectKind::kRect)
    return std::fabs(u) <= obj.half_w && std::fabs(v) <= obj.half_h;
  const double a = u / obj.half_w, b = v / obj.half_h;
  return a * a + b * b <= 1.0;
}

namespace {

double texture_at(const SynthScene& sc, double px, double py) {
  const int cells = sc.texture_cells;
  const double gx = px / sc.size * (cells - 1);
  const double gy = py / sc.size * (cells - 1);
  const int x0 = std::min(int(gx), cells - 2);
  const int y0 = std::min(int(gy), cells - 2);
  const double fx = gx - x0, fy = gy - y0;
  auto g = [&](int y, int x) { return sc.texture[size_t(y) * cells + x]; };
  return (1 - fy) * ((1 - fx) * g(y0, x0) + fx * g(y0, x0 + 1)) +
         fy * ((1 - fx) * g(y0 + 1, x0) + fx * g(y0 + 1, x0 + 1));
}

// present=false drops the object from this image; shifted selects image B's
// placement of shifted objects.
template <class S>
std::vector<S> render_image(const SynthScene& sc, bool image_b,
                            uint64_t noise_seed, double noise_sigma) {
  const int sz = sc.size;
  std::vector<S> img(size_t(3) * sz * sz);
  for (int y = 0; y < sz; ++y) {
    for (int x = 0; x < sz; ++x) {
      const double px = x + 0.5, py = y + 0.5;
      const double tex = (texture_at(sc, px, py) - 0.5) * sc.texture_amp;
      double color[3];
      for (int c = 0; c < 3; ++c) color[c] = sc.base_color[c] + tex;
      for (const SceneObject& o : sc.objects) {
        const bool present = image_b ? o.role != ChangeRole::kRemoved
                                     : o.role != ChangeRole::kAdded;
        if (!present) continue;
        const bool use_shift = image_b && o.role == ChangeRole::kShifted;
        if (object_covers(o, px, py, use_shift))
          for (int c = 0; c < 3; ++c) color[c] = o.color[c];
      }
      for (int c = 0; c < 3; ++c)
        img[(size_t(c) * sz + y) * sz + x] = S(color[c]);
    }
  }
  Rng noise(noise_seed);
  if (noise_sigma > 0.0) {
    for (S& v : img) {
      const double n = noise.normal() * noise_sigma;
      v = S(std::clamp(double(v) + n, 0.0, 1.0));
    }
  }
  return img;
}

}  // namespace

template <class S>
Sample<S> render_scene(const SynthScene& sc) {
  Sample<S> s;
  const int sz = sc.size;
  s.a = Tensor<S>::from_vector(
      {3, sz, sz},
      render_image<S>(sc, false, sc.noise_seed_a, sc.noise_sigma), false);
  s.b = Tensor<S>::from_vector(
      {3, sz, sz}, render_image<S>(sc, true, sc.noise_seed_b, sc.noise_sigma),
      false);
  s.gt = Mask(sz, sz);
  for (int y = 0; y < sz; ++y) {
    for (int x = 0; x < sz; ++x) {
      const double px = x + 0.5, py = y + 0.5;
      bool changed = false;
      for (const SceneObject& o : sc.objects) {
        if (o.role == ChangeRole::kUnchanged) continue;
        const bool in_a =
            o.role != ChangeRole::kAdded && object_covers(o, px, py, false);
        const bool in_b =
            o.role != ChangeRole::kRemoved &&
            object_covers(o, px, py, o.role == ChangeRole::kShifted);
        if (in_a != in_b) {
          changed = true;
          break;
        }
      }
      s.gt.set(y, x, changed ? 1 : 0);
    }
  }
  s.id = sc.id;
  return s;
}

template <class S>
Sample<S> synth_pair(const SynthConfig& cfg, int index) {
  return render_scene<S>(synth_scene(cfg, index));
}

template <class S>
std::vector<Sample<S>> load_dataset(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  const fs::path da = dir / "A", db = dir / "B", dl = dir / "label";
  for (const fs::path& d : {da, db, dl})
    if (!fs::is_directory(d))
      throw IoError("dataset directory missing: " + d.string());

  std::set<std::string> names;
  for (const fs::path& d : {da, db, dl})
    for (const auto& e : fs::directory_iterator(d))
      if (e.is_regular_file()) names.insert(e.path().filename().string());
  for (const std::string& n : names)
    for (const fs::path& d : {da, db, dl})
      if (!fs::exists(d / n))
        throw IoError("missing counterpart file: " + (d / n).string());

  auto to_tensor = [](const ImageU8& img) {
    std::vector<S> data(size_t(3) * img.h * img.w);
    for (int c = 0; c < 3; ++c)
      for (int y = 0; y < img.h; ++y)
        for (int x = 0; x < img.w; ++x)
          data[(size_t(c) * img.h + y) * img.w + x] =
              S(img.at(y, x, img.channels == 3 ? c : 0) / 255.0);
    return Tensor<S>::from_vector({3, img.h, img.w}, std::move(data), false);
  };

  std::vector<Sample<S>> out;
  for (const std::string& n : names) {  // std::set iterates sorted
    const ImageU8 ia = read_pnm(da / n);
    const ImageU8 ib = read_pnm(db / n);
    const ImageU8 il = read_pnm(dl / n);
    if (ia.w != ib.w || ia.h != ib.h || ia.w != il.w || ia.h != il.h)
      throw IoError("size mismatch in dataset triple " + n);
    Sample<S> s;
    s.a = to_tensor(ia);
    s.b = to_tensor(ib);
    s.gt = Mask(il.h, il.w);
    for (int y = 0; y < il.h; ++y)
      for (int x = 0; x < il.w; ++x)
        s.gt.set(y, x, il.at(y, x, 0) > 127 ? 1 : 0);
    s.id = n;
    out.push_back(std::move(s));
  }
  return out;
}

namespace {

template <class S>
Tensor<S> flip_image(const Tensor<S>& t, bool horizontal) {
  const int c = t.dim(0), h = t.dim(1), w = t.dim(2);
  auto v = t.data();
  std::vector<S> out(v.size());
  for (int ci = 0; ci < c; ++ci)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const int sy = horizontal ? y : h - 1 - y;
        const int sx = horizontal ? w - 1 - x : x;
        out[(size_t(ci) * h + y) * w + x] = v[(size_t(ci) * h + sy) * w + sx];
      }
  return Tensor<S>::from_vector(t.shape(), std::move(out), false);
}

Mask flip_mask(const Mask& m, bool horizontal) {
  Mask out(m.h, m.w);
  for (int y = 0; y < m.h; ++y)
    for (int x = 0; x < m.w; ++x)
      out.set(y, x, horizontal ? m.at(y, m.w - 1 - x) : m.at(m.h - 1 - y, x));
  return out;
}

// Bilinear sample with the half-pixel mapping; replicate at the borders.
template <class Get>
double bilinear(Get get, int h, int w, double sy, double sx) {
  sy = std::clamp(sy, 0.0, double(h - 1));
  sx = std::clamp(sx, 0.0, double(w - 1));
  const int y0 = std::min(int(sy), h - 2 >= 0 ? h - 2 : 0);
  const int x0 = std::min(int(sx), w - 2 >= 0 ? w - 2 : 0);
  const int y1 = std::min(y0 + 1, h - 1), x1 = std::min(x0 + 1, w - 1);
  const double fy = sy - y0, fx = sx - x0;
  return (1 - fy) * ((1 - fx) * get(y0, x0) + fx * get(y0, x1)) +
         fy * ((1 - fx) * get(y1, x0) + fx * get(y1, x1));
}

}  // namespace

template <class S>
Sample<S> flip_h(const Sample<S>& s) {
  return {flip_image(s.a, true), flip_image(s.b, true), flip_mask(s.gt, true),
          s.id};
}

template <class S>
Sample<S> flip_v(const Sample<S>& s) {
  return {flip_image(s.a, false), flip_image(s.b, false),
          flip_mask(s.gt, false), s.id};
}

template <class S>
Sample<S> scale_sample(const Sample<S>& s, double factor) {
  require(factor > 0.0, "scale_sample: factor must be positive");
  if (factor == 1.0) return s;
  const int c = s.a.dim(0), h = s.a.dim(1), w = s.a.dim(2);
  const int nh = std::max(1, int(std::lround(h * factor)));
  const int nw = std::max(1, int(std::lround(w * factor)));

  auto resize_image = [&](const Tensor<S>& t) {
    auto v = t.data();
    std::vector<S> out(size_t(c) * nh * nw);
    for (int ci = 0; ci < c; ++ci) {
      auto get = [&](int y, int x) {
        return double(v[(size_t(ci) * h + y) * w + x]);
      };
      for (int y = 0; y < nh; ++y)
        for (int x = 0; x < nw; ++x) {
          const double sy = (y + 0.5) * double(h) / nh - 0.5;
          const double sx = (x + 0.5) * double(w) / nw - 0.5;
          out[(size_t(ci) * nh + y) * nw + x] = S(bilinear(get, h, w, sy, sx));
        }
    }
    return out;
  };

  // Resize, then center crop or pad back to the original size. Images
  // replicate their edges into padding; the mask pads with background.
  auto place_image = [&](std::vector<S> big) {
    std::vector<S> out(size_t(c) * h * w);
    const int oy = (nh - h) / 2, ox = (nw - w) / 2;
    for (int ci = 0; ci < c; ++ci)
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
          const int sy = std::clamp(y + oy, 0, nh - 1);
          const int sx = std::clamp(x + ox, 0, nw - 1);
          out[(size_t(ci) * h + y) * w + x] =
              big[(size_t(ci) * nh + sy) * nw + sx];
        }
    return Tensor<S>::from_vector({c, h, w}, std::move(out), false);
  };

  Sample<S> out;
  out.a = place_image(resize_image(s.a));
  out.b = place_image(resize_image(s.b));

  auto getm = [&](int y, int x) { return double(s.gt.at(y, x)); };
  Mask gm(h, w);
  const int oy = (nh - h) / 2, ox = (nw - w) / 2;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const int ty = y + oy, tx = x + ox;
      if (ty < 0 || ty >= nh || tx < 0 || tx >= nw) {
        gm.set(y, x, 0);
        continue;
      }
      const double sy = (ty + 0.5) * double(h) / nh - 0.5;
      const double sx = (tx + 0.5) * double(w) / nw - 0.5;
      gm.set(y, x, bilinear(getm, h, w, sy, sx) > 0.5 ? 1 : 0);
    }
  out.gt = std::move(gm);
  out.id = s.id;
  return out;
}

template <class S>
Sample<S> blur_images(const Sample<S>& s, double sigma) {
  require(sigma > 0.0, "blur_images: sigma must be positive");
  const int radius = std::max(1, int(std::ceil(3.0 * sigma)));
  std::vector<double> kernel(size_t(2 * radius + 1));
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    kernel[size_t(i + radius)] = std::exp(-0.5 * (i * i) / (sigma * sigma));
    sum += kernel[size_t(i + radius)];
  }
  for (double& k : kernel) k /= sum;

  auto blur = [&](const Tensor<S>& t) {
    const int c = t.dim(0), h = t.dim(1), w = t.dim(2);
    auto v = t.data();
    std::vector<double> tmp(v.size());
    std::vector<S> out(v.size());
    for (int ci = 0; ci < c; ++ci) {
      const size_t base = size_t(ci) * h * w;
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
          double acc = 0.0;
          for (int k = -radius; k <= radius; ++k) {
            const int sx = std::clamp(x + k, 0, w - 1);
            acc += kernel[size_t(k + radius)] * double(v[base + size_t(y) * w + sx]);
          }
          tmp[base + size_t(y) * w + x] = acc;
        }
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
          double acc = 0.0;
          for (int k = -radius; k <= radius; ++k) {
            const int sy = std::clamp(y + k, 0, h - 1);
            acc += kernel[size_t(k + radius)] * tmp[base + size_t(sy) * w + x];
          }
          out[base + size_t(y) * w + x] = S(std::clamp(acc, 0.0, 1.0));
        }
    }
    return Tensor<S>::from_vector(t.shape(), std::move(out), false);
  };

  Sample<S> out = s;
  out.a = blur(s.a);
  out.b = blur(s.b);
  return out;
}

template <class S>
Sample<S> augment(const Sample<S>& s, Rng& rng) {
  Sample<S> cur = s;
  if (rng.uniform() < 0.5) cur = flip_h(cur);
  if (rng.uniform() < 0.5) cur = flip_v(cur);
  if (rng.uniform() < 0.5) cur = scale_sample(cur, rng.uniform(0.8, 1.2));
  if (rng.uniform() < 0.5) cur = blur_images(cur, rng.uniform(0.5, 1.5));
  return cur;
}

#define WGDF_INSTANTIATE_DATA(S)                                            \
  template struct Sample<S>;                                                \
  template Sample<S> render_scene<S>(const SynthScene&);                    \
  template Sample<S> synth_pair<S>(const SynthConfig&, int);                \
  template std::vector<Sample<S>> load_dataset<S>(                          \
      const std::filesystem::path&);                                        \
  template Sample<S> augment<S>(const Sample<S>&, Rng&);                    \
  template Sample<S> flip_h<S>(const Sample<S>&);                           \
  template Sample<S> flip_v<S>(const Sample<S>&);                           \
  template Sample<S> scale_sample<S>(const Sample<S>&, double);             \
  template Sample<S> blur_images<S>(const Sample<S>&, double);

WGDF_INSTANTIATE_DATA(float)
WGDF_INSTANTIATE_DATA(double)

}  // namespace wgdf

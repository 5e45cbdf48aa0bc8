#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "support/helpers.hpp"
#include "wgdf/data.hpp"
#include "wgdf/image_io.hpp"

using namespace wgdf;
namespace fs = std::filesystem;

namespace {

SynthConfig small_cfg() {
  SynthConfig cfg;
  cfg.size = 32;
  cfg.seed = 9;
  return cfg;
}

template <class S>
bool in_unit_range(const Tensor<S>& t) {
  for (S v : t.data())
    if (v < S(0) || v > S(1)) return false;
  return true;
}

// Independent rasterizer over the scene description: same geometry
// definitions, separate code path.
Mask raster_gt(const SynthScene& sc) {
  Mask gt(sc.size, sc.size);
  for (int y = 0; y < sc.size; ++y)
    for (int x = 0; x < sc.size; ++x) {
      const double px = x + 0.5, py = y + 0.5;
      bool changed = false;
      for (const SceneObject& o : sc.objects) {
        auto covers = [&](double cx, double cy) {
          const double tx = px - cx, ty = py - cy;
          const double cs = std::cos(o.angle), sn = std::sin(o.angle);
          const double u = cs * tx + sn * ty, v = -sn * tx + cs * ty;
          if (o.kind == ObjectKind::kRect)
            return std::fabs(u) <= o.half_w && std::fabs(v) <= o.half_h;
          const double a = u / o.half_w, b = v / o.half_h;
          return a * a + b * b <= 1.0;
        };
        bool in_a = false, in_b = false;
        switch (o.role) {
          case ChangeRole::kUnchanged:
            continue;
          case ChangeRole::kRemoved:
            in_a = covers(o.cx, o.cy);
            break;
          case ChangeRole::kAdded:
            in_b = covers(o.cx, o.cy);
            break;
          case ChangeRole::kShifted:
            in_a = covers(o.cx, o.cy);
            in_b = covers(o.cx + o.dx, o.cy + o.dy);
            break;
        }
        if (in_a != in_b) {
          changed = true;
          break;
        }
      }
      gt.set(y, x, changed ? 1 : 0);
    }
  return gt;
}

struct TempDir {
  fs::path path;
  TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

ImageU8 gray_image(int h, int w, uint8_t v) {
  ImageU8 img{w, h, 1, std::vector<uint8_t>(size_t(h) * w, v)};
  return img;
}

// Pixels within `radius` of a gt transition, where interpolation and blur may
// legitimately soften values.
Mask boundary_band(const Mask& m, int radius = 2) {
  Mask band(m.h, m.w);
  for (int y = 0; y < m.h; ++y)
    for (int x = 0; x < m.w; ++x) {
      const uint8_t center = m.at(y, x);
      bool differs = false;
      for (int dy = -radius; dy <= radius && !differs; ++dy)
        for (int dx = -radius; dx <= radius && !differs; ++dx) {
          const int ny = std::clamp(y + dy, 0, m.h - 1);
          const int nx = std::clamp(x + dx, 0, m.w - 1);
          if (m.at(ny, nx) != center) differs = true;
        }
      band.set(y, x, differs ? 1 : 0);
    }
  return band;
}

}  // namespace

TEST_SUITE_BEGIN("data");

TEST_CASE("synth: deterministic in (seed, index)") {
  auto a = synth_pair<float>(small_cfg(), 3);
  auto b = synth_pair<float>(small_cfg(), 3);
  CHECK(std::equal(a.a.data().begin(), a.a.data().end(), b.a.data().begin()));
  CHECK(std::equal(a.b.data().begin(), a.b.data().end(), b.b.data().begin()));
  CHECK(a.gt == b.gt);
  CHECK(a.id == b.id);

  auto c = synth_pair<float>(small_cfg(), 4);
  CHECK(c.id != a.id);
}

TEST_CASE("synth: change_fraction 0 gives empty gt and noise-only differences") {
  SynthConfig cfg = small_cfg();
  cfg.change_fraction = 0.0;
  cfg.noise_sigma = 0.01;
  auto s = synth_pair<float>(cfg, 0);
  CHECK(s.gt.count() == 0);
  double worst = 0;
  for (size_t i = 0; i < size_t(s.a.numel()); ++i)
    worst = std::max(worst,
                     std::fabs(double(s.a.data()[i]) - double(s.b.data()[i])));
  CHECK(worst > 0.0);        // noise differs between the two renders
  CHECK(worst < 8 * 0.01 + 1e-6);  // but stays noise-sized
}

TEST_CASE("synth: gt equals the duplicate-rasterizer oracle") {
  SynthConfig cfg = small_cfg();
  cfg.change_fraction = 0.7;
  for (int index = 0; index < 10; ++index) {
    SynthScene sc = synth_scene(cfg, index);
    auto s = render_scene<float>(sc);
    CHECK(s.gt == raster_gt(sc));
  }
}

TEST_CASE("synth: pixel data stays in [0,1]") {
  SynthConfig cfg = small_cfg();
  cfg.noise_sigma = 0.5;  // strong noise still clamps
  for (int i = 0; i < 5; ++i) {
    auto s = synth_pair<float>(cfg, i);
    CHECK(in_unit_range(s.a));
    CHECK(in_unit_range(s.b));
  }
}

TEST_CASE("load_dataset: empty trio loads an empty list") {
  TempDir dir("wgdf_data_empty");
  fs::create_directories(dir.path / "A");
  fs::create_directories(dir.path / "B");
  fs::create_directories(dir.path / "label");
  CHECK(load_dataset<float>(dir.path).empty());
}

TEST_CASE("load_dataset: one triple round-trips with binarized labels") {
  TempDir dir("wgdf_data_one");
  fs::create_directories(dir.path / "A");
  fs::create_directories(dir.path / "B");
  fs::create_directories(dir.path / "label");
  write_pnm(dir.path / "A" / "s0.pgm", gray_image(8, 8, 100));
  write_pnm(dir.path / "B" / "s0.pgm", gray_image(8, 8, 200));
  ImageU8 label = gray_image(8, 8, 0);
  label.pixels[0] = 255;
  label.pixels[1] = 127;  // at the threshold: stays 0
  label.pixels[2] = 128;  // above: becomes 1
  write_pnm(dir.path / "label" / "s0.pgm", label);

  auto samples = load_dataset<float>(dir.path);
  REQUIRE(samples.size() == 1);
  const auto& s = samples[0];
  CHECK(s.id == "s0.pgm");
  CHECK(shape_eq(s.a.shape(), {3, 8, 8}));
  CHECK(s.a.data()[0] == doctest::Approx(100.0 / 255.0));
  CHECK(s.b.data()[0] == doctest::Approx(200.0 / 255.0));
  CHECK(s.gt.v[0] == 1);
  CHECK(s.gt.v[1] == 0);
  CHECK(s.gt.v[2] == 1);
  CHECK(s.gt.count() == 2);
}

TEST_CASE("load_dataset: missing counterpart and size mismatch are named errors") {
  TempDir dir("wgdf_data_bad");
  fs::create_directories(dir.path / "A");
  fs::create_directories(dir.path / "B");
  fs::create_directories(dir.path / "label");
  write_pnm(dir.path / "A" / "x.pgm", gray_image(8, 8, 10));
  CHECK_THROWS_WITH_AS(load_dataset<float>(dir.path),
                       doctest::Contains("x.pgm"), IoError);

  write_pnm(dir.path / "B" / "x.pgm", gray_image(8, 8, 10));
  write_pnm(dir.path / "label" / "x.pgm", gray_image(8, 6, 0));
  CHECK_THROWS_WITH_AS(load_dataset<float>(dir.path),
                       doctest::Contains("size mismatch"), IoError);
}

TEST_CASE("augment: flips are involutions") {
  auto s = synth_pair<float>(small_cfg(), 1);
  auto twice_h = flip_h(flip_h(s));
  CHECK(std::equal(s.a.data().begin(), s.a.data().end(),
                   twice_h.a.data().begin()));
  CHECK(twice_h.gt == s.gt);
  auto twice_v = flip_v(flip_v(s));
  CHECK(std::equal(s.b.data().begin(), s.b.data().end(),
                   twice_v.b.data().begin()));
  CHECK(twice_v.gt == s.gt);
}

TEST_CASE("augment: scale 1.0 is the identity") {
  auto s = synth_pair<float>(small_cfg(), 2);
  auto t = scale_sample(s, 1.0);
  CHECK(std::equal(s.a.data().begin(), s.a.data().end(), t.a.data().begin()));
  CHECK(t.gt == s.gt);
}

TEST_CASE("augment: chain keeps shape, binary gt, and [0,1] range") {
  auto s = synth_pair<float>(small_cfg(), 3);
  Rng rng(55);
  for (int i = 0; i < 20; ++i) {
    auto t = augment(s, rng);
    CHECK(shape_eq(t.a.shape(), s.a.shape()));
    CHECK(t.gt.h == s.gt.h);
    CHECK(t.gt.w == s.gt.w);
    for (uint8_t v : t.gt.v) CHECK(v <= 1);
    CHECK(in_unit_range(t.a));
    CHECK(in_unit_range(t.b));
  }
}

TEST_CASE("augment: geometric ops keep (a, b, gt) aligned") {
  // Marker image: a bright block on black, with gt exactly on the block.
  const int sz = 32;
  std::vector<float> img(size_t(3) * sz * sz, 0.0f);
  Mask gt(sz, sz);
  for (int y = 6; y < 12; ++y)
    for (int x = 20; x < 27; ++x) {
      for (int c = 0; c < 3; ++c) img[(size_t(c) * sz + y) * sz + x] = 1.0f;
      gt.set(y, x, 1);
    }
  Sample<float> s{Tensor<float>::from_vector({3, sz, sz}, img, false),
                  Tensor<float>::from_vector({3, sz, sz}, img, false), gt,
                  "marker"};
  Rng rng(66);
  for (int i = 0; i < 10; ++i) {
    auto t = augment(s, rng);
    // Wherever gt is set, the transformed image must be bright, and dark
    // where it is not (blur may soften the boundary, so test the interior).
    Mask edge_band = boundary_band(t.gt);
    for (int y = 0; y < sz; ++y)
      for (int x = 0; x < sz; ++x) {
        if (edge_band.at(y, x)) continue;
        const float v = t.a.at({0, y, x});
        if (t.gt.at(y, x))
          CHECK(v > 0.5f);
        else
          CHECK(v < 0.5f);
      }
  }
}

TEST_CASE("augment: blur never touches gt") {
  auto s = synth_pair<float>(small_cfg(), 4);
  auto t = blur_images(s, 1.2);
  CHECK(t.gt == s.gt);
  CHECK(in_unit_range(t.a));
}

TEST_SUITE_END();

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "wgdf/mask.hpp"
#include "wgdf/rng.hpp"
#include "wgdf/tensor.hpp"

namespace wgdf {

// One bi-temporal pair with exact ground truth. Image tensors are
// (3, H, W) in [0,1].
template <class S>
struct Sample {
  Tensor<S> a, b;
  Mask gt;
  std::string id;
};

struct SynthConfig {
  int size = 64;  // even
  int n_objects_min = 3;
  int n_objects_max = 5;
  double change_fraction = 0.5;
  double noise_sigma = 0.01;
  double texture_scale = 8.0;  // background texture cell size in pixels
  uint64_t seed = 0;

  void validate() const;
};

enum class ObjectKind { kRect, kEllipse };
enum class ChangeRole { kUnchanged, kRemoved, kAdded, kShifted };

struct SceneObject {
  ObjectKind kind = ObjectKind::kRect;
  double cx = 0, cy = 0;          // center, pixels
  double half_w = 0, half_h = 0;  // half extents in the object frame
  double angle = 0;               // rotation, radians
  double color[3] = {0, 0, 0};
  ChangeRole role = ChangeRole::kUnchanged;
  double dx = 0, dy = 0;  // shift applied in image B (role == kShifted)
};

// Fully describes one synthetic pair; rendering is a pure function of it.
struct SynthScene {
  int size = 0;
  double base_color[3] = {0, 0, 0};
  double texture_amp = 0;
  int texture_cells = 0;
  std::vector<double> texture;  // texture_cells^2 grid, bilinearly upsampled
  std::vector<SceneObject> objects;
  double noise_sigma = 0;
  uint64_t noise_seed_a = 0, noise_seed_b = 0;
  std::string id;
};

// Deterministic in (cfg.seed, index).
SynthScene synth_scene(const SynthConfig& cfg, int index);

// True when the pixel center (px, py) falls inside the object as rasterized
// (shifted: the position in image B).
bool object_covers(const SceneObject& obj, double px, double py, bool shifted);

template <class S>
Sample<S> render_scene(const SynthScene& scene);

template <class S>
Sample<S> synth_pair(const SynthConfig& cfg, int index);

// Loads A/, B/, label/ triples of same-named netpbm files, sorted by name.
// Labels binarize at > 127.
template <class S>
std::vector<Sample<S>> load_dataset(const std::filesystem::path& dir);

// Applies, each with probability 1/2 and in this order: horizontal flip,
// vertical flip, scale in [0.8, 1.2] with center crop/pad back, Gaussian
// blur (sigma in [0.5, 1.5]) on the images only. Geometric ops move a, b and
// gt identically; gt re-binarizes after interpolation.
template <class S>
Sample<S> augment(const Sample<S>& s, Rng& rng);

template <class S>
Sample<S> flip_h(const Sample<S>& s);
template <class S>
Sample<S> flip_v(const Sample<S>& s);
template <class S>
Sample<S> scale_sample(const Sample<S>& s, double factor);
template <class S>
Sample<S> blur_images(const Sample<S>& s, double sigma);

}  // namespace wgdf

#pragma once

#include <cstdint>
#include <vector>

namespace wgdf {

// Binary H x W mask, row-major, values 0/1.
struct Mask {
  int h = 0, w = 0;
  std::vector<uint8_t> v;

  Mask() = default;
  Mask(int height, int width) : h(height), w(width), v(size_t(height) * width, 0) {}

  uint8_t at(int y, int x) const { return v[size_t(y) * w + x]; }
  void set(int y, int x, uint8_t val) { v[size_t(y) * w + x] = val; }
  int64_t count() const {
    int64_t c = 0;
    for (uint8_t b : v) c += b;
    return c;
  }
  bool operator==(const Mask& o) const = default;
};

}  // namespace wgdf

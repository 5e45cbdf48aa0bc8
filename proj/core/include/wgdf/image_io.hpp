#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace wgdf {

// 8-bit raster, interleaved row-major, 1 (gray) or 3 (RGB) channels.
struct ImageU8 {
  int w = 0, h = 0, channels = 1;
  std::vector<uint8_t> pixels;  // h * w * channels

  uint8_t at(int y, int x, int c) const {
    return pixels[(size_t(y) * w + x) * channels + c];
  }
};

// Binary netpbm: P5 (PGM) and P6 (PPM), maxval 255.
ImageU8 read_pnm(const std::filesystem::path& path);
void write_pnm(const std::filesystem::path& path, const ImageU8& img);

}  // namespace wgdf

#include "wgdf/image_io.hpp"

#include <fstream>

#include "wgdf/errors.hpp"

namespace wgdf {

namespace {

// Reads one whitespace/comment-separated token from a netpbm header.
std::string next_token(std::istream& in, const std::string& path) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) return tok;
      continue;
    }
    tok.push_back(char(c));
  }
  if (tok.empty()) throw IoError("truncated netpbm header in " + path);
  return tok;
}

}  // namespace

ImageU8 read_pnm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open image file " + path.string());
  const std::string p = path.string();
  const std::string magic = next_token(in, p);
  ImageU8 img;
  if (magic == "P5")
    img.channels = 1;
  else if (magic == "P6")
    img.channels = 3;
  else
    throw IoError("unsupported netpbm magic '" + magic + "' in " + p +
                  " (expected binary P5/P6)");
  img.w = std::stoi(next_token(in, p));
  img.h = std::stoi(next_token(in, p));
  const int maxval = std::stoi(next_token(in, p));
  if (img.w <= 0 || img.h <= 0) throw IoError("bad image dimensions in " + p);
  if (maxval != 255) throw IoError("only maxval 255 supported, " + p);
  // The header ends with exactly one whitespace byte before the payload.
  img.pixels.resize(size_t(img.w) * img.h * img.channels);
  in.read(reinterpret_cast<char*>(img.pixels.data()),
          std::streamsize(img.pixels.size()));
  if (in.gcount() != std::streamsize(img.pixels.size()))
    throw IoError("truncated pixel payload in " + p);
  return img;
}

void write_pnm(const std::filesystem::path& path, const ImageU8& img) {
  require(img.channels == 1 || img.channels == 3,
          "write_pnm: channels must be 1 or 3");
  require(int64_t(img.pixels.size()) ==
              int64_t(img.w) * img.h * img.channels,
          "write_pnm: pixel buffer does not match dimensions");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write image file " + path.string());
  out << (img.channels == 1 ? "P5" : "P6") << "\n"
      << img.w << " " << img.h << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.pixels.data()),
            std::streamsize(img.pixels.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace wgdf

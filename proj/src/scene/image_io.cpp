#include "rpvfield/scene/image_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "rpvfield/common/error.hpp"

namespace rpvfield::scene {

Image::Image(int w, int h, int c, float fill) : width(w), height(h), channels(c) {
  if (w <= 0 || h <= 0 || (c != 1 && c != 3)) throw std::invalid_argument("image needs positive size and 1 or 3 channels");
  data.assign(static_cast<std::size_t>(w) * h * c, fill);
}

void write_pfm(std::ostream& out, const Image& image) {
  if (image.channels != 1 && image.channels != 3) throw std::invalid_argument("PFM supports 1 or 3 channels");
  out << (image.channels == 3 ? "PF" : "Pf") << '\n' << image.width << ' ' << image.height << "\n-1.0\n";
  const std::size_t row_len = static_cast<std::size_t>(image.width) * image.channels;
  std::vector<char> buf(row_len * 4);
  for (int r = image.height - 1; r >= 0; --r) {
    const float* src = image.data.data() + static_cast<std::size_t>(r) * row_len;
    for (std::size_t k = 0; k < row_len; ++k) {
      const auto u = std::bit_cast<std::uint32_t>(src[k]);
      for (int b = 0; b < 4; ++b) buf[4 * k + b] = static_cast<char>((u >> (8 * b)) & 0xff);
    }
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  }
}

namespace {

// Reads one whitespace-delimited header token, tracking the byte offset.
std::string token(std::istream& in, std::size_t& offset, const std::string& source) {
  std::string t;
  int c;
  while ((c = in.get()) != EOF && std::isspace(c)) ++offset;
  if (c == EOF) throw ParseError(source, offset, "truncated header");
  const std::size_t start = offset;
  while (c != EOF && !std::isspace(c)) {
    t.push_back(static_cast<char>(c));
    ++offset;
    if (t.size() > 32) throw ParseError(source, start, "header token too long");
    c = in.get();
  }
  if (c == EOF) throw ParseError(source, offset, "truncated header");
  ++offset;  // the single separator after the token
  return t;
}

int positive_int(const std::string& t, std::size_t at, const std::string& source, const char* what) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(t, &used);
    if (used != t.size() || v <= 0 || v > (1 << 16)) throw std::invalid_argument(t);
    return v;
  } catch (const std::exception&) {
    throw ParseError(source, at, std::string("bad ") + what + " '" + t + "'");
  }
}

}  // namespace

Image read_pfm(std::istream& in, const std::string& source) {
  std::size_t offset = 0;
  const std::string magic = token(in, offset, source);
  int channels = 0;
  if (magic == "PF") {
    channels = 3;
  } else if (magic == "Pf") {
    channels = 1;
  } else {
    throw ParseError(source, 0, "not a PFM file");
  }
  std::size_t at = offset;
  const int w = positive_int(token(in, offset, source), at, source, "width");
  at = offset;
  const int h = positive_int(token(in, offset, source), at, source, "height");
  at = offset;
  const std::string scale_tok = token(in, offset, source);
  double scale = 0.0;
  try {
    scale = std::stod(scale_tok);
  } catch (const std::exception&) {
    throw ParseError(source, at, "bad scale '" + scale_tok + "'");
  }
  if (!(scale < 0.0)) throw ParseError(source, at, "only little-endian PFM (negative scale) is supported");

  Image image(w, h, channels);
  const std::size_t row_len = static_cast<std::size_t>(w) * channels;
  std::vector<unsigned char> buf(row_len * 4);
  for (int r = h - 1; r >= 0; --r) {
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    const auto got = static_cast<std::size_t>(in.gcount());
    if (got != buf.size()) throw ParseError(source, offset + got, "truncated pixel data");
    offset += got;
    float* dst = image.data.data() + static_cast<std::size_t>(r) * row_len;
    for (std::size_t k = 0; k < row_len; ++k) {
      std::uint32_t u = 0;
      for (int b = 0; b < 4; ++b) u |= static_cast<std::uint32_t>(buf[4 * k + b]) << (8 * b);
      dst[k] = std::bit_cast<float>(u);
    }
  }
  if (in.peek() != EOF) throw ParseError(source, offset, "trailing bytes after pixel data");
  return image;
}

void write_pfm(const std::filesystem::path& path, const Image& image) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_pfm(out, image);
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

Image read_pfm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_pfm(in, path.string());
}

void write_ppm(const std::filesystem::path& path, const Image& image) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "P6\n" << image.width << ' ' << image.height << "\n255\n";
  std::vector<char> row(static_cast<std::size_t>(image.width) * 3);
  for (int r = 0; r < image.height; ++r) {
    for (int c = 0; c < image.width; ++c) {
      for (int ch = 0; ch < 3; ++ch) {
        const float v = image.at(r, c, image.channels == 3 ? ch : 0);
        const float clamped = std::isfinite(v) ? std::clamp(v, 0.0f, 1.0f) : 0.0f;
        row[3 * c + ch] = static_cast<char>(static_cast<unsigned char>(std::lround(clamped * 255.0f)));
      }
    }
    out.write(row.data(), static_cast<std::streamsize>(row.size()));
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace rpvfield::scene

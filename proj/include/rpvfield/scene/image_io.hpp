#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace rpvfield::scene {

// Row-major float image, row 0 at the top.
struct Image {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<float> data;

  Image() = default;
  Image(int width, int height, int channels, float fill = 0.0f);

  float& at(int row, int col, int ch = 0) { return data[index(row, col, ch)]; }
  float at(int row, int col, int ch = 0) const { return data[index(row, col, ch)]; }
  bool same_shape(const Image& o) const { return width == o.width && height == o.height && channels == o.channels; }

 private:
  std::size_t index(int row, int col, int ch) const {
    return (static_cast<std::size_t>(row) * width + col) * channels + ch;
  }
};

// PFM: "PF" (3 channels) or "Pf" (1 channel), negative scale for little
// endian, rows stored bottom to top.
void write_pfm(std::ostream& out, const Image& image);
Image read_pfm(std::istream& in, const std::string& source);
void write_pfm(const std::filesystem::path& path, const Image& image);
Image read_pfm(const std::filesystem::path& path);

// 8-bit binary PPM preview; values clamped to [0, 1]. 1-channel images are
// replicated to grey.
void write_ppm(const std::filesystem::path& path, const Image& image);

}  // namespace rpvfield::scene

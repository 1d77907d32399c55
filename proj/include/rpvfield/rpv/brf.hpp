#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "rpvfield/rpv/rpv.hpp"

namespace rpvfield::rpv {

// Reflectance factor over a polar grid of viewing directions. Zenith rows
// cover [0, 90) degrees in equal steps, measured from the normal. Azimuth
// columns start at the sun's azimuth and advance counterclockwise, so column
// 0 is relative azimuth 0 (the backscatter / hotspot plane). Azimuths are
// stored as absolute angles in the normal's tangent frame (east = 0).
struct BrfGrid {
  std::vector<double> zenith_deg;
  std::vector<double> azimuth_deg;
  std::vector<Rgb> values;  // row-major [zenith][azimuth]
  double sun_zenith_deg = 0.0;
  double sun_azimuth_deg = 0.0;

  std::size_t rows() const { return zenith_deg.size(); }
  std::size_t cols() const { return azimuth_deg.size(); }
  const Rgb& at(std::size_t zi, std::size_t ai) const { return values[zi * cols() + ai]; }
  // Relative azimuth of column ai in degrees, in [0, 360).
  double relative_azimuth_deg(std::size_t ai) const;
};

// Throws std::invalid_argument for fewer than 2 steps and GeometryError when
// the sun is below the surface plane.
BrfGrid brf_sweep(const RpvParams& params, const Direction& n, const Direction& sun, std::size_t zenith_steps,
                  std::size_t azimuth_steps);

// Columns: zenith_deg,azimuth_deg,r,g,b
void write_brf_csv(const BrfGrid& grid, const std::filesystem::path& path);

enum class BrfChannel { kRed, kGreen, kBlue, kLuminance };

// Polar heatmap: radius proportional to zenith, angle = azimuth (east right,
// counterclockwise), sun marked in white. Colours come from a fixed 9-entry
// lookup table, normalised to the grid's own min/max, and every number is
// printed with fixed precision, so identical grids give identical bytes.
std::string brf_svg(const BrfGrid& grid, BrfChannel channel);
void write_brf_svg(const BrfGrid& grid, BrfChannel channel, const std::filesystem::path& path);

}  // namespace rpvfield::rpv

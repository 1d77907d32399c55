#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rpvfield/common/vec3.hpp"
#include "rpvfield/rpv/rpv.hpp"

namespace rpvfield::scene {

// Regular lattice over [x_min, x_max] x [y_min, y_max]; node (i, j) sits at
// y = y_min + i * dy, x = x_min + j * dx.
struct Lattice {
  int rows = 2;
  int cols = 2;
  double x_min = -1.0, x_max = 1.0;
  double y_min = -1.0, y_max = 1.0;

  void validate() const;
  double dx() const { return (x_max - x_min) / (cols - 1); }
  double dy() const { return (y_max - y_min) / (rows - 1); }
  double x(int j) const { return x_min + j * dx(); }
  double y(int i) const { return y_min + i * dy(); }
  bool contains(double x, double y) const { return x >= x_min && x <= x_max && y >= y_min && y <= y_max; }
};

class Heightfield {
 public:
  Heightfield(Lattice lattice, std::vector<double> z);

  const Lattice& lattice() const { return lattice_; }
  std::span<const double> values() const { return z_; }
  double node(int i, int j) const { return z_[static_cast<std::size_t>(i) * lattice_.cols + j]; }
  double min_height() const;
  double max_height() const;
  double height_range() const { return max_height() - min_height(); }

  // Bilinear interpolation, clamped to the lattice.
  double height(double x, double y) const;
  // Gradient of the bilinear patch containing (x, y).
  Vec3 gradient(double x, double y) const;
  // Upward facet normal normalize(-dz/dx, -dz/dy, 1).
  Direction normal(double x, double y) const;

 private:
  Lattice lattice_;
  std::vector<double> z_;
};

// Midpoint-displacement terrain. Displacement at refinement level l is
// amplitude * roughness^(l+1), so roughness 0 yields a flat plane at 0.
Heightfield generate_heightfield(std::uint64_t seed, Lattice lattice, double roughness, double amplitude);

// Piecewise-constant materials keyed by quadrant around (cx, cy):
// 0 = x<cx,y<cy; 1 = x>=cx,y<cy; 2 = x<cx,y>=cy; 3 = x>=cx,y>=cy.
class MaterialMap {
 public:
  MaterialMap(std::vector<rpv::RpvParams> regions, double cx = 0.0, double cy = 0.0);

  static MaterialMap uniform(const rpv::RpvParams& p) { return MaterialMap({p, p, p, p}); }

  int region(double x, double y) const;
  const rpv::RpvParams& at(double x, double y) const { return regions_[region(x, y)]; }
  const std::vector<rpv::RpvParams>& regions() const { return regions_; }

 private:
  std::vector<rpv::RpvParams> regions_;
  double cx_, cy_;
};

}  // namespace rpvfield::scene

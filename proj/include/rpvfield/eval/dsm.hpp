#pragma once

#include <cstdint>
#include <vector>

#include "rpvfield/field/field.hpp"
#include "rpvfield/render/renderer.hpp"
#include "rpvfield/scene/dataset.hpp"

namespace rpvfield::eval {

// Altitudes in scene units on a regular lattice, with a validity mask.
struct Dsm {
  scene::Lattice lattice;
  std::vector<double> z;  // row-major, node (i, j) at lattice.y(i), lattice.x(j)
  std::vector<char> valid;

  double at(int i, int j) const { return z[static_cast<std::size_t>(i) * lattice.cols + j]; }
  bool valid_at(int i, int j) const { return valid[static_cast<std::size_t>(i) * lattice.cols + j] != 0; }
  double valid_fraction() const;

  // Every cell valid.
  static Dsm from_image(const scene::Lattice& lattice, const scene::Image& altitudes);
};

// One nadir ray per lattice node starting on the top face of the scene
// bounds, like the training rays start where they enter the bounds. The
// altitude is the top minus the rendered depth sum w t, converted back to
// scene units; empty rays and nodes outside the bounds are invalid.
Dsm extract_dsm(const field::RadianceField& field, const scene::SceneTransform& transform, const Vec3& bounds_min,
                const Vec3& bounds_max, const scene::Lattice& lattice, const render::SamplingConfig& sampling,
                std::uint64_t seed);

// Reflectance parameters seen by a nadir ray at each lattice node: the
// weight-normalized means of the field's outputs along the ray.
struct SurfaceMaterials {
  scene::Lattice lattice;
  std::vector<rpv::RpvParams> params;  // row-major like Dsm::z
  std::vector<char> valid;
};

SurfaceMaterials extract_materials(const field::RadianceField& field, const scene::SceneTransform& transform,
                                   const Vec3& bounds_min, const Vec3& bounds_max, const scene::Lattice& lattice,
                                   const render::SamplingConfig& sampling, std::uint64_t seed);

// Per-region medians of the valid nodes, regions taken from `regions`.
// Regions without a valid node keep default parameters.
std::vector<rpv::RpvParams> region_medians(const SurfaceMaterials& materials, const scene::MaterialMap& regions);

// Mean |a - b| over jointly valid cells. Throws ShapeError when the lattices
// differ and ValidationError when no cell is valid in both.
double mae(const Dsm& a, const Dsm& b);

// Fraction of cells valid in both.
double joint_valid_fraction(const Dsm& a, const Dsm& b);

}  // namespace rpvfield::eval

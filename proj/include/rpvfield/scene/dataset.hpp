#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rpvfield/rpv/rpv.hpp"
#include "rpvfield/scene/image_io.hpp"
#include "rpvfield/scene/oracle.hpp"
#include "rpvfield/scene/terrain.hpp"
#include "rpvfield/scene/view.hpp"

namespace rpvfield::scene {

inline constexpr int kDatasetVersion = 1;

struct View {
  ViewSpec spec;
  Image image;  // 3 channels, [0, 1]
  std::optional<DepthPriorMap> prior;
};

struct FieldRay {
  render::Ray ray;
  // Normalized distance from the camera plane to ray.origin; a scene-unit
  // pixel depth d maps to the field depth d / scale - offset.
  double offset = 0.0;
};

struct Dataset {
  SceneTransform transform;
  // Ray clipping box, normalized units.
  Vec3 bounds_min{-1, -1, -1};
  Vec3 bounds_max{1, 1, 1};
  // Standard deviation of the prior depth noise, scene units.
  double depth_sigma = 0.5;
  // Ground-truth rasters on the DSM lattice (scene units).
  Lattice dsm_lattice;
  Image gt_dsm;          // 1 channel altitude
  Image gt_rho0;         // 3 channels
  Image gt_rpv;          // 3 channels: k, theta, rho_c
  std::vector<rpv::RpvParams> materials;  // quadrant materials, see MaterialMap
  Vec3 material_center;
  std::vector<View> views;

  // Throws ValidationError on inconsistent content.
  void validate() const;
  // Throws std::out_of_range for an unknown name.
  const View& view(const std::string& name) const;
  std::vector<const View*> training_views() const;
  // Pixel ray in normalized coordinates starting where it enters the scene
  // bounds, so t runs from 0 across the box; nullopt when it misses them.
  std::optional<FieldRay> field_ray(const ViewSpec& view, int row, int col) const;

  MaterialMap material_map() const { return MaterialMap(materials, material_center.x, material_center.y); }
};

struct SceneConfig {
  std::uint64_t seed = 0;
  int terrain_nodes = 129;
  double extent = 128.0;  // scene units across the terrain
  double roughness = 0.5;
  double amplitude = 16.0;
  double transform_scale = 64.0;
  ViewLayout layout;
  int prior_factor = 4;
  double depth_noise = 0.5;
  double corr_scale = 1.0;
  int dsm_nodes = 64;
  double dsm_half_width = 40.0;
  std::vector<rpv::RpvParams> materials = default_materials();

  static std::vector<rpv::RpvParams> default_materials();
};

struct GeneratedScene {
  Heightfield terrain;
  Dataset dataset;
};

GeneratedScene generate_scene(const SceneConfig& config, const ShadeFn& shade = default_shade());

// Directory layout: meta.txt, view_<k>.pfm, view_<k>_preview.ppm,
// depth_<k>.pfm, corr_<k>.pfm (training views), gt_dsm.pfm,
// gt_materials.pfm (rho0), gt_materials_rpv.pfm (k, theta, rho_c).
void save_dataset(const Dataset& dataset, const std::filesystem::path& dir);
Dataset load_dataset(const std::filesystem::path& dir);

}  // namespace rpvfield::scene

#pragma once

#include <string>
#include <vector>

#include "rpvfield/common/vec3.hpp"
#include "rpvfield/render/sampling.hpp"

namespace rpvfield::scene {

// normalized = (scene - offset) / scale. Depths along rays scale by 1/scale.
struct SceneTransform {
  double scale = 64.0;
  Vec3 offset;

  Vec3 to_normalized(const Vec3& p) const { return (p - offset) / scale; }
  Vec3 to_scene(const Vec3& p) const { return p * scale + offset; }
  double length_to_normalized(double d) const { return d / scale; }
  double length_to_scene(double d) const { return d * scale; }
  render::Ray ray_to_normalized(const render::Ray& r) const;
};

// Parallel-projection camera. Rays leave a plane `standoff` in front of
// `center` along -toward_camera; row 0 is the top of the image.
struct ViewSpec {
  std::string name;
  std::string role = "train";  // "train" or "test"
  Direction toward_camera = Direction::up();
  Vec3 center;
  double pitch = 1.0;  // scene units per pixel
  int width = 64;
  int height = 64;
  double standoff = 256.0;
  Direction sun = Direction::up();

  // Throws std::invalid_argument / GeometryError on a malformed view.
  void validate() const;
  bool is_training() const { return role == "train"; }
  Vec3 right() const;
  Vec3 up() const;
  // Scene units, t in [0, 2 * standoff].
  render::Ray pixel_ray(int row, int col) const;
  double zenith_deg() const { return rad_to_deg(toward_camera.zenith()); }
};

// Training views near nadir spread in azimuth plus the "easy" (interpolated),
// "hard" and "vhard" (extrapolated) test views. Pitch shrinks with cos(zenith)
// so every view covers the same ground footprint.
struct ViewLayout {
  int n_train = 3;
  int image_size = 64;
  double footprint = 96.0;  // scene units across the image
  double standoff = 256.0;
  Direction sun = Direction::from_spherical(deg_to_rad(35.0), deg_to_rad(142.5));
  std::vector<double> train_zenith_deg{14.0, 20.0, 26.0};
  double easy_zenith_deg = 17.0;
  double hard_zenith_deg = 35.0;
  double vhard_zenith_deg = 48.0;
};

std::vector<ViewSpec> default_views(const ViewLayout& layout);

}  // namespace rpvfield::scene

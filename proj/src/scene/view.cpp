#include "rpvfield/scene/view.hpp"

#include <cmath>
#include <stdexcept>

#include "rpvfield/common/error.hpp"

namespace rpvfield::scene {

render::Ray SceneTransform::ray_to_normalized(const render::Ray& r) const {
  return {to_normalized(r.origin), r.dir, length_to_normalized(r.t_near), length_to_normalized(r.t_far)};
}

void ViewSpec::validate() const {
  if (name.empty()) throw std::invalid_argument("view needs a name");
  if (role != "train" && role != "test") throw std::invalid_argument("view role must be train or test: " + name);
  if (width <= 0 || height <= 0) throw std::invalid_argument("view size must be positive: " + name);
  if (!(pitch > 0.0) || !(standoff > 0.0)) throw std::invalid_argument("view pitch and standoff must be positive: " + name);
  (void)Direction::checked(toward_camera.vec());
  (void)Direction::checked(sun.vec());
  if (!(toward_camera.z() > 0.2)) throw GeometryError("view too far from nadir (|d_z| <= 0.2): " + name);
  if (!(sun.z() > 0.0)) throw GeometryError("sun below the horizon: " + name);
}

Vec3 ViewSpec::right() const { return Direction::normalized(cross(Vec3(0, 1, 0), toward_camera.vec())).vec(); }

Vec3 ViewSpec::up() const { return cross(toward_camera.vec(), right()); }

render::Ray ViewSpec::pixel_ray(int row, int col) const {
  const Vec3 p = center + right() * ((col + 0.5 - 0.5 * width) * pitch) + up() * ((0.5 * height - row - 0.5) * pitch);
  return {p + toward_camera.vec() * standoff, -toward_camera, 0.0, 2.0 * standoff};
}

std::vector<ViewSpec> default_views(const ViewLayout& layout) {
  if (layout.n_train < 1) throw std::invalid_argument("need at least one training view");
  if (layout.train_zenith_deg.empty()) throw std::invalid_argument("need training zenith angles");
  auto make = [&](std::string name, std::string role, double zenith_deg, double azimuth_deg) {
    ViewSpec v;
    v.name = std::move(name);
    v.role = std::move(role);
    v.toward_camera = Direction::from_spherical(deg_to_rad(zenith_deg), deg_to_rad(azimuth_deg));
    v.width = v.height = layout.image_size;
    v.pitch = layout.footprint * std::cos(deg_to_rad(zenith_deg)) / layout.image_size;
    v.standoff = layout.standoff;
    v.sun = layout.sun;
    v.validate();
    return v;
  };
  std::vector<ViewSpec> views;
  const double spacing = 360.0 / layout.n_train;
  for (int k = 0; k < layout.n_train; ++k) {
    const double zen = layout.train_zenith_deg[static_cast<std::size_t>(k) % layout.train_zenith_deg.size()];
    views.push_back(make("train_" + std::to_string(k), "train", zen, 20.0 + k * spacing));
  }
  // Easy sits between the first two training azimuths at a zenith inside
  // the training range; hard and vhard leave the sampled cone.
  views.push_back(make("easy", "test", layout.easy_zenith_deg, 20.0 + 0.5 * spacing));
  views.push_back(make("hard", "test", layout.hard_zenith_deg, 20.0 + 1.5 * spacing));
  views.push_back(make("vhard", "test", layout.vhard_zenith_deg, 20.0 + 2.5 * spacing));
  return views;
}

}  // namespace rpvfield::scene

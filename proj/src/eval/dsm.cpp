#include "rpvfield/eval/dsm.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>

#include "rpvfield/common/error.hpp"
#include "rpvfield/common/rng.hpp"
#include "rpvfield/render/composite.hpp"

namespace rpvfield::eval {

double Dsm::valid_fraction() const {
  if (valid.empty()) return 0.0;
  std::size_t n = 0;
  for (char v : valid) n += v != 0;
  return static_cast<double>(n) / static_cast<double>(valid.size());
}

Dsm Dsm::from_image(const scene::Lattice& lattice, const scene::Image& altitudes) {
  if (altitudes.channels != 1 || altitudes.width != lattice.cols || altitudes.height != lattice.rows) {
    throw ShapeError("altitude image does not match the lattice");
  }
  Dsm d{lattice, std::vector<double>(altitudes.data.begin(), altitudes.data.end()),
        std::vector<char>(altitudes.data.size(), 1)};
  return d;
}

namespace {

struct NadirRays {
  std::vector<render::Ray> rays;
  std::vector<std::size_t> cell_of;
  double top = 0.0;
};

NadirRays nadir_rays(const scene::SceneTransform& transform, const Vec3& bounds_min, const Vec3& bounds_max,
                     const scene::Lattice& lattice) {
  lattice.validate();
  NadirRays out;
  out.top = bounds_max.z;
  const Direction down = -Direction::up();
  for (int i = 0; i < lattice.rows; ++i) {
    for (int j = 0; j < lattice.cols; ++j) {
      const Vec3 p = transform.to_normalized(Vec3(lattice.x(j), lattice.y(i), 0.0));
      render::Ray ray{Vec3(p.x, p.y, out.top), down, 0.0, out.top - bounds_min.z + 1.0};
      if (!render::clip_to_box(ray, bounds_min, bounds_max)) continue;
      out.rays.push_back(ray);
      out.cell_of.push_back(static_cast<std::size_t>(i) * lattice.cols + j);
    }
  }
  return out;
}

}  // namespace

Dsm extract_dsm(const field::RadianceField& field, const scene::SceneTransform& transform, const Vec3& bounds_min,
                const Vec3& bounds_max, const scene::Lattice& lattice, const render::SamplingConfig& sampling,
                std::uint64_t seed) {
  const std::size_t cells = static_cast<std::size_t>(lattice.rows) * lattice.cols;
  Dsm out{lattice, std::vector<double>(cells, std::nan("")), std::vector<char>(cells, 0)};
  const NadirRays nadir = nadir_rays(transform, bounds_min, bounds_max, lattice);
  const std::vector<Direction> suns(nadir.rays.size(), Direction::up());
  const auto renders =
      render::render_rays(field, nadir.rays, suns, {}, sampling, render::ShadingMode::kLambertian, seed);
  for (std::size_t k = 0; k < nadir.rays.size(); ++k) {
    const render::RayRender& r = renders[k];
    if (r.empty) continue;
    const double altitude = nadir.top - r.depth;
    out.z[nadir.cell_of[k]] = transform.to_scene(Vec3(0.0, 0.0, altitude)).z;
    out.valid[nadir.cell_of[k]] = 1;
  }
  return out;
}

SurfaceMaterials extract_materials(const field::RadianceField& field, const scene::SceneTransform& transform,
                                   const Vec3& bounds_min, const Vec3& bounds_max, const scene::Lattice& lattice,
                                   const render::SamplingConfig& sampling, std::uint64_t seed) {
  const std::size_t cells = static_cast<std::size_t>(lattice.rows) * lattice.cols;
  SurfaceMaterials out{lattice, std::vector<rpv::RpvParams>(cells), std::vector<char>(cells, 0)};
  const NadirRays nadir = nadir_rays(transform, bounds_min, bounds_max, lattice);
  for (std::size_t k = 0; k < nadir.rays.size(); ++k) {
    const render::Ray& ray = nadir.rays[k];
    Rng rng(split_seed(seed, static_cast<std::uint64_t>(k)));
    const render::SampleSet s = render::sample_ray(field, ray, std::nullopt, sampling, rng);
    std::vector<double> points;
    points.reserve(3 * s.size());
    for (double t : s.t) {
      const Vec3 p = ray.at(t);
      points.insert(points.end(), {p.x, p.y, p.z});
    }
    const field::FieldOutputs o = field.forward(diff::Tensor({s.size(), 3}, std::move(points)));
    const render::CompositeWeights w = render::composite_weights(o.sigma.values(), s.delta);
    const double total = w.total();
    if (total < render::kEmptyRayThreshold) continue;
    rpv::RpvParams p{{0.0, 0.0, 0.0}, 0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double wi = w.weights[i] / total;
      for (int c = 0; c < 3; ++c) p.rho0[c] += wi * o.rho0.at(i, c);
      p.k += wi * o.k[i];
      p.theta += wi * o.theta[i];
      p.rhoc += wi * o.rhoc[i];
    }
    out.params[nadir.cell_of[k]] = p;
    out.valid[nadir.cell_of[k]] = 1;
  }
  return out;
}

std::vector<rpv::RpvParams> region_medians(const SurfaceMaterials& materials, const scene::MaterialMap& regions) {
  const std::size_t count = regions.regions().size();
  std::vector<std::array<std::vector<double>, 6>> values(count);
  const scene::Lattice& l = materials.lattice;
  for (int i = 0; i < l.rows; ++i) {
    for (int j = 0; j < l.cols; ++j) {
      const std::size_t cell = static_cast<std::size_t>(i) * l.cols + j;
      if (!materials.valid[cell]) continue;
      const rpv::RpvParams& p = materials.params[cell];
      auto& v = values[static_cast<std::size_t>(regions.region(l.x(j), l.y(i)))];
      v[0].push_back(p.rho0[0]);
      v[1].push_back(p.rho0[1]);
      v[2].push_back(p.rho0[2]);
      v[3].push_back(p.k);
      v[4].push_back(p.theta);
      v[5].push_back(p.rhoc);
    }
  }
  auto median = [](std::vector<double> v) {
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    if (v.size() % 2 == 1) return v[mid];
    const double upper = v[mid];
    return 0.5 * (upper + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid)));
  };
  std::vector<rpv::RpvParams> out(count);
  for (std::size_t r = 0; r < count; ++r) {
    if (values[r][0].empty()) continue;
    out[r] = {{median(values[r][0]), median(values[r][1]), median(values[r][2])},
              median(values[r][3]),
              median(values[r][4]),
              median(values[r][5])};
  }
  return out;
}

namespace {

void require_same_lattice(const Dsm& a, const Dsm& b) {
  const auto& la = a.lattice;
  const auto& lb = b.lattice;
  if (la.rows != lb.rows || la.cols != lb.cols || la.x_min != lb.x_min || la.x_max != lb.x_max ||
      la.y_min != lb.y_min || la.y_max != lb.y_max || a.z.size() != b.z.size()) {
    throw ShapeError("DSMs are not on the same lattice");
  }
}

}  // namespace

double mae(const Dsm& a, const Dsm& b) {
  require_same_lattice(a, b);
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.z.size(); ++i) {
    if (!a.valid[i] || !b.valid[i]) continue;
    sum += std::abs(a.z[i] - b.z[i]);
    ++n;
  }
  if (n == 0) throw ValidationError("mae: no cell is valid in both DSMs");
  return sum / static_cast<double>(n);
}

double joint_valid_fraction(const Dsm& a, const Dsm& b) {
  require_same_lattice(a, b);
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.z.size(); ++i) n += a.valid[i] && b.valid[i];
  return a.z.empty() ? 0.0 : static_cast<double>(n) / static_cast<double>(a.z.size());
}

}  // namespace rpvfield::eval

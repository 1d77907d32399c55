#include "rpvfield/scene/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "rpvfield/common/error.hpp"

namespace rpvfield::scene {

std::vector<rpv::RpvParams> SceneConfig::default_materials() {
  return {
      {{0.32, 0.25, 0.18}, 0.6, -0.3, 0.8},
      {{0.22, 0.27, 0.16}, 1.4, -0.3, 0.8},
      {{0.19, 0.16, 0.23}, 0.6, 0.3, 0.8},
      {{0.34, 0.30, 0.25}, 1.4, 0.3, 0.8},
  };
}

void Dataset::validate() const {
  if (!(transform.scale > 0.0)) throw ValidationError("transform scale must be positive");
  if (!(bounds_min.x < bounds_max.x && bounds_min.y < bounds_max.y && bounds_min.z < bounds_max.z)) {
    throw ValidationError("scene bounds are empty");
  }
  if (!(depth_sigma >= 0.0)) throw ValidationError("depth_sigma must be >= 0");
  if (materials.size() != 4) throw ValidationError("expected four materials");
  for (const auto& m : materials) {
    try {
      m.validate();
    } catch (const DomainError& e) {
      throw ValidationError(std::string("material out of range: ") + e.what());
    }
  }
  if (gt_dsm.width != dsm_lattice.cols || gt_dsm.height != dsm_lattice.rows || gt_dsm.channels != 1 ||
      !gt_rho0.same_shape(gt_rpv) || gt_rho0.width != dsm_lattice.cols || gt_rho0.height != dsm_lattice.rows) {
    throw ValidationError("ground-truth rasters do not match the DSM lattice");
  }
  std::set<std::string> names;
  for (const View& v : views) {
    try {
      v.spec.validate();
    } catch (const std::exception& e) {
      throw ValidationError(std::string("invalid view: ") + e.what());
    }
    if (!names.insert(v.spec.name).second) throw ValidationError("duplicate view name " + v.spec.name);
    if (v.image.width != v.spec.width || v.image.height != v.spec.height || v.image.channels != 3) {
      throw ValidationError("image size does not match view " + v.spec.name);
    }
    if (v.spec.is_training() && !v.prior) throw ValidationError("training view " + v.spec.name + " has no depth prior");
    if (v.prior) {
      const int f = v.prior->factor;
      if (f < 1 || v.prior->dbar.width != (v.spec.width + f - 1) / f || v.prior->dbar.height != (v.spec.height + f - 1) / f ||
          !v.prior->dbar.same_shape(v.prior->corr)) {
        throw ValidationError("depth prior size does not match view " + v.spec.name);
      }
      for (float c : v.prior->corr.data) {
        if (!(c >= 0.0f && c <= 1.0f)) throw ValidationError("corr outside [0, 1] in view " + v.spec.name);
      }
      for (float d : v.prior->dbar.data) {
        if (!std::isfinite(d)) throw ValidationError("non-finite prior depth in view " + v.spec.name);
      }
    }
  }
  if (training_views().empty()) throw ValidationError("dataset has no training view");
}

const View& Dataset::view(const std::string& name) const {
  for (const View& v : views) {
    if (v.spec.name == name) return v;
  }
  throw std::out_of_range("unknown view '" + name + "'");
}

std::vector<const View*> Dataset::training_views() const {
  std::vector<const View*> out;
  for (const View& v : views) {
    if (v.spec.is_training()) out.push_back(&v);
  }
  return out;
}

std::optional<FieldRay> Dataset::field_ray(const ViewSpec& v, int row, int col) const {
  render::Ray r = transform.ray_to_normalized(v.pixel_ray(row, col));
  if (!render::clip_to_box(r, bounds_min, bounds_max)) return std::nullopt;
  const double offset = r.t_near;
  return FieldRay{{r.at(offset), r.dir, 0.0, r.t_far - offset}, offset};
}

GeneratedScene generate_scene(const SceneConfig& config, const ShadeFn& shade) {
  const double half = 0.5 * config.extent;
  const Lattice lattice{config.terrain_nodes, config.terrain_nodes, -half, half, -half, half};
  Heightfield terrain = generate_heightfield(config.seed, lattice, config.roughness, config.amplitude);
  const MaterialMap materials(config.materials);

  Dataset d;
  d.transform.scale = config.transform_scale;
  const double margin = 0.1 * terrain.height_range() + 1.0;
  d.bounds_min = Vec3(-half, -half, terrain.min_height() - margin) / config.transform_scale;
  d.bounds_max = Vec3(half, half, terrain.max_height() + margin) / config.transform_scale;
  d.depth_sigma = config.depth_noise;
  d.materials = config.materials;

  const double hw = config.dsm_half_width;
  d.dsm_lattice = Lattice{config.dsm_nodes, config.dsm_nodes, -hw, hw, -hw, hw};
  d.gt_dsm = Image(config.dsm_nodes, config.dsm_nodes, 1);
  d.gt_rho0 = Image(config.dsm_nodes, config.dsm_nodes, 3);
  d.gt_rpv = Image(config.dsm_nodes, config.dsm_nodes, 3);
  for (int i = 0; i < config.dsm_nodes; ++i) {
    for (int j = 0; j < config.dsm_nodes; ++j) {
      const double x = d.dsm_lattice.x(j), y = d.dsm_lattice.y(i);
      d.gt_dsm.at(i, j) = static_cast<float>(terrain.height(x, y));
      const rpv::RpvParams& m = materials.at(x, y);
      for (int c = 0; c < 3; ++c) d.gt_rho0.at(i, j, c) = static_cast<float>(m.rho0[c]);
      d.gt_rpv.at(i, j, 0) = static_cast<float>(m.k);
      d.gt_rpv.at(i, j, 1) = static_cast<float>(m.theta);
      d.gt_rpv.at(i, j, 2) = static_cast<float>(m.rhoc);
    }
  }

  ViewLayout layout = config.layout;
  std::uint64_t k = 0;
  for (const ViewSpec& spec : default_views(layout)) {
    const OracleRender r = oracle_render(terrain, materials, spec, shade);
    View v{spec, r.color, std::nullopt};
    if (spec.is_training()) {
      v.prior = degrade_depth(r.depth, r.valid, spec.pitch, config.prior_factor, config.depth_noise,
                              exponential_corr(config.corr_scale), split_seed(config.seed, k));
    }
    d.views.push_back(std::move(v));
    ++k;
  }
  d.validate();
  return {std::move(terrain), std::move(d)};
}

// ---------------------------------------------------------------- metadata

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string vec(const Vec3& v) { return num(v.x) + "," + num(v.y) + "," + num(v.z); }

class MetaReader {
 public:
  MetaReader(const std::filesystem::path& path) : source_(path.string()) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + source_);
    std::string line;
    std::size_t offset = 0;
    while (std::getline(in, line)) {
      const std::size_t at = offset;
      offset += line.size() + 1;
      if (line.empty() || line[0] == '#') continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos || eq == 0) throw ParseError(source_, at, "expected key=value");
      const std::string key = line.substr(0, eq);
      if (entries_.count(key)) throw ParseError(source_, at, "duplicate key '" + key + "'");
      entries_[key] = {line.substr(eq + 1), at + eq + 1};
    }
  }

  bool has(const std::string& key) const { return entries_.count(key) != 0; }

  const std::string& str(const std::string& key) {
    const auto it = entries_.find(key);
    if (it == entries_.end()) throw ParseError(source_, 0, "missing key '" + key + "'");
    used_.insert(key);
    return it->second.first;
  }

  double real(const std::string& key) {
    const std::string& s = str(key);
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || *end != '\0') throw ParseError(source_, entries_[key].second, "bad number for '" + key + "'");
    return v;
  }

  int integer(const std::string& key) {
    const double v = real(key);
    if (v != std::floor(v) || std::abs(v) > 1e9) {
      throw ParseError(source_, entries_[key].second, "expected an integer for '" + key + "'");
    }
    return static_cast<int>(v);
  }

  std::vector<double> reals(const std::string& key, std::size_t n) {
    const std::string& s = str(key);
    std::vector<double> out;
    std::stringstream ss(s);
    std::string part;
    while (std::getline(ss, part, ',')) {
      char* end = nullptr;
      const double v = std::strtod(part.c_str(), &end);
      if (part.empty() || *end != '\0') break;
      out.push_back(v);
    }
    if (out.size() != n) {
      throw ParseError(source_, entries_[key].second,
                       "expected " + std::to_string(n) + " comma-separated numbers for '" + key + "'");
    }
    return out;
  }

  Vec3 vec3(const std::string& key) {
    const auto v = reals(key, 3);
    return {v[0], v[1], v[2]};
  }

  Direction direction(const std::string& key) {
    const Vec3 v = vec3(key);
    try {
      return Direction::checked(v);
    } catch (const GeometryError&) {
      throw ValidationError(source_ + ": '" + key + "' is not a unit vector");
    }
  }

  void reject_unknown() const {
    for (const auto& [key, value] : entries_) {
      if (!used_.count(key)) throw ParseError(source_, value.second - key.size() - 1, "unknown key '" + key + "'");
    }
  }

  std::size_t offset_of(const std::string& key) const { return entries_.at(key).second; }
  const std::string& source() const { return source_; }

 private:
  std::string source_;
  std::map<std::string, std::pair<std::string, std::size_t>> entries_;
  std::set<std::string> used_;
};

}  // namespace

void save_dataset(const Dataset& d, const std::filesystem::path& dir) {
  d.validate();
  std::filesystem::create_directories(dir);
  std::ostringstream m;
  m << "format=rpvfield-dataset\n";
  m << "version=" << kDatasetVersion << "\n";
  m << "transform.scale=" << num(d.transform.scale) << "\n";
  m << "transform.offset=" << vec(d.transform.offset) << "\n";
  m << "bounds.min=" << vec(d.bounds_min) << "\n";
  m << "bounds.max=" << vec(d.bounds_max) << "\n";
  m << "depth_sigma=" << num(d.depth_sigma) << "\n";
  m << "dsm.rows=" << d.dsm_lattice.rows << "\n";
  m << "dsm.cols=" << d.dsm_lattice.cols << "\n";
  m << "dsm.x_range=" << num(d.dsm_lattice.x_min) << "," << num(d.dsm_lattice.x_max) << "\n";
  m << "dsm.y_range=" << num(d.dsm_lattice.y_min) << "," << num(d.dsm_lattice.y_max) << "\n";
  m << "material.center=" << vec(d.material_center) << "\n";
  m << "material.count=" << d.materials.size() << "\n";
  for (std::size_t i = 0; i < d.materials.size(); ++i) {
    const auto& p = d.materials[i];
    m << "material." << i << "=" << num(p.rho0[0]) << "," << num(p.rho0[1]) << "," << num(p.rho0[2]) << ","
      << num(p.k) << "," << num(p.theta) << "," << num(p.rhoc) << "\n";
  }
  m << "view.count=" << d.views.size() << "\n";
  for (std::size_t k = 0; k < d.views.size(); ++k) {
    const ViewSpec& s = d.views[k].spec;
    const std::string p = "view." + std::to_string(k) + ".";
    m << p << "name=" << s.name << "\n";
    m << p << "role=" << s.role << "\n";
    m << p << "width=" << s.width << "\n";
    m << p << "height=" << s.height << "\n";
    m << p << "pitch=" << num(s.pitch) << "\n";
    m << p << "standoff=" << num(s.standoff) << "\n";
    m << p << "center=" << vec(s.center) << "\n";
    m << p << "toward_camera=" << vec(s.toward_camera.vec()) << "\n";
    m << p << "sun=" << vec(s.sun.vec()) << "\n";
    if (d.views[k].prior) m << p << "prior_factor=" << d.views[k].prior->factor << "\n";
  }
  {
    std::ofstream out(dir / "meta.txt", std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + (dir / "meta.txt").string());
    out << m.str();
  }
  for (std::size_t k = 0; k < d.views.size(); ++k) {
    const std::string ks = std::to_string(k);
    write_pfm(dir / ("view_" + ks + ".pfm"), d.views[k].image);
    write_ppm(dir / ("view_" + ks + "_preview.ppm"), d.views[k].image);
    if (d.views[k].prior) {
      write_pfm(dir / ("depth_" + ks + ".pfm"), d.views[k].prior->dbar);
      write_pfm(dir / ("corr_" + ks + ".pfm"), d.views[k].prior->corr);
    }
  }
  write_pfm(dir / "gt_dsm.pfm", d.gt_dsm);
  write_pfm(dir / "gt_materials.pfm", d.gt_rho0);
  write_pfm(dir / "gt_materials_rpv.pfm", d.gt_rpv);
}

Dataset load_dataset(const std::filesystem::path& dir) {
  MetaReader m(dir / "meta.txt");
  if (m.str("format") != "rpvfield-dataset") throw ParseError(m.source(), m.offset_of("format"), "unknown format");
  const int version = m.integer("version");
  if (version != kDatasetVersion) {
    throw ParseError(m.source(), m.offset_of("version"), "unsupported version " + std::to_string(version));
  }
  Dataset d;
  d.transform.scale = m.real("transform.scale");
  d.transform.offset = m.vec3("transform.offset");
  d.bounds_min = m.vec3("bounds.min");
  d.bounds_max = m.vec3("bounds.max");
  d.depth_sigma = m.real("depth_sigma");
  d.dsm_lattice.rows = m.integer("dsm.rows");
  d.dsm_lattice.cols = m.integer("dsm.cols");
  const auto xr = m.reals("dsm.x_range", 2), yr = m.reals("dsm.y_range", 2);
  d.dsm_lattice.x_min = xr[0];
  d.dsm_lattice.x_max = xr[1];
  d.dsm_lattice.y_min = yr[0];
  d.dsm_lattice.y_max = yr[1];
  try {
    d.dsm_lattice.validate();
  } catch (const std::invalid_argument& e) {
    throw ValidationError(m.source() + ": " + e.what());
  }
  d.material_center = m.vec3("material.center");
  const int materials = m.integer("material.count");
  for (int i = 0; i < materials; ++i) {
    const auto v = m.reals("material." + std::to_string(i), 6);
    d.materials.push_back({{v[0], v[1], v[2]}, v[3], v[4], v[5]});
  }
  const int count = m.integer("view.count");
  if (count < 0) throw ParseError(m.source(), m.offset_of("view.count"), "negative view count");
  std::vector<int> factors(static_cast<std::size_t>(count), 0);
  for (int k = 0; k < count; ++k) {
    const std::string p = "view." + std::to_string(k) + ".";
    ViewSpec s;
    s.name = m.str(p + "name");
    s.role = m.str(p + "role");
    s.width = m.integer(p + "width");
    s.height = m.integer(p + "height");
    s.pitch = m.real(p + "pitch");
    s.standoff = m.real(p + "standoff");
    s.center = m.vec3(p + "center");
    s.toward_camera = m.direction(p + "toward_camera");
    s.sun = m.direction(p + "sun");
    if (m.has(p + "prior_factor")) factors[k] = m.integer(p + "prior_factor");
    d.views.push_back(View{std::move(s), Image(), std::nullopt});
  }
  m.reject_unknown();

  for (int k = 0; k < count; ++k) {
    const std::string ks = std::to_string(k);
    View& v = d.views[static_cast<std::size_t>(k)];
    v.image = read_pfm(dir / ("view_" + ks + ".pfm"));
    if (factors[k] > 0) {
      const auto depth = dir / ("depth_" + ks + ".pfm");
      const auto corr = dir / ("corr_" + ks + ".pfm");
      if (!std::filesystem::exists(depth) || !std::filesystem::exists(corr)) {
        throw ValidationError("missing depth prior files for view " + v.spec.name);
      }
      v.prior = DepthPriorMap{read_pfm(depth), read_pfm(corr), factors[k]};
    }
  }
  d.gt_dsm = read_pfm(dir / "gt_dsm.pfm");
  d.gt_rho0 = read_pfm(dir / "gt_materials.pfm");
  d.gt_rpv = read_pfm(dir / "gt_materials_rpv.pfm");
  d.validate();
  return d;
}

}  // namespace rpvfield::scene

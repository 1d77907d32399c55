#include "rpvfield/scene/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "rpvfield/common/rng.hpp"

namespace rpvfield::scene {

ShadeFn default_shade() {
  return [](const rpv::RpvParams& p, const Direction& n, const Direction& sun, const Direction& view) {
    return rpv::shade_capped(p, n, sun, view);
  };
}

std::optional<double> intersect(const Heightfield& terrain, const render::Ray& ray, double tolerance) {
  const Lattice& l = terrain.lattice();
  const double step = 0.25 * std::min(l.dx(), l.dy());
  const double top = terrain.max_height() + step, bottom = terrain.min_height() - step;
  const double dz = ray.dir.z();
  // Restrict the march to the slab between the terrain's altitude bounds.
  double t0 = ray.t_near, t1 = ray.t_far;
  if (std::abs(dz) > 1e-12) {
    const double ta = (top - ray.origin.z) / dz, tb = (bottom - ray.origin.z) / dz;
    t0 = std::max(t0, std::min(ta, tb));
    t1 = std::min(t1, std::max(ta, tb));
  }
  if (!(t0 < t1)) return std::nullopt;
  auto gap = [&](double t) {
    const Vec3 p = ray.at(t);
    return p.z - terrain.height(p.x, p.y);
  };
  auto inside = [&](double t) {
    const Vec3 p = ray.at(t);
    return l.contains(p.x, p.y);
  };
  double prev = t0;
  if (gap(prev) <= 0.0) return inside(prev) ? std::optional<double>(prev) : std::nullopt;
  for (double t = t0 + step;; t += step) {
    const double tc = std::min(t, t1);
    if (gap(tc) <= 0.0) {
      double lo = prev, hi = tc;
      while (hi - lo > tolerance) {
        const double mid = 0.5 * (lo + hi);
        (gap(mid) > 0.0 ? lo : hi) = mid;
      }
      const double hit = 0.5 * (lo + hi);
      if (!inside(hit)) return std::nullopt;
      return hit;
    }
    if (tc >= t1) return std::nullopt;
    prev = tc;
  }
}

OracleRender oracle_render(const Heightfield& terrain, const MaterialMap& materials, const ViewSpec& view,
                           const ShadeFn& shade) {
  view.validate();
  OracleRender out{Image(view.width, view.height, 3), Image(view.width, view.height, 1),
                   std::vector<char>(static_cast<std::size_t>(view.width) * view.height, 0)};
  const double tolerance = 1e-7 * std::max(terrain.height_range(), 1e-3);
  const Direction to_camera = view.toward_camera;
  for (int r = 0; r < view.height; ++r) {
    for (int c = 0; c < view.width; ++c) {
      const render::Ray ray = view.pixel_ray(r, c);
      const auto t = intersect(terrain, ray, tolerance);
      if (!t) {
        out.depth.at(r, c) = std::numeric_limits<float>::quiet_NaN();
        continue;
      }
      const Vec3 p = ray.at(*t);
      const rpv::Rgb color = shade(materials.at(p.x, p.y), terrain.normal(p.x, p.y), view.sun, to_camera);
      for (int ch = 0; ch < 3; ++ch) out.color.at(r, c, ch) = static_cast<float>(color[ch]);
      out.depth.at(r, c) = static_cast<float>(*t);
      out.valid[static_cast<std::size_t>(r) * view.width + c] = 1;
    }
  }
  return out;
}

CorrModel exponential_corr(double scale) {
  if (!(scale > 0.0)) throw std::invalid_argument("corr scale must be positive");
  return [scale](double slope) { return std::clamp(std::exp(-slope / scale), 0.1, 0.99); };
}

DepthPriorMap degrade_depth(const Image& gt_depth, const std::vector<char>& valid, double pitch, int factor,
                            double noise_sigma, const CorrModel& corr_model, std::uint64_t seed) {
  if (factor < 1) throw std::invalid_argument("downsample factor must be >= 1");
  if (gt_depth.channels != 1) throw std::invalid_argument("depth map must have one channel");
  const int w = gt_depth.width, h = gt_depth.height;
  const int lw = (w + factor - 1) / factor, lh = (h + factor - 1) / factor;
  auto ok = [&](int r, int c) { return valid[static_cast<std::size_t>(r) * w + c] != 0; };

  double mean = 0.0;
  int count = 0;
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      if (ok(r, c)) mean += gt_depth.at(r, c), ++count;
    }
  }
  mean = count > 0 ? mean / count : 0.0;

  // Per-pixel depth slope by central differences inside the valid mask.
  auto slope = [&](int r, int c) {
    auto diff = [&](int r0, int c0, int r1, int c1) {
      const bool a = r0 >= 0 && c0 >= 0 && r0 < h && c0 < w && ok(r0, c0);
      const bool b = r1 >= 0 && c1 >= 0 && r1 < h && c1 < w && ok(r1, c1);
      if (a && b) return (gt_depth.at(r1, c1) - gt_depth.at(r0, c0)) / (pitch * ((r1 - r0) + (c1 - c0)));
      return 0.0;
    };
    const double gx = diff(r, c - 1, r, c + 1) != 0.0 ? diff(r, c - 1, r, c + 1) : diff(r, c, r, c + 1);
    const double gy = diff(r - 1, c, r + 1, c) != 0.0 ? diff(r - 1, c, r + 1, c) : diff(r, c, r + 1, c);
    return std::hypot(gx, gy);
  };

  Rng rng(split_seed(seed, "depth-prior"));
  std::normal_distribution<double> noise(0.0, 1.0);
  DepthPriorMap out{Image(lw, lh, 1), Image(lw, lh, 1), factor};
  for (int br = 0; br < lh; ++br) {
    for (int bc = 0; bc < lw; ++bc) {
      double sum = 0.0, slope_sum = 0.0;
      int n = 0;
      for (int r = br * factor; r < std::min(h, (br + 1) * factor); ++r) {
        for (int c = bc * factor; c < std::min(w, (bc + 1) * factor); ++c) {
          if (!ok(r, c)) continue;
          sum += gt_depth.at(r, c);
          slope_sum += slope(r, c);
          ++n;
        }
      }
      const double z = noise(rng);
      if (n == 0) {
        out.dbar.at(br, bc) = static_cast<float>(mean);
        out.corr.at(br, bc) = 0.0f;
        continue;
      }
      out.dbar.at(br, bc) = static_cast<float>(sum / n + noise_sigma * z);
      out.corr.at(br, bc) = static_cast<float>(corr_model(slope_sum / n));
    }
  }
  return out;
}

}  // namespace rpvfield::scene

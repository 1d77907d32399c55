#pragma once

#include <span>
#include <vector>

#include "rpvfield/common/vec3.hpp"
#include "rpvfield/rpv/rpv.hpp"

namespace rpvfield::render {

// Rays whose accumulated weight stays below this are treated as empty.
inline constexpr double kEmptyRayThreshold = 1e-4;

struct CompositeWeights {
  std::vector<double> alpha;
  std::vector<double> transmittance;
  std::vector<double> weights;
  double residual = 1.0;  // transmittance past the last sample

  double total() const;
  bool empty(double threshold = kEmptyRayThreshold) const { return total() < threshold; }
};

CompositeWeights composite_weights(std::span<const double> sigma, std::span<const double> delta);
double render_depth(const CompositeWeights& w, std::span<const double> t);
double depth_std(const CompositeWeights& w, std::span<const double> t, double depth);

enum class ShadingMode { kLambertian, kSurface, kVolume };

struct Shaded {
  rpv::Rgb color{0.0, 0.0, 0.0};
  bool degenerate_normal = false;
};

// Surface mode: rho0 accumulated as sum w rho0, k / theta / rho_c as
// weight-normalised means, the normal as normalize(sum w n); shaded once.
Shaded shade_surface(const CompositeWeights& w, std::span<const rpv::RpvParams> params,
                     std::span<const Direction> normals, const Direction& sun, const Direction& view);
// Volume mode: sum w_i shade(params_i, n_i).
Shaded shade_volume(const CompositeWeights& w, std::span<const rpv::RpvParams> params,
                    std::span<const Direction> normals, const Direction& sun, const Direction& view);
// Lambertian pre-training colour |sun . z| sum w rho0.
Shaded shade_lambertian(const CompositeWeights& w, std::span<const rpv::RpvParams> params, const Direction& sun);

}  // namespace rpvfield::render

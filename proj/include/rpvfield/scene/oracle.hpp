#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "rpvfield/render/sampling.hpp"
#include "rpvfield/rpv/rpv.hpp"
#include "rpvfield/scene/image_io.hpp"
#include "rpvfield/scene/terrain.hpp"
#include "rpvfield/scene/view.hpp"

namespace rpvfield::scene {

using ShadeFn = std::function<rpv::Rgb(const rpv::RpvParams& params, const Direction& n, const Direction& sun,
                                       const Direction& view)>;

// The renderer's own shading: rpv::shade_capped with unit irradiance.
ShadeFn default_shade();

// First intersection of a scene-unit ray with the terrain: coarse steps of a
// quarter cell, then bisection to `tolerance` in t.
std::optional<double> intersect(const Heightfield& terrain, const render::Ray& ray, double tolerance);

struct OracleRender {
  Image color;  // 3 channels
  Image depth;  // ray parameter in scene units; NaN where invalid
  std::vector<char> valid;
};

// Shades each pixel at its true surface point with the facet normal; rays
// that miss the terrain are black and flagged invalid.
OracleRender oracle_render(const Heightfield& terrain, const MaterialMap& materials, const ViewSpec& view,
                           const ShadeFn& shade = default_shade());

// Low-resolution stand-in for a stereo depth map with its confidence.
struct DepthPriorMap {
  Image dbar;  // 1 channel, scene units
  Image corr;  // 1 channel, in [0, 1]
  int factor = 1;

  double dbar_at(int row, int col) const { return dbar.at(row / factor, col / factor); }
  double corr_at(int row, int col) const { return corr.at(row / factor, col / factor); }
};

// Confidence from the local depth slope |grad t| (scene units per scene unit).
using CorrModel = std::function<double(double slope)>;
// exp(-slope / scale) clipped to [0.1, 0.99].
CorrModel exponential_corr(double scale);

// Block-average by `factor`, add N(0, noise_sigma) per low-res cell, attach
// confidence. Blocks without a valid pixel get the mean depth and corr 0.
DepthPriorMap degrade_depth(const Image& gt_depth, const std::vector<char>& valid, double pitch, int factor,
                            double noise_sigma, const CorrModel& corr_model, std::uint64_t seed);

}  // namespace rpvfield::scene

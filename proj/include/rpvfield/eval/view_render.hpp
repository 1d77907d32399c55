#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "rpvfield/field/field.hpp"
#include "rpvfield/render/renderer.hpp"
#include "rpvfield/scene/dataset.hpp"

namespace rpvfield::eval {

struct RenderedView {
  scene::Image color;  // 3 channels
  scene::Image depth;  // 1 channel, scene units along the pixel ray; NaN where empty
  std::vector<char> empty;
};

// Renders every pixel of `view`. Pixels whose ray misses the scene bounds
// are black and empty. With `prior` the depth prior guides the
// samples when it has one.
RenderedView render_view(const field::RadianceField& field, const scene::Dataset& dataset, const scene::ViewSpec& view,
                         const render::SamplingConfig& sampling, render::ShadingMode mode, std::uint64_t seed,
                         const scene::DepthPriorMap* prior = nullptr);

}  // namespace rpvfield::eval

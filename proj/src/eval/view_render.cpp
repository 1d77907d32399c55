#include "rpvfield/eval/view_render.hpp"

#include <cmath>

namespace rpvfield::eval {

RenderedView render_view(const field::RadianceField& field, const scene::Dataset& dataset, const scene::ViewSpec& view,
                         const render::SamplingConfig& sampling, render::ShadingMode mode, std::uint64_t seed,
                         const scene::DepthPriorMap* prior) {
  view.validate();
  RenderedView out{scene::Image(view.width, view.height, 3), scene::Image(view.width, view.height, 1, std::nanf("")),
                   std::vector<char>(static_cast<std::size_t>(view.width) * view.height, 1)};
  std::vector<render::Ray> rays;
  std::vector<std::optional<double>> priors;
  std::vector<std::size_t> pixel_of;
  std::vector<double> offsets;
  for (int r = 0; r < view.height; ++r) {
    for (int c = 0; c < view.width; ++c) {
      const auto fr = dataset.field_ray(view, r, c);
      if (!fr) continue;
      rays.push_back(fr->ray);
      offsets.push_back(fr->offset);
      pixel_of.push_back(static_cast<std::size_t>(r) * view.width + c);
      if (prior) priors.emplace_back(dataset.transform.length_to_normalized(prior->dbar_at(r, c)) - fr->offset);
    }
  }
  const std::vector<Direction> suns(rays.size(), view.sun);
  const auto renders = render::render_rays(field, rays, suns, priors, sampling, mode, seed);
  for (std::size_t k = 0; k < rays.size(); ++k) {
    const std::size_t p = pixel_of[k];
    const int r = static_cast<int>(p / view.width), c = static_cast<int>(p % view.width);
    for (int ch = 0; ch < 3; ++ch) out.color.at(r, c, ch) = static_cast<float>(renders[k].color[ch]);
    if (!renders[k].empty) {
      out.depth.at(r, c) = static_cast<float>(dataset.transform.length_to_scene(offsets[k] + renders[k].depth));
      out.empty[p] = 0;
    }
  }
  return out;
}

}  // namespace rpvfield::eval

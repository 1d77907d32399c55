#pragma once

#include <optional>
#include <span>
#include <vector>

#include "rpvfield/diff/tensor.hpp"
#include "rpvfield/field/field.hpp"
#include "rpvfield/render/composite.hpp"
#include "rpvfield/render/sampling.hpp"

namespace rpvfield::render {

struct SamplingConfig {
  int n_stratified = 64;
  int n_guided = 64;
  // Standard deviation of the guided Gaussian, normalized scene units.
  double guide_sigma = 0.05;
};

struct RayRender {
  rpv::Rgb color{0.0, 0.0, 0.0};
  double depth = 0.0;
  double depth_std = 0.0;
  double weight_sum = 0.0;
  bool empty = false;
  bool degenerate_normal = false;
};

// Single-ray reference path: one query per sample, normals per sample.
RayRender render_ray(const field::RadianceField& field, const Ray& ray, const SampleSet& samples,
                     const Direction& sun, ShadingMode mode);
rpv::Rgb render_color_surface(const field::RadianceField& field, const Ray& ray, const SampleSet& samples,
                              const Direction& sun);
rpv::Rgb render_color_volume(const field::RadianceField& field, const Ray& ray, const SampleSet& samples,
                             const Direction& sun);

// Rays rendered together; every sample set must have the same size.
struct RayBatch {
  std::vector<Ray> rays;
  std::vector<Direction> suns;
  std::vector<SampleSet> samples;

  std::size_t size() const { return rays.size(); }
  std::size_t samples_per_ray() const { return samples.empty() ? 0 : samples.front().size(); }
};

struct BatchRender {
  diff::Tensor color;       // [R x 3]
  diff::Tensor depth;       // [R x 1]
  diff::Tensor weight_sum;  // [R x 1]
  std::vector<double> depth_std;
  std::vector<char> degenerate_normal;
};

// Vectorised renderer used for training and image rendering. When the
// weights are attached to a graph the outputs are differentiable w.r.t. them;
// normals are always constants. `fixed_normals` (one per sample, ray-major)
// replaces the analytic normals when non-empty.
BatchRender render_batch(const field::RadianceField& field, std::span<const diff::Tensor> weights,
                         const RayBatch& batch, ShadingMode mode, std::span<const Direction> fixed_normals = {});

// Samples for one ray: stratified plus guided around `prior` when given.
// Without a prior the guided half is placed around a coarse depth estimate
// from the stratified half.
SampleSet sample_ray(const field::RadianceField& field, const Ray& ray, std::optional<double> prior,
                     const SamplingConfig& config, Rng& rng, bool* fell_back = nullptr);

// Inference over many rays in chunks; per-ray RNG from (seed, ray index).
std::vector<RayRender> render_rays(const field::RadianceField& field, std::span<const Ray> rays,
                                   std::span<const Direction> suns, std::span<const std::optional<double>> priors,
                                   const SamplingConfig& config, ShadingMode mode, std::uint64_t seed,
                                   std::size_t chunk = 256);

}  // namespace rpvfield::render

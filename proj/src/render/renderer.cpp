#include "rpvfield/render/renderer.hpp"

#include <cmath>
#include <stdexcept>

#include "rpvfield/diff/graph.hpp"
#include "rpvfield/diff/ops.hpp"
#include "rpvfield/rpv/rpv_tensor.hpp"

namespace rpvfield::render {

using diff::Tensor;

namespace {

std::vector<rpv::RpvParams> params_of(const field::FieldOutputs& o) {
  std::vector<rpv::RpvParams> p(o.k.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = {{o.rho0.at(i, 0), o.rho0.at(i, 1), o.rho0.at(i, 2)}, o.k[i], o.theta[i], o.rhoc[i]};
  }
  return p;
}

Tensor sample_points(std::span<const Ray> rays, std::span<const SampleSet> samples) {
  std::vector<double> p;
  for (std::size_t r = 0; r < rays.size(); ++r) {
    for (double t : samples[r].t) {
      const Vec3 x = rays[r].at(t);
      p.insert(p.end(), {x.x, x.y, x.z});
    }
  }
  const std::size_t rows = p.size() / 3;
  return Tensor({rows, 3}, std::move(p));
}

// [N*C x C] with ones where the row's channel matches the column.
Tensor channel_selector(std::size_t n, std::size_t channels) {
  std::vector<double> v(n * channels * channels, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < channels; ++c) v[(i * channels + c) * channels + c] = 1.0;
  }
  return Tensor({n * channels, channels}, std::move(v));
}

// Per-ray sum over samples of w * values; values [R*N x C], w_flat [R*N x 1].
Tensor accumulate(const Tensor& w_flat, const Tensor& values, std::size_t rays, std::size_t n) {
  const std::size_t c = values.cols();
  return diff::matmul(diff::reshape(w_flat * values, {rays, n * c}), channel_selector(n, c));
}

}  // namespace

RayRender render_ray(const field::RadianceField& field, const Ray& ray, const SampleSet& samples,
                     const Direction& sun, ShadingMode mode) {
  ray.validate();
  if (samples.size() == 0) throw std::invalid_argument("render_ray needs at least one sample");
  const Ray one[1] = {ray};
  const SampleSet set[1] = {samples};
  const Tensor x = sample_points(one, set);
  const field::FieldOutputs o = field.forward(x);
  const CompositeWeights w = composite_weights(o.sigma.values(), samples.delta);
  const std::vector<rpv::RpvParams> params = params_of(o);

  RayRender out;
  out.weight_sum = w.total();
  out.empty = w.empty();
  out.depth = render_depth(w, samples.t);
  out.depth_std = depth_std(w, samples.t, out.depth);
  const Direction view = -ray.dir;
  if (mode == ShadingMode::kLambertian) {
    out.color = shade_lambertian(w, params, sun).color;
    return out;
  }
  const auto normals = field::analytic_normals(field::density_fn(field), x);
  std::vector<Direction> n(normals.size());
  for (std::size_t i = 0; i < n.size(); ++i) n[i] = normals[i].normal;
  const Shaded s = mode == ShadingMode::kSurface ? shade_surface(w, params, n, sun, view)
                                                 : shade_volume(w, params, n, sun, view);
  out.color = s.color;
  out.degenerate_normal = s.degenerate_normal;
  if (mode == ShadingMode::kVolume) {
    for (const auto& r : normals) out.degenerate_normal = out.degenerate_normal || r.degenerate;
  }
  return out;
}

rpv::Rgb render_color_surface(const field::RadianceField& field, const Ray& ray, const SampleSet& samples,
                              const Direction& sun) {
  return render_ray(field, ray, samples, sun, ShadingMode::kSurface).color;
}

rpv::Rgb render_color_volume(const field::RadianceField& field, const Ray& ray, const SampleSet& samples,
                             const Direction& sun) {
  return render_ray(field, ray, samples, sun, ShadingMode::kVolume).color;
}

BatchRender render_batch(const field::RadianceField& field, std::span<const Tensor> weights, const RayBatch& batch,
                         ShadingMode mode, std::span<const Direction> fixed_normals) {
  const std::size_t rays = batch.size();
  const std::size_t n = batch.samples_per_ray();
  if (rays == 0 || n == 0) throw std::invalid_argument("render_batch needs rays and samples");
  if (batch.suns.size() != rays || batch.samples.size() != rays) {
    throw std::invalid_argument("render_batch: rays, suns and samples differ in count");
  }
  std::vector<double> t_values, d_values;
  t_values.reserve(rays * n);
  d_values.reserve(rays * n);
  for (const SampleSet& s : batch.samples) {
    if (s.size() != n) throw std::invalid_argument("render_batch: ragged sample sets");
    t_values.insert(t_values.end(), s.t.begin(), s.t.end());
    d_values.insert(d_values.end(), s.delta.begin(), s.delta.end());
  }
  const Tensor t({rays, n}, std::move(t_values));
  const Tensor delta({rays, n}, std::move(d_values));
  const Tensor points = sample_points(batch.rays, batch.samples);

  if (!fixed_normals.empty() && fixed_normals.size() != rays * n) {
    throw std::invalid_argument("render_batch: one fixed normal per sample required");
  }
  const bool needs_normals = mode != ShadingMode::kLambertian && fixed_normals.empty();
  diff::Graph* graph = weights.empty() ? nullptr : weights.front().graph();
  field::FieldOutputs o;
  std::vector<field::NormalResult> normals;
  if (needs_normals && graph != nullptr) {
    const Tensor x = graph->variable(points);
    o = field.forward(x, weights);
    const Tensor wrt[1] = {x};
    normals = field::normals_from_gradient(graph->backward(diff::sum(o.sigma), wrt).of(x));
  } else {
    o = field.forward(points, weights);
    if (needs_normals) {
      const field::DensityFn density = [&](const Tensor& x) { return field.density(x, weights); };
      normals = field::analytic_normals(density, points);
    }
  }

  for (const Direction& d : fixed_normals) normals.push_back({d, false});

  const Tensor tau = diff::reshape(o.sigma, {rays, n}) * delta;
  const Tensor alpha = -diff::expm1(-tau);
  const Tensor w = diff::exp(-diff::cumsum_exclusive(tau)) * alpha;
  const Tensor w_flat = diff::reshape(w, {rays * n, 1});

  BatchRender out;
  out.weight_sum = diff::sum(w, 1);
  out.depth = diff::sum(w * t, 1);
  out.depth_std.resize(rays);
  out.degenerate_normal.assign(rays, 0);
  for (std::size_t r = 0; r < rays; ++r) {
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double dt = t.at(r, i) - out.depth[r];
      var += w.at(r, i) * dt * dt;
    }
    out.depth_std[r] = std::sqrt(var);
  }

  if (mode == ShadingMode::kLambertian) {
    std::vector<double> cos_sun(rays);
    for (std::size_t r = 0; r < rays; ++r) cos_sun[r] = std::abs(batch.suns[r].z());
    out.color = accumulate(w_flat, o.rho0, rays, n) * Tensor({rays, 1}, std::move(cos_sun));
    return out;
  }

  if (mode == ShadingMode::kSurface) {
    std::vector<rpv::AngleConfig> angles(rays);
    std::vector<double> cos_sun(rays);
    for (std::size_t r = 0; r < rays; ++r) {
      Vec3 acc;
      for (std::size_t i = 0; i < n; ++i) acc = acc + normals[r * n + i].normal.vec() * w.at(r, i);
      Direction nr = Direction::up();
      if (norm(acc) > 1e-12) {
        nr = Direction::normalized(acc);
      } else {
        out.degenerate_normal[r] = 1;
      }
      angles[r] = rpv::capped_angles(nr, batch.suns[r], -batch.rays[r].dir);
      cos_sun[r] = std::abs(batch.suns[r].z());
    }
    // Exact division except on rays with no weight at all.
    std::vector<double> guard(rays);
    for (std::size_t r = 0; r < rays; ++r) guard[r] = out.weight_sum[r] > 0.0 ? 0.0 : 1.0;
    const Tensor norm_w = out.weight_sum + Tensor({rays, 1}, std::move(guard));
    auto mean_of = [&](const Tensor& v) { return diff::sum(w * diff::reshape(v, {rays, n}), 1) / norm_w; };
    const rpv::ParamTensors p{accumulate(w_flat, o.rho0, rays, n), mean_of(o.k), mean_of(o.theta),
                              mean_of(o.rhoc)};
    out.color = rpv::rpv_factor(p, rpv::AngleTerms::from(angles)) * Tensor({rays, 1}, std::move(cos_sun));
    return out;
  }

  std::vector<rpv::AngleConfig> angles(rays * n);
  std::vector<double> cos_sun(rays * n);
  for (std::size_t r = 0; r < rays; ++r) {
    const Direction view = -batch.rays[r].dir;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& nr = normals[r * n + i];
      angles[r * n + i] = rpv::capped_angles(nr.normal, batch.suns[r], view);
      cos_sun[r * n + i] = std::abs(batch.suns[r].z());
      if (nr.degenerate) out.degenerate_normal[r] = 1;
    }
  }
  const rpv::ParamTensors p{o.rho0, o.k, o.theta, o.rhoc};
  const Tensor c = rpv::rpv_factor(p, rpv::AngleTerms::from(angles)) * Tensor({rays * n, 1}, std::move(cos_sun));
  out.color = accumulate(w_flat, c, rays, n);
  return out;
}

namespace {

// Normalised expected depth along each ray from a coarse density pass, or
// nothing when the ray is empty.
std::vector<std::optional<double>> coarse_depths(const field::RadianceField& field, std::span<const Ray> rays,
                                                 std::span<const SampleSet> coarse) {
  const Tensor sigma = field.density(sample_points(rays, coarse));
  std::vector<std::optional<double>> out(rays.size());
  std::size_t offset = 0;
  for (std::size_t r = 0; r < rays.size(); ++r) {
    const std::size_t n = coarse[r].size();
    const CompositeWeights w = composite_weights(sigma.values().subspan(offset, n), coarse[r].delta);
    offset += n;
    if (!w.empty()) out[r] = render_depth(w, coarse[r].t) / w.total();
  }
  return out;
}

SampleSet finish_samples(const Ray& ray, const SampleSet& strat, std::optional<double> center,
                         const SamplingConfig& config, Rng& rng, bool* fell_back) {
  if (config.n_guided <= 0) return strat;
  GuidedSamples g = center ? guided_samples(ray, *center, config.guide_sigma, config.n_guided, rng)
                           : GuidedSamples{stratified_samples(ray, config.n_guided, rng), true};
  if (fell_back != nullptr) *fell_back = g.fell_back;
  return merge_samples(strat, g.samples, ray);
}

}  // namespace

SampleSet sample_ray(const field::RadianceField& field, const Ray& ray, std::optional<double> prior,
                     const SamplingConfig& config, Rng& rng, bool* fell_back) {
  const SampleSet strat = stratified_samples(ray, config.n_stratified, rng);
  std::optional<double> center = prior;
  if (!center && config.n_guided > 0) {
    const Ray one[1] = {ray};
    const SampleSet set[1] = {strat};
    center = coarse_depths(field, one, set).front();
  }
  return finish_samples(ray, strat, center, config, rng, fell_back);
}

std::vector<RayRender> render_rays(const field::RadianceField& field, std::span<const Ray> rays,
                                   std::span<const Direction> suns, std::span<const std::optional<double>> priors,
                                   const SamplingConfig& config, ShadingMode mode, std::uint64_t seed,
                                   std::size_t chunk) {
  if (suns.size() != rays.size()) throw std::invalid_argument("render_rays: one sun per ray required");
  if (!priors.empty() && priors.size() != rays.size()) throw std::invalid_argument("render_rays: prior count");
  std::vector<RayRender> out(rays.size());
  for (std::size_t begin = 0; begin < rays.size(); begin += chunk) {
    const std::size_t end = std::min(rays.size(), begin + chunk);
    const auto chunk_rays = rays.subspan(begin, end - begin);
    std::vector<Rng> rngs;
    std::vector<SampleSet> strat;
    for (std::size_t i = begin; i < end; ++i) {
      rngs.emplace_back(split_seed(seed, static_cast<std::uint64_t>(i)));
      strat.push_back(stratified_samples(rays[i], config.n_stratified, rngs.back()));
    }
    std::vector<std::optional<double>> centers(end - begin);
    bool need_coarse = false;
    for (std::size_t i = begin; i < end; ++i) {
      if (!priors.empty() && priors[i]) {
        centers[i - begin] = priors[i];
      } else {
        need_coarse = true;
      }
    }
    if (need_coarse && config.n_guided > 0) {
      const auto coarse = coarse_depths(field, chunk_rays, strat);
      for (std::size_t j = 0; j < centers.size(); ++j) {
        if (!centers[j]) centers[j] = coarse[j];
      }
    }
    RayBatch batch;
    for (std::size_t i = begin; i < end; ++i) {
      batch.rays.push_back(rays[i]);
      batch.suns.push_back(suns[i]);
      batch.samples.push_back(finish_samples(rays[i], strat[i - begin], centers[i - begin], config,
                                             rngs[i - begin], nullptr));
    }
    const BatchRender b = render_batch(field, field.weights(), batch, mode);
    for (std::size_t j = 0; j < batch.size(); ++j) {
      RayRender& r = out[begin + j];
      r.color = {b.color.at(j, 0), b.color.at(j, 1), b.color.at(j, 2)};
      r.depth = b.depth[j];
      r.depth_std = b.depth_std[j];
      r.weight_sum = b.weight_sum[j];
      r.empty = r.weight_sum < kEmptyRayThreshold;
      r.degenerate_normal = b.degenerate_normal[j] != 0;
    }
  }
  return out;
}

}  // namespace rpvfield::render

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "fd_oracle.hpp"
#include "rpvfield/diff/graph.hpp"
#include "rpvfield/render/composite.hpp"
#include "rpvfield/render/renderer.hpp"
#include "rpvfield/render/sampling.hpp"

using namespace rpvfield;
using namespace rpvfield::render;
using diff::Tensor;

namespace {

const Ray kRay{Vec3(0.1, -0.2, 1.5), Direction::normalized(Vec3(0.1, 0.05, -1.0)), 0.5, 2.5};

field::FieldConfig small_config(std::uint64_t seed = 3) {
  field::FieldConfig c;
  c.trunk_layers = 4;
  c.trunk_width = 16;
  c.pe_frequencies = 2;
  c.skip_at = 2;
  c.seed = seed;
  return c;
}

field::RadianceField randomized(std::uint64_t seed, double scale = 1.5) {
  field::RadianceField f(small_config(seed));
  std::mt19937_64 rng(seed);
  std::vector<Tensor> w;
  for (const Tensor& t : f.weights()) {
    std::normal_distribution<double> n(0.0, scale / std::sqrt(static_cast<double>(t.shape()[0])));
    std::vector<double> v(t.size());
    for (double& x : v) x = n(rng);
    w.emplace_back(t.shape(), std::move(v));
  }
  f.set_weights(std::move(w));
  return f;
}

// Direct evaluation: T_i = exp(-sum_{j<i} sigma_j delta_j), no running product.
std::vector<double> naive_weights(const std::vector<double>& sigma, const std::vector<double>& delta) {
  std::vector<double> w(sigma.size());
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < i; ++j) acc += sigma[j] * delta[j];
    w[i] = std::exp(-acc) * (1.0 - std::exp(-sigma[i] * delta[i]));
  }
  return w;
}

CompositeWeights two_equal_weights() {
  CompositeWeights w;
  w.weights = {0.5, 0.5};
  w.residual = 0.0;
  return w;
}

}  // namespace

TEST(Ray, ClipToBox) {
  Ray r{Vec3(0, 0, 3), Direction::normalized(Vec3(0, 0, -1)), 0, 1};
  ASSERT_TRUE(clip_to_box(r, Vec3(-1, -1, -1), Vec3(1, 1, 1)));
  EXPECT_DOUBLE_EQ(r.t_near, 2.0);
  EXPECT_DOUBLE_EQ(r.t_far, 4.0);
  Ray miss{Vec3(5, 0, 3), Direction::normalized(Vec3(0, 0, -1)), 0, 1};
  EXPECT_FALSE(clip_to_box(miss, Vec3(-1, -1, -1), Vec3(1, 1, 1)));
  EXPECT_THROW((Ray{Vec3(), Direction::up(), 1.0, 1.0}.validate()), std::invalid_argument);
}

TEST(Stratified, SingleSampleInBounds) {
  Rng rng(1);
  const SampleSet s = stratified_samples(kRay, 1, rng);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_GE(s.t[0], kRay.t_near);
  EXPECT_LT(s.t[0], kRay.t_far);
  EXPECT_DOUBLE_EQ(s.delta[0], kRay.t_far - s.t[0]);
}

TEST(Stratified, ReproducibleUnderSeed) {
  Rng a(42), b(42);
  EXPECT_EQ(stratified_samples(kRay, 64, a).t, stratified_samples(kRay, 64, b).t);
}

TEST(Stratified, EachSampleInItsOwnBin) {
  const double width = (kRay.t_far - kRay.t_near) / 64;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    Rng rng(seed);
    const SampleSet s = stratified_samples(kRay, 64, rng);
    for (int i = 0; i < 64; ++i) {
      ASSERT_GE(s.t[i], kRay.t_near + i * width);
      ASSERT_LE(s.t[i], kRay.t_near + (i + 1) * width);
      ASSERT_GT(s.delta[i], 0.0);
    }
  }
}

TEST(Guided, DegenerateGaussianCollapsesOnPrior) {
  Rng rng(3);
  const GuidedSamples g = guided_samples(kRay, 1.2, 0.0, 16, rng);
  EXPECT_FALSE(g.fell_back);
  for (double t : g.samples.t) EXPECT_NEAR(t, 1.2, 1e-6);
  for (double d : g.samples.delta) EXPECT_GT(d, 0.0);
}

TEST(Guided, SampleMeanConcentratesOnPrior) {
  const double prior = 1.4, sigma = 0.05;
  const int n = 64;
  int within = 0;
  double grand = 0.0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    Rng rng(seed);
    const GuidedSamples g = guided_samples(kRay, prior, sigma, n, rng);
    double mean = 0.0;
    for (double t : g.samples.t) mean += t / n;
    grand += mean / 1000.0;
    if (std::abs(mean - prior) <= 3.0 * sigma / std::sqrt(n)) ++within;
  }
  EXPECT_GE(within, 990);
  EXPECT_LT(std::abs(grand - prior), 3.0 * sigma / std::sqrt(64.0 * 1000.0));
}

TEST(Guided, PriorOutsideBoundsFallsBack) {
  Rng rng(4);
  const GuidedSamples g = guided_samples(kRay, 7.0, 0.1, 8, rng);
  EXPECT_TRUE(g.fell_back);
  EXPECT_EQ(g.samples.size(), 8u);
}

TEST(Guided, MergedSetAscendingWithPositiveDeltas) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    const SampleSet a = stratified_samples(kRay, 64, rng);
    const SampleSet b = guided_samples(kRay, 1.0, 0.02, 64, rng).samples;
    const SampleSet m = merge_samples(a, b, kRay);
    ASSERT_EQ(m.size(), 128u);
    for (std::size_t i = 0; i < m.size(); ++i) {
      ASSERT_GT(m.delta[i], 0.0);
      if (i > 0) ASSERT_GT(m.t[i], m.t[i - 1]);
    }
    ASSERT_LT(m.t.back(), kRay.t_far);
  }
}

TEST(Composite, ZeroDensityGivesNoWeight) {
  const std::vector<double> sigma(5, 0.0), delta(5, 0.2);
  const CompositeWeights w = composite_weights(sigma, delta);
  for (double v : w.weights) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(w.residual, 1.0);
  EXPECT_TRUE(w.empty());
  EXPECT_EQ(render_depth(w, std::vector<double>{1, 2, 3, 4, 5}), 0.0);
}

TEST(Composite, OpaqueSampleTakesAllWeight) {
  const CompositeWeights w = composite_weights(std::vector<double>{1e6}, std::vector<double>{1.0});
  EXPECT_DOUBLE_EQ(w.weights[0], 1.0);
  EXPECT_EQ(w.transmittance[0], 1.0);
  EXPECT_DOUBLE_EQ(render_depth(w, std::vector<double>{5.0}), 5.0);
  EXPECT_EQ(depth_std(w, std::vector<double>{5.0}, 5.0), 0.0);
}

TEST(Composite, ConservationMonotonicityAndNaiveOracle) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_sum = 0.0, worst_oracle = 0.0;
  for (int ray = 0; ray < 10000; ++ray) {
    const std::size_t n = 1 + static_cast<std::size_t>(u(rng) * 64);
    std::vector<double> sigma(n), delta(n);
    for (std::size_t i = 0; i < n; ++i) {
      sigma[i] = u(rng) < 0.3 ? 0.0 : -std::log(u(rng)) * 20.0;
      delta[i] = 1e-3 + u(rng) * 0.05;
    }
    const CompositeWeights w = composite_weights(sigma, delta);
    worst_sum = std::max(worst_sum, std::abs(w.total() + w.residual - 1.0));
    ASSERT_EQ(w.transmittance[0], 1.0);
    for (std::size_t i = 1; i < n; ++i) ASSERT_LE(w.transmittance[i], w.transmittance[i - 1]);
    const auto naive = naive_weights(sigma, delta);
    for (std::size_t i = 0; i < n; ++i) worst_oracle = std::max(worst_oracle, std::abs(naive[i] - w.weights[i]));
  }
  EXPECT_LT(worst_sum, 1e-9);
  EXPECT_LT(worst_oracle, 1e-12);
}

TEST(Depth, TwoEqualWeights) {
  const CompositeWeights w = two_equal_weights();
  const std::vector<double> t{2.0, 4.0};
  const double d = render_depth(w, t);
  EXPECT_DOUBLE_EQ(d, 3.0);
  EXPECT_DOUBLE_EQ(depth_std(w, t, d), 1.0);
  const std::vector<double> shifted{12.0, 14.0};
  EXPECT_DOUBLE_EQ(depth_std(w, shifted, d + 10.0), 1.0);
}

TEST(Depth, GaussianBumpConverges) {
  const double t0 = 0.0, t1 = 10.0, len = t1 - t0, target = 6.3;
  const double s = len / 200.0;
  const double amplitude = 8.0 / (s * std::sqrt(2.0 * 3.141592653589793));
  const std::size_t n = 2000;
  std::vector<double> t(n), sigma(n), delta(n, len / n);
  for (std::size_t i = 0; i < n; ++i) {
    t[i] = t0 + (i + 0.5) * len / n;
    sigma[i] = amplitude * std::exp(-0.5 * (t[i] - target) * (t[i] - target) / (s * s));
  }
  const CompositeWeights w = composite_weights(sigma, delta);
  EXPECT_LT(std::abs(render_depth(w, t) - target), 0.01 * len);
}

TEST(Shading, ConstantParamsSurfaceEqualsVolume) {
  const rpv::RpvParams p{{0.3, 0.5, 0.2}, 0.7, -0.3, 0.6};
  const Direction n = Direction::normalized(Vec3(0.1, -0.2, 1.0));
  const Direction sun = Direction::from_spherical(0.7, 2.0);
  const Direction view = Direction::from_spherical(0.3, 4.0);
  for (const std::vector<double> sigma : {std::vector<double>{0, 3, 50, 1e4}, std::vector<double>{0.1, 0.2, 0.3, 0.1}}) {
    const CompositeWeights w = composite_weights(sigma, std::vector<double>(4, 0.5));
    const std::vector<rpv::RpvParams> ps(4, p);
    const std::vector<Direction> ns(4, n);
    const rpv::Rgb a = shade_surface(w, ps, ns, sun, view).color;
    const rpv::Rgb b = shade_volume(w, ps, ns, sun, view).color;
    for (int c = 0; c < 3; ++c) EXPECT_NEAR(a[c], b[c], 1e-12);
  }
  // Opaque ray: both equal the plain shade.
  const CompositeWeights w = composite_weights(std::vector<double>{1e9}, std::vector<double>{1.0});
  const rpv::Rgb ref = rpv::shade_capped(p, n, sun, view);
  const rpv::Rgb a = shade_surface(w, std::vector<rpv::RpvParams>{p}, std::vector<Direction>{n}, sun, view).color;
  for (int c = 0; c < 3; ++c) EXPECT_NEAR(a[c], ref[c], 1e-9);
}

TEST(Shading, LambertianNadirGivesAccumulatedAlbedo) {
  const CompositeWeights w = two_equal_weights();
  const std::vector<rpv::RpvParams> ps{rpv::RpvParams::lambertian({0.2, 0.4, 0.6}),
                                       rpv::RpvParams::lambertian({0.4, 0.2, 0.0})};
  const std::vector<Direction> ns(2, Direction::up());
  const rpv::Rgb c = shade_surface(w, ps, ns, Direction::up(), Direction::up()).color;
  EXPECT_NEAR(c[0], 0.3, 1e-15);
  EXPECT_NEAR(c[1], 0.3, 1e-15);
  EXPECT_NEAR(c[2], 0.3, 1e-15);
}

TEST(Shading, DegenerateAccumulatedNormalFlagged) {
  const CompositeWeights w = two_equal_weights();
  const std::vector<rpv::RpvParams> ps(2, rpv::RpvParams::lambertian({0.5, 0.5, 0.5}));
  const std::vector<Direction> ns{Direction::normalized(Vec3(1, 0, 0)), Direction::normalized(Vec3(-1, 0, 0))};
  EXPECT_TRUE(shade_surface(w, ps, ns, Direction::up(), Direction::up()).degenerate_normal);
}

TEST(FieldRender, EmptyFieldRendersBlack) {
  field::RadianceField f(small_config());
  std::vector<Tensor> w = f.weights();
  const std::size_t d = f.slot("density.b");
  w[f.slot("density.w")] = Tensor::zeros(w[f.slot("density.w")].shape());
  w[d] = Tensor::full({1, 1}, -200.0);
  f.set_weights(w);
  Rng rng(1);
  const RayRender r = render_ray(f, kRay, stratified_samples(kRay, 16, rng), Direction::up(), ShadingMode::kSurface);
  EXPECT_TRUE(r.empty);
  for (double c : r.color) EXPECT_LT(c, 1e-12);
}

TEST(FieldRender, VolumeColourWithinConvexBound) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const field::RadianceField f = randomized(seed, 2.0);
    Rng rng(seed);
    const SampleSet s = stratified_samples(kRay, 32, rng);
    const Direction sun = Direction::from_spherical(0.5, 1.0);
    const RayRender r = render_ray(f, kRay, s, sun, ShadingMode::kVolume);
    // Upper bound: max per-sample shade times the weight sum.
    std::vector<double> pts;
    for (double t : s.t) {
      const Vec3 x = kRay.at(t);
      pts.insert(pts.end(), {x.x, x.y, x.z});
    }
    const Tensor x({s.size(), 3}, pts);
    const field::FieldOutputs o = f.forward(x);
    const auto normals = field::analytic_normals(field::density_fn(f), x);
    for (int c = 0; c < 3; ++c) {
      double top = 0.0;
      for (std::size_t i = 0; i < s.size(); ++i) {
        const rpv::RpvParams p{{o.rho0.at(i, 0), o.rho0.at(i, 1), o.rho0.at(i, 2)}, o.k[i], o.theta[i], o.rhoc[i]};
        top = std::max(top, rpv::shade_capped(p, normals[i].normal, sun, -kRay.dir)[c]);
      }
      ASSERT_GE(r.color[c], 0.0);
      ASSERT_LE(r.color[c], top * r.weight_sum + 1e-12);
    }
  }
}

TEST(FieldRender, BatchMatchesSingleRayPath) {
  const field::RadianceField f = randomized(7);
  RayBatch batch;
  std::mt19937_64 g(8);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (int r = 0; r < 6; ++r) {
    Ray ray{Vec3(u(g), u(g), 1.2), Direction::normalized(Vec3(u(g) * 0.3, u(g) * 0.3, -1.0)), 0.0, 1.0};
    ASSERT_TRUE(clip_to_box(ray, Vec3(-1, -1, -1), Vec3(1, 1, 1)));
    Rng rng(r);
    batch.rays.push_back(ray);
    batch.suns.push_back(Direction::from_spherical(0.2 + 0.1 * r, 0.5 * r));
    batch.samples.push_back(stratified_samples(ray, 24, rng));
  }
  for (ShadingMode mode : {ShadingMode::kLambertian, ShadingMode::kSurface, ShadingMode::kVolume}) {
    const BatchRender b = render_batch(f, f.weights(), batch, mode);
    for (std::size_t r = 0; r < batch.size(); ++r) {
      const RayRender s = render_ray(f, batch.rays[r], batch.samples[r], batch.suns[r], mode);
      for (std::size_t c = 0; c < 3; ++c) {
        ASSERT_NEAR(b.color.at(r, c), s.color[c], 1e-12 * std::max(1.0, std::abs(s.color[c]))) << static_cast<int>(mode) << " " << r;
      }
      ASSERT_NEAR(b.depth[r], s.depth, 1e-12);
      ASSERT_NEAR(b.depth_std[r], s.depth_std, 1e-9);
      ASSERT_NEAR(b.weight_sum[r], s.weight_sum, 1e-12);
    }
  }
}

// Colour and depth gradients through compositing and the RPV shading, with
// normals held fixed (they are constants in training). One normal per ray so
// the accumulated surface normal does not move with the weights either.
TEST(FieldRender, BatchGradientsMatchFiniteDifferences) {
  const field::RadianceField f = randomized(11, 1.2);
  RayBatch batch;
  std::vector<Direction> normals;
  for (int r = 0; r < 3; ++r) {
    Ray ray{Vec3(0.2 * r - 0.2, 0.1, 1.2), Direction::normalized(Vec3(0.1, -0.1 * r, -1.0)), 0.0, 1.0};
    ASSERT_TRUE(clip_to_box(ray, Vec3(-1, -1, -1), Vec3(1, 1, 1)));
    Rng rng(r + 20);
    batch.rays.push_back(ray);
    batch.suns.push_back(Direction::from_spherical(0.4, 1.0 + r));
    batch.samples.push_back(stratified_samples(ray, 8, rng));
    for (int i = 0; i < 8; ++i) normals.push_back(Direction::from_spherical(0.1 + 0.15 * r, 0.7 + r));
  }
  const Tensor colour_coef({3, 3}, {0.3, -0.2, 0.5, 0.1, 0.4, -0.6, 0.2, 0.2, 0.2});
  const Tensor depth_coef({3, 1}, {0.7, -0.4, 0.9});
  for (ShadingMode mode : {ShadingMode::kLambertian, ShadingMode::kSurface, ShadingMode::kVolume}) {
    auto loss = [&](std::span<const Tensor> w) {
      const BatchRender b = render_batch(f, w, batch, mode, normals);
      return diff::sum(b.color * colour_coef) + diff::sum(b.depth * depth_coef);
    };
    diff::Graph graph;
    std::vector<Tensor> attached;
    for (const Tensor& w : f.weights()) attached.push_back(graph.parameter(w));
    const diff::Gradients grads = graph.backward(loss(attached));
    const rpvfield::testing::ScalarFn numeric = [&](const std::vector<Tensor>& w) { return loss(w).item(); };
    for (std::size_t s = 0; s < attached.size(); ++s) {
      const auto fd = rpvfield::testing::central_difference(numeric, f.weights(), s);
      EXPECT_LT(rpvfield::testing::relative_error(grads.of(attached[s]).values(), fd), 1e-4)
          << static_cast<int>(mode) << " " << f.names()[s];
    }
  }
}

TEST(FieldRender, RenderRaysIsDeterministicAndUsesPriors) {
  const field::RadianceField f = randomized(13);
  std::vector<Ray> rays;
  std::vector<Direction> suns;
  for (int i = 0; i < 10; ++i) {
    Ray r{Vec3(-0.5 + 0.1 * i, 0.0, 1.5), Direction::normalized(Vec3(0, 0, -1)), 0, 1};
    ASSERT_TRUE(clip_to_box(r, Vec3(-1, -1, -1), Vec3(1, 1, 1)));
    rays.push_back(r);
    suns.push_back(Direction::from_spherical(0.3, 0.2));
  }
  SamplingConfig cfg{16, 16, 0.05};
  const auto a = render_rays(f, rays, suns, {}, cfg, ShadingMode::kSurface, 9, 4);
  const auto again = render_rays(f, rays, suns, {}, cfg, ShadingMode::kSurface, 9, 4);
  // A different chunking only changes GEMM blocking, not the samples.
  const auto b = render_rays(f, rays, suns, {}, cfg, ShadingMode::kSurface, 9, 7);
  for (std::size_t i = 0; i < rays.size(); ++i) {
    EXPECT_EQ(a[i].color, again[i].color);
    EXPECT_EQ(a[i].depth, again[i].depth);
    EXPECT_NEAR(a[i].depth, b[i].depth, 1e-12);
    EXPECT_NEAR(a[i].color[0], b[i].color[0], 1e-12);
  }
  std::vector<std::optional<double>> priors(rays.size(), 1.0);
  const auto c = render_rays(f, rays, suns, priors, cfg, ShadingMode::kSurface, 9);
  EXPECT_NE(a[0].depth, c[0].depth);
}

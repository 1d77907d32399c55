#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fd_oracle.hpp"
#include "rpvfield/common/error.hpp"
#include "rpvfield/diff/graph.hpp"
#include "rpvfield/rpv/brf.hpp"
#include "rpvfield/rpv/rpv.hpp"
#include "rpvfield/rpv/rpv_tensor.hpp"

using namespace rpvfield;
using namespace rpvfield::rpv;

namespace {

constexpr Rgb kPointA{0.122, 0.105, 0.091};
// Parameter sets of the six BRF plots: backward, forward, bowl, bell and the
// two hotspot variants.
const RpvParams kBackward{kPointA, 0.996, -0.174, 0.979};
const RpvParams kForward{kPointA, 0.996, 0.174, 0.979};
const RpvParams kBowl{kPointA, 0.5, -0.174, 0.979};
const RpvParams kBell{kPointA, 1.5, -0.174, 0.979};
const RpvParams kHotspotHalf{kPointA, 0.996, -0.174, 0.5};
const RpvParams kHotspotFull{kPointA, 0.996, -0.174, 0.0};

const Direction kPaperSun = Direction::from_spherical(deg_to_rad(52.1), deg_to_rad(142.5));

// Random direction in the upper hemisphere of n with zenith below 85 degrees.
Direction random_above(const Direction& n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (;;) {
    const Direction d = Direction::from_spherical(deg_to_rad(85.0) * u(rng), 2.0 * kPi * u(rng));
    // Rotate z onto n via a simple frame.
    const Vec3 ref = std::abs(n.x()) < 0.9 ? Vec3(1, 0, 0) : Vec3(0, 1, 0);
    const Vec3 t1 = Direction::normalized(ref - n.vec() * dot(ref, n.vec())).vec();
    const Vec3 t2 = cross(n.vec(), t1);
    const Direction w = Direction::normalized(t1 * d.x() + t2 * d.y() + n.vec() * d.z());
    if (dot(w.vec(), n.vec()) > std::cos(deg_to_rad(85.0))) return w;
  }
}

RpvParams random_params(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return {{u(rng), u(rng), u(rng)}, 2.0 * u(rng), 2.0 * u(rng) - 1.0, u(rng)};
}

}  // namespace

TEST(RpvAngles, NadirSunAndView) {
  const AngleConfig a = angles_from_directions(Direction::up(), Direction::up(), Direction::up());
  EXPECT_EQ(a.theta_ir, 0.0);
  EXPECT_EQ(a.theta_r, 0.0);
  EXPECT_EQ(a.g, 0.0);
}

TEST(RpvAngles, RecoversPaperSunZenith) {
  const AngleConfig a = angles_from_directions(Direction::up(), kPaperSun, Direction::up());
  EXPECT_NEAR(rad_to_deg(a.theta_ir), 52.1, 1e-10);
}

TEST(RpvAngles, AntipodalAzimuthsAtThirtyDegrees) {
  // cos g = cos^2(30) - sin^2(30) = 0.5
  const Direction a = Direction::from_spherical(deg_to_rad(30), deg_to_rad(10));
  const Direction b = Direction::from_spherical(deg_to_rad(30), deg_to_rad(190));
  const AngleConfig ang = angles_from_directions(Direction::up(), a, b);
  EXPECT_NEAR(ang.phi, kPi, 1e-7);
  EXPECT_NEAR(rad_to_deg(ang.g), 60.0, 1e-10);
}

TEST(RpvAngles, BelowSurfaceIsGeometryError) {
  const Direction below = Direction::normalized({0.3, 0.0, -0.5});
  EXPECT_THROW((void)angles_from_directions(Direction::up(), below, Direction::up()), GeometryError);
  EXPECT_THROW((void)angles_from_directions(Direction::up(), Direction::up(), below), GeometryError);
  const AngleConfig capped = capped_angles(Direction::up(), below, Direction::up());
  EXPECT_DOUBLE_EQ(capped.theta_ir, kZenithCap);
}

TEST(RpvMinnaert, Examples) {
  EXPECT_DOUBLE_EQ(minnaert(0.3, 1.1, 1.0), 1.0);
  EXPECT_DOUBLE_EQ(minnaert(0.0, 0.0, 2.0), 2.0);
  // (cos60 * cos60 * (cos60 + cos60))^(-0.5) = 0.25^(-0.5)
  EXPECT_NEAR(minnaert(deg_to_rad(60), deg_to_rad(60), 0.5), 2.0, 1e-12);
  EXPECT_THROW((void)minnaert(kPi / 2, 0.0, 0.5), DomainError);
}

TEST(RpvHenyeyGreenstein, Examples) {
  EXPECT_DOUBLE_EQ(henyey_greenstein(0.7, 0.0), 1.0);
  // 0.969724 * 0.682276^(-1.5), evaluated independently.
  EXPECT_NEAR(henyey_greenstein(0.0, -0.174), 1.720711266408316, 1e-12);
  EXPECT_THROW((void)henyey_greenstein(0.0, -1.0), DomainError);
  EXPECT_THROW((void)henyey_greenstein(0.0, 1.5), DomainError);
}

TEST(RpvGeometricFactor, Examples) {
  EXPECT_DOUBLE_EQ(geometric_factor(0.4, 0.4, 0.0), 0.0);
  EXPECT_NEAR(geometric_factor(deg_to_rad(45), 0.0, 1.3), 1.0, 1e-15);
  EXPECT_NEAR(geometric_factor(deg_to_rad(45), deg_to_rad(45), kPi), 2.0, 1e-15);
}

TEST(RpvHotspot, Examples) {
  EXPECT_DOUBLE_EQ(hotspot(1.0, 3.7), 1.0);
  EXPECT_DOUBLE_EQ(hotspot(0.0, 0.0), 2.0);
  EXPECT_DOUBLE_EQ(hotspot(0.5, 1.0), 1.25);
}

TEST(RpvFactor, LambertianLimitIsRho0) {
  const Rgb rho0{0.2, 0.4, 0.6};
  const AngleConfig a{0.5, 0.9, 2.0, 1.1};
  const Rgb f = rpv_factor(RpvParams::lambertian(rho0), a);
  for (int c = 0; c < 3; ++c) EXPECT_DOUBLE_EQ(f[c], rho0[c]);
}

TEST(RpvFactor, BackwardSetFavoursBackscatter) {
  const double z = deg_to_rad(52.1);
  const AngleConfig back{z, z, 0.0, 0.0};
  // Forward viewing: same zenith, opposite azimuth; cos g = cos^2 z - sin^2 z.
  const AngleConfig fwd{z, z, kPi, std::acos(std::cos(2 * z))};
  const Rgb fb = rpv_factor(kBackward, back);
  const Rgb ff = rpv_factor(kBackward, fwd);
  for (int c = 0; c < 3; ++c) EXPECT_GT(fb[c], ff[c]);
}

TEST(RpvFactor, BowlIncreasesWithViewZenith) {
  double previous = 0.0;
  for (int zen = 0; zen < 90; ++zen) {
    const Direction view = Direction::from_spherical(deg_to_rad(zen), deg_to_rad(142.5 + 90.0));
    const double v = rpv_factor(kBowl, capped_angles(Direction::up(), kPaperSun, view))[0];
    EXPECT_GT(v, previous) << zen;
    previous = v;
  }
}

TEST(RpvFactor, InvalidParamsRejected) {
  RpvParams p = kBackward;
  p.k = 2.5;
  EXPECT_THROW((void)rpv_factor(p, AngleConfig{}), DomainError);
  p = kBackward;
  p.rho0[1] = -0.1;
  EXPECT_THROW((void)rpv_factor(p, AngleConfig{}), DomainError);
}

TEST(RpvShade, LambertianCosine) {
  const Rgb rho0{0.3, 0.2, 0.1};
  const RpvParams p = RpvParams::lambertian(rho0);
  const Rgb nadir = shade(p, Direction::up(), Direction::up(), Direction::up());
  const Rgb oblique = shade(p, Direction::up(), Direction::from_spherical(deg_to_rad(60), 0.3), Direction::up());
  for (int c = 0; c < 3; ++c) {
    EXPECT_DOUBLE_EQ(nadir[c], rho0[c]);
    EXPECT_NEAR(oblique[c], 0.5 * rho0[c], 1e-15);
  }
}

TEST(RpvShade, PointAChannelOrder) {
  const Rgb c = shade(kBackward, Direction::up(), kPaperSun, Direction::from_spherical(0.2, 1.0));
  EXPECT_GT(c[0], c[1]);
  EXPECT_GT(c[1], c[2]);
  EXPECT_NEAR(c[0] / c[1], 0.122 / 0.105, 1e-12);
}

TEST(RpvShade, CosineUsesFlatNormal) {
  const Direction tilted = Direction::from_spherical(deg_to_rad(20), 0.0);
  const Direction sun = Direction::from_spherical(deg_to_rad(40), 0.0);
  const RpvParams p = RpvParams::lambertian({0.5, 0.5, 0.5});
  EXPECT_NEAR(shade(p, tilted, sun, Direction::up())[0], 0.5 * std::cos(deg_to_rad(40)), 1e-15);
}

TEST(RpvProperty, Reciprocity) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 2000; ++i) {
    const Direction n = random_above(Direction::up(), rng);
    const Direction wi = random_above(n, rng), wr = random_above(n, rng);
    const RpvParams p = random_params(rng);
    const Rgb a = rpv_factor(p, angles_from_directions(n, wi, wr));
    const Rgb b = rpv_factor(p, angles_from_directions(n, wr, wi));
    for (int c = 0; c < 3; ++c) ASSERT_NEAR(a[c], b[c], 1e-12 * std::max(1.0, std::abs(a[c])));
  }
}

TEST(RpvProperty, LimitsAndRanges) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    const double ti = 1.5 * u(rng), tr = 1.5 * u(rng), phi = kPi * u(rng), g = kPi * u(rng);
    ASSERT_NEAR(minnaert(ti, tr, 1.0), 1.0, 1e-15);
    ASSERT_NEAR(henyey_greenstein(g, 0.0), 1.0, 1e-15);
    const double G = geometric_factor(ti, tr, phi);
    ASSERT_NEAR(hotspot(1.0, G), 1.0, 1e-15);
    const double rhoc = u(rng);
    const double h = hotspot(rhoc, G);
    ASSERT_GE(h, 1.0);
    ASSERT_LE(h, 2.0 - rhoc + 1e-15);
    ASSERT_NEAR(hotspot(rhoc, 0.0), 2.0 - rhoc, 1e-15);
    const Rgb f = rpv_factor(random_params(rng), AngleConfig{ti, tr, phi, g});
    for (double v : f) ASSERT_GE(v, 0.0);
  }
}

// With cos g = w_ir . w_r, Theta < 0 puts the lobe at g = 0 (backscatter):
// F_HG grows with cos g. Theta > 0 reverses the ordering.
TEST(RpvProperty, HenyeyGreensteinMonotoneInCosG) {
  for (double theta : {-0.9, -0.3, -0.174, -0.01, 0.01, 0.174, 0.3, 0.9}) {
    double previous = theta < 0 ? -INFINITY : INFINITY;
    for (int i = 0; i <= 200; ++i) {
      const double cos_g = -1.0 + 2.0 * i / 200.0;
      const double f = henyey_greenstein(std::acos(cos_g), theta);
      if (theta < 0) {
        ASSERT_GT(f, previous) << theta << " " << cos_g;
      } else {
        ASSERT_LT(f, previous) << theta << " " << cos_g;
      }
      previous = f;
    }
  }
}

TEST(RpvProperty, TensorRouteMatchesScalarRoute) {
  std::mt19937_64 rng(13);
  std::vector<AngleConfig> angles;
  std::vector<RpvParams> params;
  for (int i = 0; i < 50; ++i) {
    const Direction n = random_above(Direction::up(), rng);
    angles.push_back(angles_from_directions(n, random_above(n, rng), random_above(n, rng)));
    params.push_back(random_params(rng));
  }
  std::vector<double> rho0, k, th, rc;
  for (const auto& p : params) {
    rho0.insert(rho0.end(), p.rho0.begin(), p.rho0.end());
    k.push_back(p.k);
    th.push_back(p.theta);
    rc.push_back(p.rhoc);
  }
  const std::size_t n = params.size();
  const ParamTensors pt{diff::Tensor({n, 3}, rho0), diff::Tensor({n, 1}, k), diff::Tensor({n, 1}, th),
                        diff::Tensor({n, 1}, rc)};
  const diff::Tensor out = rpv_factor(pt, AngleTerms::from(angles));
  for (std::size_t i = 0; i < n; ++i) {
    const Rgb ref = rpv_factor(params[i], angles[i]);
    for (std::size_t c = 0; c < 3; ++c) ASSERT_NEAR(out.at(i, c), ref[c], 1e-12 * std::max(1.0, ref[c]));
  }
}

// Autodiff through the tensor route against central differences of the
// scalar route (an independent implementation).
TEST(RpvProperty, ShadeGradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  for (int trial = 0; trial < 100; ++trial) {
    const Direction n = random_above(Direction::up(), rng);
    const Direction wi = random_above(n, rng), wr = random_above(n, rng);
    const RpvParams p{{u(rng), u(rng), u(rng)}, 2.0 * u(rng), 2.0 * u(rng) - 1.0, u(rng)};
    const double cos_sun = std::abs(wi.z());
    const std::vector<AngleConfig> ang{angles_from_directions(n, wi, wr)};
    const AngleTerms terms = AngleTerms::from(ang);
    const std::vector<diff::Tensor> inputs{diff::Tensor({1, 3}, {p.rho0[0], p.rho0[1], p.rho0[2]}),
                                           diff::Tensor({1, 1}, {p.k}), diff::Tensor({1, 1}, {p.theta}),
                                           diff::Tensor({1, 1}, {p.rhoc})};
    const diff::Tensor w({1, 3}, {0.3, -0.7, 1.1});

    diff::Graph g;
    std::vector<diff::Tensor> att;
    for (const auto& t : inputs) att.push_back(g.parameter(t));
    const diff::Tensor loss = diff::sum(rpv_factor({att[0], att[1], att[2], att[3]}, terms) * cos_sun * w);
    const diff::Gradients grads = g.backward(loss);

    auto scalar_loss = [&](const std::vector<diff::Tensor>& a) {
      const RpvParams q{{a[0][0], a[0][1], a[0][2]}, a[1][0], a[2][0], a[3][0]};
      const Rgb c = shade(q, n, wi, wr);
      return 0.3 * c[0] - 0.7 * c[1] + 1.1 * c[2];
    };
    for (std::size_t k = 0; k < inputs.size(); ++k) {
      const auto numeric = rpvfield::testing::central_difference(scalar_loss, inputs, k);
      ASSERT_LT(rpvfield::testing::relative_error(grads.of(att[k]).values(), numeric), 1e-4) << trial << " " << k;
    }
  }
}

TEST(RpvBrf, LambertianGridIsConstant) {
  const BrfGrid grid = brf_sweep(RpvParams::lambertian(kPointA), Direction::up(), kPaperSun, 18, 36);
  for (const Rgb& v : grid.values) EXPECT_DOUBLE_EQ(v[0], 0.122);
  EXPECT_NEAR(grid.sun_zenith_deg, 52.1, 1e-9);
  EXPECT_NEAR(grid.sun_azimuth_deg, 142.5, 1e-9);
}

TEST(RpvBrf, BackwardMaximumInSunHalfPlane) {
  const BrfGrid grid = brf_sweep(kBackward, Direction::up(), kPaperSun, 90, 360);
  std::size_t best = 0;
  for (std::size_t i = 1; i < grid.values.size(); ++i) {
    if (grid.values[i][0] > grid.values[best][0]) best = i;
  }
  const double rel = grid.relative_azimuth_deg(best % grid.cols());
  EXPECT_TRUE(rel < 90.0 || rel > 270.0) << rel;
}

TEST(RpvBrf, FullHotspotArgmaxAtHotspotCell) {
  const BrfGrid grid = brf_sweep(kHotspotFull, Direction::up(), kPaperSun, 90, 360);
  std::size_t best = 0;
  for (std::size_t i = 1; i < grid.values.size(); ++i) {
    if (grid.values[i][0] > grid.values[best][0]) best = i;
  }
  EXPECT_EQ(best / grid.cols(), 52u);  // nearest zenith row to 52.1
  EXPECT_EQ(best % grid.cols(), 0u);   // relative azimuth 0
}

TEST(RpvBrf, RejectsDegenerateSweeps) {
  EXPECT_THROW((void)brf_sweep(kBackward, Direction::up(), kPaperSun, 1, 10), std::invalid_argument);
  EXPECT_THROW((void)brf_sweep(kBackward, Direction::up(), -kPaperSun, 10, 10), GeometryError);
}

TEST(RpvBrf, SvgIsByteStable) {
  const BrfGrid a = brf_sweep(kHotspotHalf, Direction::up(), kPaperSun, 9, 36);
  const BrfGrid b = brf_sweep(kHotspotHalf, Direction::up(), kPaperSun, 9, 36);
  const std::string sa = brf_svg(a, BrfChannel::kLuminance);
  EXPECT_EQ(sa, brf_svg(b, BrfChannel::kLuminance));
  EXPECT_EQ(sa.rfind("<svg", 0), 0u);
  EXPECT_NE(sa.find("fill=\"white\""), std::string::npos);
}

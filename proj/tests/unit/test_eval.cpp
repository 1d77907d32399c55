#include <gtest/gtest.h>

#include <cmath>

#include "rpvfield/common/error.hpp"
#include "rpvfield/eval/dsm.hpp"
#include "rpvfield/eval/metrics.hpp"
#include "rpvfield/eval/view_render.hpp"

namespace rpvfield::eval {
namespace {

using scene::Image;

Image pattern(int w, int h, int channels, double phase) {
  Image img(w, h, channels);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      for (int ch = 0; ch < channels; ++ch) {
        img.at(r, c, ch) = static_cast<float>(0.5 + 0.4 * std::sin(0.3 * r + 0.2 * c + phase));
      }
    }
  }
  return img;
}

Image flipped(const Image& img) {
  Image out(img.width, img.height, img.channels);
  for (int r = 0; r < img.height; ++r) {
    for (int c = 0; c < img.width; ++c) {
      for (int ch = 0; ch < img.channels; ++ch) out.at(r, c, ch) = img.at(img.height - 1 - r, img.width - 1 - c, ch);
    }
  }
  return out;
}

TEST(Psnr, IdenticalImagesHitTheCap) {
  const Image a = pattern(8, 8, 3, 0.0);
  EXPECT_EQ(psnr(a, a), kPsnrCap);
}

TEST(Psnr, UniformErrorOfATenth) {
  const Image a(8, 8, 3, 0.25f), b(8, 8, 3, 0.75f);
  Image c = a;
  // 0.25f and 0.35f differ by 0.1 up to float rounding.
  for (float& v : c.data) v = 0.35f;
  EXPECT_NEAR(psnr(a, c), 20.0, 1e-5);
  EXPECT_NEAR(psnr(a, b), 10.0 * std::log10(4.0), 1e-12);
}

TEST(Psnr, SymmetricAndFlipInvariant) {
  const Image a = pattern(9, 7, 3, 0.0), b = pattern(9, 7, 3, 0.4);
  EXPECT_EQ(psnr(a, b), psnr(b, a));
  EXPECT_NEAR(psnr(flipped(a), flipped(b)), psnr(a, b), 1e-12);
  EXPECT_THROW(psnr(a, pattern(7, 9, 3, 0.0)), ShapeError);
}

TEST(Ssim, IdenticalIsExactlyOne) {
  const Image a = pattern(16, 13, 3, 0.7);
  EXPECT_EQ(ssim(a, a), 1.0);
}

TEST(Ssim, MatchesReferenceOnBinaryInverse) {
  Image a(16, 16, 1), b(16, 16, 1);
  for (int r = 0; r < 16; ++r) {
    for (int c = 0; c < 16; ++c) {
      a.at(r, c) = (r * 7 + c * 3) % 5 < 2 ? 1.0f : 0.0f;
      b.at(r, c) = 1.0f - a.at(r, c);
    }
  }
  // Independent numpy evaluation of the same windowed formula.
  EXPECT_NEAR(ssim(a, b), -0.9195733721274991, 1e-12);
  EXPECT_LT(ssim(a, b), 0.0);
}

TEST(Ssim, MatchesReferenceOnSmoothPair) {
  const Image a = pattern(16, 16, 1, 0.0), b = pattern(16, 16, 1, 0.5);
  // float storage of the inputs limits agreement with the double reference.
  EXPECT_NEAR(ssim(a, b), 0.7289244371535968, 1e-6);
}

TEST(Ssim, LuminanceIsTheChannelMean) {
  const Image grey = pattern(16, 16, 1, 0.0);
  Image rgb(16, 16, 3);
  for (int r = 0; r < 16; ++r) {
    for (int c = 0; c < 16; ++c) {
      rgb.at(r, c, 0) = grey.at(r, c);
      rgb.at(r, c, 1) = grey.at(r, c);
      rgb.at(r, c, 2) = grey.at(r, c);
    }
  }
  const Image other = pattern(16, 16, 1, 0.5);
  Image other_rgb(16, 16, 3);
  for (int r = 0; r < 16; ++r) {
    for (int c = 0; c < 16; ++c) {
      for (int ch = 0; ch < 3; ++ch) other_rgb.at(r, c, ch) = other.at(r, c);
    }
  }
  EXPECT_NEAR(ssim(rgb, other_rgb), ssim(grey, other), 1e-7);
}

TEST(Ssim, SymmetricFlipInvariantAndSizeChecked) {
  const Image a = pattern(20, 14, 3, 0.0), b = pattern(20, 14, 3, 1.1);
  EXPECT_EQ(ssim(a, b), ssim(b, a));
  EXPECT_NEAR(ssim(flipped(a), flipped(b)), ssim(a, b), 1e-12);
  EXPECT_THROW(ssim(pattern(10, 20, 3, 0.0), pattern(10, 20, 3, 0.0)), ShapeError);
}

scene::Lattice grid(int n) { return {n, n, -0.9, 0.9, -0.9, 0.9}; }

Dsm constant(int n, double z) {
  return Dsm{grid(n), std::vector<double>(static_cast<std::size_t>(n) * n, z),
             std::vector<char>(static_cast<std::size_t>(n) * n, 1)};
}

TEST(Mae, Examples) {
  const Dsm a = constant(4, 1.0);
  EXPECT_EQ(mae(a, a), 0.0);
  EXPECT_EQ(mae(a, constant(4, 3.5)), 2.5);
  Dsm half = a;
  for (std::size_t i = 0; i < half.z.size(); ++i) half.z[i] = i % 2 ? 2.0 : 4.0;
  EXPECT_EQ(mae(a, half), 2.0);
}

TEST(Mae, TranslationEquivariant) {
  Dsm a = constant(5, 0.0), b = constant(5, 0.0);
  for (std::size_t i = 0; i < a.z.size(); ++i) a.z[i] = std::sin(0.7 * i), b.z[i] = a.z[i] + 0.1 * (1.0 + std::cos(i));
  const double base = mae(a, b);
  for (std::size_t i = 0; i < b.z.size(); ++i) b.z[i] += 5.0;
  EXPECT_NEAR(mae(a, b), base + 5.0, 1e-12);
}

TEST(Mae, UsesJointMaskAndRejectsEmptyOrMismatched) {
  Dsm a = constant(4, 0.0), b = constant(4, 10.0);
  a.z[0] = 10.0;
  for (std::size_t i = 1; i < a.z.size(); ++i) b.valid[i] = 0;
  EXPECT_EQ(mae(a, b), 0.0);
  EXPECT_DOUBLE_EQ(joint_valid_fraction(a, b), 1.0 / 16.0);
  b.valid[0] = 0;
  EXPECT_THROW(mae(a, b), ValidationError);
  EXPECT_THROW(mae(a, constant(5, 0.0)), ShapeError);
}

// A hand-built field: opaque below z = 0.3 for x < 0.5 and empty elsewhere.
field::RadianceField plane_field() {
  field::FieldConfig config;
  config.trunk_layers = 1;
  config.trunk_width = 2;
  config.pe_frequencies = 0;
  config.skip_at = 0;
  field::RadianceField f(config);
  std::vector<diff::Tensor> w = f.weights();
  for (auto& t : w) t = diff::Tensor::zeros(t.shape());
  w[f.slot("trunk.0.w")] = diff::Tensor({3, 2}, {0.0, 1000.0, 0.0, 0.0, -1000.0, 0.0});
  w[f.slot("trunk.0.b")] = diff::Tensor({1, 2}, {300.0, -500.0});
  w[f.slot("density.w")] = diff::Tensor({2, 1}, {100.0, -1e4});
  w[f.slot("density.b")] = diff::Tensor({1, 1}, {-5.0});
  f.set_weights(std::move(w));
  return f;
}

scene::SceneTransform unit_transform() {
  scene::SceneTransform t;
  t.scale = 1.0;
  return t;
}

// 1% of the 2-unit vertical extent of the bounds.
constexpr double kDsmTolerance = 0.02;

TEST(ExtractDsm, RecoversAFlatPlaneAndMasksEmptyCells) {
  const auto f = plane_field();
  const Dsm d = extract_dsm(f, unit_transform(), Vec3(-1, -1, -1), Vec3(1, 1, 1), grid(9), {}, 3);
  for (int i = 0; i < 9; ++i) {
    for (int j = 0; j < 9; ++j) {
      const double x = d.lattice.x(j);
      if (x < 0.45) {
        ASSERT_TRUE(d.valid_at(i, j)) << x;
        EXPECT_NEAR(d.at(i, j), 0.3, kDsmTolerance);
      } else if (x > 0.55) {
        EXPECT_FALSE(d.valid_at(i, j)) << x;
      }
    }
  }
  EXPECT_LT(d.valid_fraction(), 1.0);
}

TEST(ExtractDsm, ResolutionDoublingAgreesOnSharedNodes) {
  const auto f = plane_field();
  const scene::Lattice coarse{5, 5, -0.9, 0.3, -0.9, 0.3}, fine{9, 9, -0.9, 0.3, -0.9, 0.3};
  const Dsm a = extract_dsm(f, unit_transform(), Vec3(-1, -1, -1), Vec3(1, 1, 1), coarse, {}, 3);
  const Dsm b = extract_dsm(f, unit_transform(), Vec3(-1, -1, -1), Vec3(1, 1, 1), fine, {}, 3);
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) EXPECT_NEAR(a.at(i, j), b.at(2 * i, 2 * j), kDsmTolerance);
  }
}

TEST(RenderView, FlatFieldDepthAndEmptyPixels) {
  const auto f = plane_field();
  scene::Dataset d;
  d.transform = unit_transform();
  scene::ViewSpec v;
  v.name = "nadir";
  v.width = v.height = 8;
  v.pitch = 0.25;
  v.standoff = 2.0;
  const RenderedView r = render_view(f, d, v, {}, render::ShadingMode::kSurface, 1);
  // Column 7 sits at x = 0.875, outside the opaque half.
  EXPECT_TRUE(r.empty[7]);
  EXPECT_FALSE(r.empty[0]);
  EXPECT_NEAR(r.depth.at(0, 0), 2.0 - 0.3, 0.02);
  // rho0 = 0.5 times the hotspot gain 1.5 of rho_c = 0.5 at zero phase angle.
  EXPECT_NEAR(r.color.at(0, 0, 0), 0.75, 0.01);
}

TEST(Report, CsvLayout) {
  const std::string csv = report_csv({{"easy", 30.5, 0.9, 0.25, 1.0}});
  EXPECT_EQ(csv, "name,psnr_db,ssim,mae,valid_fraction\neasy,30.5,0.90000000000000002,0.25,1\n");
}

}  // namespace
}  // namespace rpvfield::eval

#include "rpvfield/rpv/brf.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "rpvfield/common/error.hpp"

namespace rpvfield::rpv {

namespace {

struct TangentFrame {
  Vec3 t1, t2;
};

TangentFrame frame_around(const Direction& n) {
  const Vec3 ref = std::abs(n.x()) < 0.9 ? Vec3(1, 0, 0) : Vec3(0, 1, 0);
  const Vec3 t1 = Direction::normalized(ref - n.vec() * dot(ref, n.vec())).vec();
  return {t1, cross(n.vec(), t1)};
}

double wrap_degrees(double d) {
  d = std::fmod(d, 360.0);
  return d < 0.0 ? d + 360.0 : d;
}

// Viridis, sampled at 9 evenly spaced stops.
constexpr std::array<std::array<int, 3>, 9> kColormap{{{68, 1, 84},
                                                       {71, 45, 123},
                                                       {59, 82, 139},
                                                       {44, 114, 142},
                                                       {33, 145, 140},
                                                       {40, 174, 128},
                                                       {94, 201, 98},
                                                       {173, 220, 48},
                                                       {253, 231, 37}}};

std::array<int, 3> colormap(double u) {
  u = std::clamp(u, 0.0, 1.0) * static_cast<double>(kColormap.size() - 1);
  const auto i = std::min(static_cast<std::size_t>(u), kColormap.size() - 2);
  const double f = u - static_cast<double>(i);
  std::array<int, 3> c{};
  for (int k = 0; k < 3; ++k) {
    c[k] = static_cast<int>(std::lround(kColormap[i][k] * (1.0 - f) + kColormap[i + 1][k] * f));
  }
  return c;
}

double channel_value(const Rgb& v, BrfChannel ch) {
  switch (ch) {
    case BrfChannel::kRed:
      return v[0];
    case BrfChannel::kGreen:
      return v[1];
    case BrfChannel::kBlue:
      return v[2];
    case BrfChannel::kLuminance:
      break;
  }
  return (v[0] + v[1] + v[2]) / 3.0;
}

}  // namespace

double BrfGrid::relative_azimuth_deg(std::size_t ai) const { return wrap_degrees(azimuth_deg[ai] - sun_azimuth_deg); }

BrfGrid brf_sweep(const RpvParams& params, const Direction& n, const Direction& sun, std::size_t zenith_steps,
                  std::size_t azimuth_steps) {
  if (zenith_steps < 2 || azimuth_steps < 2) throw std::invalid_argument("brf_sweep needs at least 2 steps per axis");
  if (!(dot(n.vec(), sun.vec()) > 0.0)) throw GeometryError("sun is below the surface plane");
  params.validate();

  const TangentFrame frame = frame_around(n);
  BrfGrid grid;
  grid.sun_zenith_deg = rad_to_deg(std::acos(std::clamp(dot(n.vec(), sun.vec()), -1.0, 1.0)));
  grid.sun_azimuth_deg = wrap_degrees(rad_to_deg(std::atan2(dot(sun.vec(), frame.t2), dot(sun.vec(), frame.t1))));

  for (std::size_t i = 0; i < zenith_steps; ++i) {
    grid.zenith_deg.push_back(90.0 * static_cast<double>(i) / static_cast<double>(zenith_steps));
  }
  for (std::size_t j = 0; j < azimuth_steps; ++j) {
    grid.azimuth_deg.push_back(
        wrap_degrees(grid.sun_azimuth_deg + 360.0 * static_cast<double>(j) / static_cast<double>(azimuth_steps)));
  }
  grid.values.reserve(zenith_steps * azimuth_steps);
  for (double zen : grid.zenith_deg) {
    const double z = deg_to_rad(zen);
    for (double az : grid.azimuth_deg) {
      const double a = deg_to_rad(az);
      const Vec3 tangent = frame.t1 * std::cos(a) + frame.t2 * std::sin(a);
      const Direction view = Direction::normalized(n.vec() * std::cos(z) + tangent * std::sin(z));
      grid.values.push_back(rpv_factor(params, capped_angles(n, sun, view)));
    }
  }
  return grid;
}

void write_brf_csv(const BrfGrid& grid, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "zenith_deg,azimuth_deg,r,g,b\n";
  char line[160];
  for (std::size_t i = 0; i < grid.rows(); ++i) {
    for (std::size_t j = 0; j < grid.cols(); ++j) {
      const Rgb& v = grid.at(i, j);
      std::snprintf(line, sizeof line, "%.6f,%.6f,%.9g,%.9g,%.9g\n", grid.zenith_deg[i], grid.azimuth_deg[j], v[0],
                    v[1], v[2]);
      out << line;
    }
  }
}

std::string brf_svg(const BrfGrid& grid, BrfChannel channel) {
  constexpr double kSize = 400.0, kCenter = 200.0, kRadius = 180.0;
  double lo = INFINITY, hi = -INFINITY;
  for (const Rgb& v : grid.values) {
    const double x = channel_value(v, channel);
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  auto point = [&](double zenith_deg, double azimuth_deg, char* buf, std::size_t n) {
    const double r = kRadius * zenith_deg / 90.0;
    const double a = deg_to_rad(azimuth_deg);
    std::snprintf(buf, n, "%.2f %.2f", kCenter + r * std::cos(a), kCenter - r * std::sin(a));
  };

  std::string svg;
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" viewBox=\"0 0 %.0f %.0f\">\n"
                "<rect width=\"100%%\" height=\"100%%\" fill=\"black\"/>\n",
                kSize, kSize, kSize, kSize);
  svg += buf;
  const double dz = 90.0 / static_cast<double>(grid.rows());
  const double da = 360.0 / static_cast<double>(grid.cols());
  for (std::size_t i = 0; i < grid.rows(); ++i) {
    const double z0 = grid.zenith_deg[i], z1 = z0 + dz;
    const double r0 = kRadius * z0 / 90.0, r1 = kRadius * z1 / 90.0;
    for (std::size_t j = 0; j < grid.cols(); ++j) {
      const double a0 = grid.azimuth_deg[j] - da / 2.0, a1 = grid.azimuth_deg[j] + da / 2.0;
      const double x = channel_value(grid.at(i, j), channel);
      const auto c = colormap(hi > lo ? (x - lo) / (hi - lo) : 0.5);
      char p00[64], p10[64], p11[64], p01[64];
      point(z0, a0, p00, sizeof p00);
      point(z1, a0, p10, sizeof p10);
      point(z1, a1, p11, sizeof p11);
      point(z0, a1, p01, sizeof p01);
      std::snprintf(buf, sizeof buf,
                    "<path d=\"M %s L %s A %.2f %.2f 0 0 0 %s L %s A %.2f %.2f 0 0 1 %s Z\" fill=\"#%02x%02x%02x\"/>\n",
                    p00, p10, r1, r1, p11, p01, r0, r0, p00, c[0], c[1], c[2]);
      svg += buf;
    }
  }
  char sun[64];
  point(grid.sun_zenith_deg, grid.sun_azimuth_deg, sun, sizeof sun);
  double sx = 0, sy = 0;
  std::sscanf(sun, "%lf %lf", &sx, &sy);
  std::snprintf(buf, sizeof buf,
                "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"6\" fill=\"white\" stroke=\"black\"/>\n"
                "<text x=\"4\" y=\"14\" fill=\"white\" font-size=\"11\">min %.6f max %.6f</text>\n</svg>\n",
                sx, sy, lo, hi);
  svg += buf;
  return svg;
}

void write_brf_svg(const BrfGrid& grid, BrfChannel channel, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << brf_svg(grid, channel);
}

}  // namespace rpvfield::rpv

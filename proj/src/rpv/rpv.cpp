#include "rpvfield/rpv/rpv.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rpvfield/common/error.hpp"

namespace rpvfield::rpv {

namespace {

void require_range(double v, double lo, double hi, const char* name) {
  if (!(v >= lo && v <= hi)) {
    throw DomainError(std::string(name) + " = " + std::to_string(v) + " outside [" + std::to_string(lo) + ", " +
                      std::to_string(hi) + "]");
  }
}

void require_above_horizon(double zenith, const char* name) {
  if (!(zenith >= 0.0 && zenith < kPi / 2.0)) {
    throw DomainError(std::string(name) + " zenith must lie in [0, pi/2), got " + std::to_string(zenith));
  }
}

// Relative azimuth between the projections of a and b onto the plane of n.
double relative_azimuth(const Vec3& n, const Vec3& a, const Vec3& b) {
  const Vec3 pa = a - n * dot(a, n);
  const Vec3 pb = b - n * dot(b, n);
  const double la = norm(pa), lb = norm(pb);
  if (la < 1e-12 || lb < 1e-12) return 0.0;
  return std::acos(std::clamp(dot(pa, pb) / (la * lb), -1.0, 1.0));
}

}  // namespace

void RpvParams::validate() const {
  for (double r : rho0) require_range(r, 0.0, 1.0, "rho0");
  require_range(k, 0.0, 2.0, "k");
  require_range(theta, -1.0, 1.0, "theta");
  require_range(rhoc, 0.0, 1.0, "rhoc");
}

AngleConfig angles_from_directions(const Direction& n, const Direction& w_ir, const Direction& w_r) {
  const double ci = dot(n.vec(), w_ir.vec());
  const double cr = dot(n.vec(), w_r.vec());
  if (!(ci > 0.0)) throw GeometryError("illumination direction is below the surface plane");
  if (!(cr > 0.0)) throw GeometryError("viewing direction is below the surface plane");
  AngleConfig a;
  a.theta_ir = std::acos(std::min(ci, 1.0));
  a.theta_r = std::acos(std::min(cr, 1.0));
  a.phi = relative_azimuth(n.vec(), w_ir.vec(), w_r.vec());
  a.g = std::acos(std::clamp(dot(w_ir.vec(), w_r.vec()), -1.0, 1.0));
  return a;
}

AngleConfig capped_angles(const Direction& n, const Direction& w_ir, const Direction& w_r, double max_zenith) {
  AngleConfig a;
  a.theta_ir = std::min(std::acos(std::clamp(dot(n.vec(), w_ir.vec()), -1.0, 1.0)), max_zenith);
  a.theta_r = std::min(std::acos(std::clamp(dot(n.vec(), w_r.vec()), -1.0, 1.0)), max_zenith);
  a.phi = relative_azimuth(n.vec(), w_ir.vec(), w_r.vec());
  const double cos_g = std::cos(a.theta_ir) * std::cos(a.theta_r) +
                       std::sin(a.theta_ir) * std::sin(a.theta_r) * std::cos(a.phi);
  a.g = std::acos(std::clamp(cos_g, -1.0, 1.0));
  return a;
}

double minnaert(double theta_ir, double theta_r, double k) {
  require_above_horizon(theta_ir, "illumination");
  require_above_horizon(theta_r, "viewing");
  const double ci = std::cos(theta_ir), cr = std::cos(theta_r);
  return std::pow(ci * cr * (ci + cr), k - 1.0);
}

double henyey_greenstein(double g, double theta) {
  require_range(theta, -1.0, 1.0, "theta");
  const double base = 1.0 + 2.0 * theta * std::cos(g) + theta * theta;
  if (!(base > 0.0)) throw DomainError("Henyey-Greenstein denominator is not positive");
  return (1.0 - theta * theta) * std::pow(base, -1.5);
}

double geometric_factor(double theta_ir, double theta_r, double phi) {
  require_above_horizon(theta_ir, "illumination");
  require_above_horizon(theta_r, "viewing");
  const double ti = std::tan(theta_ir), tr = std::tan(theta_r);
  // Law-of-cosines distance; negative only through rounding near the hotspot.
  const double radicand = ti * ti + tr * tr - 2.0 * ti * tr * std::cos(phi);
  return std::sqrt(std::max(radicand, 0.0));
}

double hotspot(double rhoc, double G) {
  if (!(G >= 0.0)) throw DomainError("geometric factor must be non-negative");
  return 1.0 + (1.0 - rhoc) / (1.0 + G);
}

Rgb rpv_factor(const RpvParams& params, const AngleConfig& angles) {
  params.validate();
  const double m = minnaert(angles.theta_ir, angles.theta_r, params.k);
  const double f = henyey_greenstein(angles.g, params.theta);
  const double h = hotspot(params.rhoc, geometric_factor(angles.theta_ir, angles.theta_r, angles.phi));
  const double angular = m * f * h;
  return {params.rho0[0] * angular, params.rho0[1] * angular, params.rho0[2] * angular};
}

namespace {
Rgb scale(const Rgb& c, double s) { return {c[0] * s, c[1] * s, c[2] * s}; }
}  // namespace

Rgb shade(const RpvParams& params, const Direction& n, const Direction& w_ir, const Direction& w_r, double l_ir) {
  return scale(rpv_factor(params, angles_from_directions(n, w_ir, w_r)), l_ir * std::abs(w_ir.z()));
}

Rgb shade_capped(const RpvParams& params, const Direction& n, const Direction& w_ir, const Direction& w_r,
                 double l_ir) {
  return scale(rpv_factor(params, capped_angles(n, w_ir, w_r)), l_ir * std::abs(w_ir.z()));
}

}  // namespace rpvfield::rpv

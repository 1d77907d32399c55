#pragma once

#include <array>

#include "rpvfield/common/vec3.hpp"

// Rahman-Pinty-Verstraete reflectance: amplitude rho0 times the modified
// Minnaert term M(k), the Henyey-Greenstein phase term F(Theta) and the
// hotspot term H(rho_c, G).
namespace rpvfield::rpv {

using Rgb = std::array<double, 3>;

// Evaluators never let a zenith exceed this; M diverges at 90 degrees.
inline constexpr double kZenithCap = deg_to_rad(89.5);

struct RpvParams {
  Rgb rho0{0.5, 0.5, 0.5};  // [0, 1] per channel
  double k = 1.0;           // [0, 2]
  double theta = 0.0;       // [-1, 1]
  double rhoc = 1.0;        // [0, 1]

  // Throws DomainError naming the first field outside its range.
  void validate() const;

  static RpvParams lambertian(const Rgb& rho0) { return {rho0, 1.0, 0.0, 1.0}; }
};

// Angles in radians. phi is the relative azimuth in [0, pi]; g the phase
// angle between the illumination and viewing directions.
struct AngleConfig {
  double theta_ir = 0.0;
  double theta_r = 0.0;
  double phi = 0.0;
  double g = 0.0;
};

// Both w_ir and w_r point away from the surface (towards the sun and the
// camera). Throws GeometryError if either lies on or below the plane of n.
AngleConfig angles_from_directions(const Direction& n, const Direction& w_ir, const Direction& w_r);

// Never throws: zeniths are clamped to `max_zenith` and g is rebuilt from
// the clamped triple so the angles stay spherically consistent.
AngleConfig capped_angles(const Direction& n, const Direction& w_ir, const Direction& w_r,
                          double max_zenith = kZenithCap);

double minnaert(double theta_ir, double theta_r, double k);
double henyey_greenstein(double g, double theta);
double geometric_factor(double theta_ir, double theta_r, double phi);
double hotspot(double rhoc, double G);

Rgb rpv_factor(const RpvParams& params, const AngleConfig& angles);

// Colour c = L_ir * |w_ir . z| * RPV. The cosine uses the flat normal z while
// the RPV angles use `n`. Light visibility is taken as 1.
Rgb shade(const RpvParams& params, const Direction& n, const Direction& w_ir, const Direction& w_r,
          double l_ir = 1.0);

// shade() with capped_angles(); used by every renderer.
Rgb shade_capped(const RpvParams& params, const Direction& n, const Direction& w_ir, const Direction& w_r,
                 double l_ir = 1.0);

}  // namespace rpvfield::rpv

#pragma once

#include <string>
#include <vector>

// Barometric pressure and the atmospheric-correction parameter records of
// the Lanzhou acquisitions.
namespace rpvfield::atmo {

// Altitude in metres above which the barometric base term is no longer
// positive.
inline constexpr double kPressureCeiling = 44330.0;

struct AtmoParams {
  double ozone = 0.0;             // cm-atm
  double water_vapour = 0.0;      // g/cm^2
  double aerosol_depth = 0.0;     // unitless
  double pressure = 0.0;          // hPa
  double adjacency_radius = 0.0;  // unitless

  friend bool operator==(const AtmoParams&, const AtmoParams&) = default;
};

struct AtmoRecord {
  std::string epoch;  // dd/mm/yyyy
  AtmoParams params;
};

// 1013.25 * (1 - 0.0065 z / 288.15)^5.31 in hPa. Throws DomainError unless
// 0 <= z < kPressureCeiling.
double pressure_at_altitude(double altitude_m);

const std::vector<AtmoRecord>& builtin_records();

}  // namespace rpvfield::atmo

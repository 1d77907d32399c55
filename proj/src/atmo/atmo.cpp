#include "rpvfield/atmo/atmo.hpp"

#include <cmath>

#include "rpvfield/common/error.hpp"

namespace rpvfield::atmo {

double pressure_at_altitude(double altitude_m) {
  if (!(altitude_m >= 0.0 && altitude_m < kPressureCeiling)) {
    throw DomainError("altitude " + std::to_string(altitude_m) + " m outside [0, 44330)");
  }
  return 1013.25 * std::pow(1.0 - 0.0065 * altitude_m / 288.15, 5.31);
}

const std::vector<AtmoRecord>& builtin_records() {
  static const std::vector<AtmoRecord> records{
      {"23/04/2013", {0.3220, 1.7333, 0.4665, 783.0, 1.0}},
      {"29/06/2013", {0.2969, 2.5625, 0.0980, 783.0, 1.0}},
  };
  return records;
}

}  // namespace rpvfield::atmo

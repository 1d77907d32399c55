#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <ostream>

#include "rpvfield/common/error.hpp"

namespace rpvfield {

// Scene frame: x east, y north, z up.
struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr Vec3() = default;
  constexpr Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

  constexpr double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }

  constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  constexpr Vec3 operator-() const { return {-x, -y, -z}; }
  constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  constexpr Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
  Vec3& operator+=(const Vec3& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }

  friend constexpr Vec3 operator*(double s, const Vec3& v) { return v * s; }
  friend constexpr bool operator==(const Vec3&, const Vec3&) = default;
};

constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }

inline std::ostream& operator<<(std::ostream& os, const Vec3& v) {
  return os << '[' << v.x << ", " << v.y << ", " << v.z << ']';
}

// A unit 3-vector. Construction from an arbitrary vector normalises it;
// `checked` rejects inputs whose norm deviates from 1 by more than 1e-9.
class Direction {
 public:
  constexpr Direction() : v_(0.0, 0.0, 1.0) {}

  static Direction normalized(const Vec3& v) {
    const double n = norm(v);
    if (!(n > 0.0) || !std::isfinite(n)) throw GeometryError("cannot normalise a zero or non-finite vector");
    return Direction(v / n);
  }

  static Direction checked(const Vec3& v) {
    if (std::abs(norm(v) - 1.0) > 1e-9) throw GeometryError("direction is not unit length");
    return Direction(v);
  }

  // Zenith measured from +z, azimuth counterclockwise from +x (east = 0).
  static Direction from_spherical(double zenith, double azimuth) {
    const double s = std::sin(zenith);
    return Direction(Vec3(s * std::cos(azimuth), s * std::sin(azimuth), std::cos(zenith)));
  }

  static constexpr Direction up() { return Direction(); }

  constexpr const Vec3& vec() const { return v_; }
  constexpr double x() const { return v_.x; }
  constexpr double y() const { return v_.y; }
  constexpr double z() const { return v_.z; }
  Direction operator-() const { return Direction(-v_); }

  double zenith() const { return std::acos(std::clamp(v_.z, -1.0, 1.0)); }
  double azimuth() const { return std::atan2(v_.y, v_.x); }

 private:
  explicit constexpr Direction(const Vec3& v) : v_(v) {}
  Vec3 v_;
};

constexpr double kPi = 3.14159265358979323846;
constexpr double deg_to_rad(double d) { return d * kPi / 180.0; }
constexpr double rad_to_deg(double r) { return r * 180.0 / kPi; }

}  // namespace rpvfield

#include "rpvfield/render/composite.hpp"

#include <cmath>
#include <stdexcept>

namespace rpvfield::render {

double CompositeWeights::total() const {
  double s = 0.0;
  for (double w : weights) s += w;
  return s;
}

CompositeWeights composite_weights(std::span<const double> sigma, std::span<const double> delta) {
  if (sigma.size() != delta.size()) throw std::invalid_argument("composite_weights: sigma and delta differ in size");
  CompositeWeights c;
  const std::size_t n = sigma.size();
  c.alpha.resize(n);
  c.transmittance.resize(n);
  c.weights.resize(n);
  double t = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = -std::expm1(-sigma[i] * delta[i]);
    c.alpha[i] = a;
    c.transmittance[i] = t;
    c.weights[i] = t * a;
    t *= 1.0 - a;
  }
  c.residual = t;
  return c;
}

double render_depth(const CompositeWeights& w, std::span<const double> t) {
  double d = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) d += w.weights[i] * t[i];
  return d;
}

double depth_std(const CompositeWeights& w, std::span<const double> t, double depth) {
  double v = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) v += w.weights[i] * (t[i] - depth) * (t[i] - depth);
  return std::sqrt(v);
}

namespace {
void check_sizes(const CompositeWeights& w, std::size_t params, std::size_t normals) {
  if (params != w.weights.size() || normals != w.weights.size()) {
    throw std::invalid_argument("shading inputs differ in length from the weights");
  }
}
}  // namespace

Shaded shade_surface(const CompositeWeights& w, std::span<const rpv::RpvParams> params,
                     std::span<const Direction> normals, const Direction& sun, const Direction& view) {
  check_sizes(w, params.size(), normals.size());
  rpv::RpvParams acc{{0.0, 0.0, 0.0}, 0.0, 0.0, 0.0};
  Vec3 n_acc;
  double total = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double wi = w.weights[i];
    for (int c = 0; c < 3; ++c) acc.rho0[c] += wi * params[i].rho0[c];
    acc.k += wi * params[i].k;
    acc.theta += wi * params[i].theta;
    acc.rhoc += wi * params[i].rhoc;
    n_acc = n_acc + normals[i].vec() * wi;
    total += wi;
  }
  if (total > 0.0) {
    acc.k /= total;
    acc.theta /= total;
    acc.rhoc /= total;
  } else {
    acc = rpv::RpvParams::lambertian({0.0, 0.0, 0.0});
  }
  Shaded out;
  Direction n = Direction::up();
  if (norm(n_acc) > 1e-12) {
    n = Direction::normalized(n_acc);
  } else {
    out.degenerate_normal = true;
  }
  out.color = rpv::shade_capped(acc, n, sun, view);
  return out;
}

Shaded shade_volume(const CompositeWeights& w, std::span<const rpv::RpvParams> params,
                    std::span<const Direction> normals, const Direction& sun, const Direction& view) {
  check_sizes(w, params.size(), normals.size());
  Shaded out;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const rpv::Rgb c = rpv::shade_capped(params[i], normals[i], sun, view);
    for (int ch = 0; ch < 3; ++ch) out.color[ch] += w.weights[i] * c[ch];
  }
  return out;
}

Shaded shade_lambertian(const CompositeWeights& w, std::span<const rpv::RpvParams> params, const Direction& sun) {
  if (params.size() != w.weights.size()) throw std::invalid_argument("shading inputs differ in length from the weights");
  Shaded out;
  const double cos_sun = std::abs(sun.z());
  for (std::size_t i = 0; i < params.size(); ++i) {
    for (int c = 0; c < 3; ++c) out.color[c] += cos_sun * w.weights[i] * params[i].rho0[c];
  }
  return out;
}

}  // namespace rpvfield::render

#include "rpvfield/render/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace rpvfield::render {

void Ray::validate() const {
  if (!(t_near < t_far)) throw std::invalid_argument("ray requires t_near < t_far");
}

bool clip_to_box(Ray& ray, const Vec3& lo, const Vec3& hi) {
  double t0 = -INFINITY, t1 = INFINITY;
  const double o[3] = {ray.origin.x, ray.origin.y, ray.origin.z};
  const double d[3] = {ray.dir.x(), ray.dir.y(), ray.dir.z()};
  const double l[3] = {lo.x, lo.y, lo.z};
  const double h[3] = {hi.x, hi.y, hi.z};
  for (int a = 0; a < 3; ++a) {
    if (std::abs(d[a]) < 1e-15) {
      if (o[a] < l[a] || o[a] > h[a]) return false;
      continue;
    }
    double ta = (l[a] - o[a]) / d[a], tb = (h[a] - o[a]) / d[a];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
  }
  t0 = std::max(t0, 0.0);
  if (!(t0 < t1)) return false;
  ray.t_near = t0;
  ray.t_far = t1;
  return true;
}

SampleSet SampleSet::from_unsorted(std::vector<double> t, double t_near, double t_far) {
  if (t.empty()) throw std::invalid_argument("sample set needs at least one sample");
  if (!(t_near < t_far)) throw std::invalid_argument("sample set requires t_near < t_far");
  std::sort(t.begin(), t.end());
  const double eps = 1e-9 * (t_far - t_near);
  const std::size_t n = t.size();
  for (std::size_t i = 0; i < n; ++i) {
    t[i] = std::clamp(t[i], t_near, t_far);
    if (i > 0 && t[i] <= t[i - 1]) t[i] = t[i - 1] + eps;
  }
  // Pull the tail back inside so the last delta stays positive.
  double limit = t_far;
  for (std::size_t i = n; i-- > 0;) {
    if (t[i] >= limit) t[i] = limit - eps;
    limit = t[i];
  }
  SampleSet s;
  s.delta.resize(n);
  for (std::size_t i = 0; i < n; ++i) s.delta[i] = (i + 1 < n ? t[i + 1] : t_far) - t[i];
  s.t = std::move(t);
  return s;
}

SampleSet stratified_samples(const Ray& ray, int n, Rng& rng) {
  ray.validate();
  if (n < 1) throw std::invalid_argument("stratified_samples needs n >= 1");
  const double width = (ray.t_far - ray.t_near) / n;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> t(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) t[i] = ray.t_near + (i + u(rng)) * width;
  return SampleSet::from_unsorted(std::move(t), ray.t_near, ray.t_far);
}

GuidedSamples guided_samples(const Ray& ray, double depth_prior, double sigma, int n, Rng& rng) {
  ray.validate();
  if (n < 1) throw std::invalid_argument("guided_samples needs n >= 1");
  if (!(depth_prior >= ray.t_near && depth_prior <= ray.t_far)) return {stratified_samples(ray, n, rng), true};
  std::vector<double> t(static_cast<std::size_t>(n), depth_prior);
  if (sigma > 0.0) {
    std::normal_distribution<double> g(depth_prior, sigma);
    for (double& v : t) v = std::clamp(g(rng), ray.t_near, ray.t_far);
  }
  return {SampleSet::from_unsorted(std::move(t), ray.t_near, ray.t_far), false};
}

SampleSet merge_samples(const SampleSet& a, const SampleSet& b, const Ray& ray) {
  std::vector<double> t;
  t.reserve(a.size() + b.size());
  t.insert(t.end(), a.t.begin(), a.t.end());
  t.insert(t.end(), b.t.begin(), b.t.end());
  return SampleSet::from_unsorted(std::move(t), ray.t_near, ray.t_far);
}

}  // namespace rpvfield::render

#pragma once

#include <span>
#include <vector>

#include "rpvfield/common/rng.hpp"
#include "rpvfield/common/vec3.hpp"

namespace rpvfield::render {

struct Ray {
  Vec3 origin;
  Direction dir;
  double t_near = 0.0;
  double t_far = 1.0;

  // Throws std::invalid_argument unless t_near < t_far.
  void validate() const;
  Vec3 at(double t) const { return origin + dir.vec() * t; }
};

// Clips a ray against the box [lo, hi]; false when it misses.
bool clip_to_box(Ray& ray, const Vec3& lo, const Vec3& hi);

// Strictly ascending sample depths inside [t_near, t_far] with
// delta_i = t_{i+1} - t_i and the last delta = t_far - t_N.
struct SampleSet {
  std::vector<double> t;
  std::vector<double> delta;

  std::size_t size() const { return t.size(); }
  // Sorts, then nudges ties apart so every delta is positive.
  static SampleSet from_unsorted(std::vector<double> t, double t_near, double t_far);
};

SampleSet stratified_samples(const Ray& ray, int n, Rng& rng);

struct GuidedSamples {
  SampleSet samples;
  bool fell_back = false;  // prior outside [t_near, t_far]; samples are stratified
};

// Draws from N(prior, sigma), clamped to the ray bounds.
GuidedSamples guided_samples(const Ray& ray, double depth_prior, double sigma, int n, Rng& rng);
SampleSet merge_samples(const SampleSet& a, const SampleSet& b, const Ray& ray);

}  // namespace rpvfield::render

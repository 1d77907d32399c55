#include "rpvfield/diff/nn.hpp"

#include <cmath>

namespace rpvfield::diff {

namespace {
Tensor uniform(Shape shape, std::size_t fan_in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  std::vector<double> v(shape_size(shape));
  for (double& x : v) x = dist(rng);
  return Tensor(std::move(shape), std::move(v));
}
}  // namespace

Tensor uniform_weight(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  return uniform({fan_in, fan_out}, fan_in, rng);
}

Tensor uniform_bias(std::size_t fan_in, std::size_t fan_out, Rng& rng) { return uniform({1, fan_out}, fan_in, rng); }

}  // namespace rpvfield::diff

#pragma once

// Central finite-difference oracle shared by the gradient tests. It only
// evaluates the function on detached tensors, so it never touches the
// reverse-mode path it is used to check.

#include <cmath>
#include <functional>
#include <vector>

#include "rpvfield/diff/graph.hpp"
#include "rpvfield/diff/ops.hpp"

namespace rpvfield::testing {

using ScalarFn = std::function<double(const std::vector<diff::Tensor>&)>;

inline std::vector<double> central_difference(const ScalarFn& f, const std::vector<diff::Tensor>& inputs,
                                              std::size_t which, double h = 1e-5) {
  std::vector<double> out(inputs[which].size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    auto bumped = [&](double delta) {
      std::vector<double> v(inputs[which].values().begin(), inputs[which].values().end());
      v[i] += delta;
      std::vector<diff::Tensor> args = inputs;
      args[which] = diff::Tensor(inputs[which].shape(), std::move(v));
      return f(args);
    };
    out[i] = (bumped(h) - bumped(-h)) / (2.0 * h);
  }
  return out;
}

// ||a - b|| / max(||a||, ||b||, floor)
inline double relative_error(std::span<const double> a, std::span<const double> b, double floor = 1e-8) {
  double diff = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return std::sqrt(diff) / std::max({std::sqrt(na), std::sqrt(nb), floor});
}

}  // namespace rpvfield::testing

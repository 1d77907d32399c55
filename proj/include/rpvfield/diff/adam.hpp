#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rpvfield/diff/tensor.hpp"

namespace rpvfield::diff {

// Adam moments for an ordered list of parameter tensors. Each slot keeps its
// own update count so that parameters frozen for the first part of training
// get the usual bias correction once they start moving.
struct AdamState {
  double lr = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t step = 0;

  std::vector<Shape> shapes;
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
  std::vector<std::uint64_t> slot_steps;

  static AdamState for_params(std::span<const Tensor> params, double lr, double beta1 = 0.9, double beta2 = 0.999,
                              double eps = 1e-8);
};

// One Adam update. `active`, when non-empty, selects which slots move; the
// others keep their values and moments untouched. Throws ShapeError when the
// parameter, gradient and accumulator shapes disagree.
void adam_step(std::vector<Tensor>& params, std::span<const Tensor> grads, AdamState& state,
               std::span<const char> active = {});

}  // namespace rpvfield::diff

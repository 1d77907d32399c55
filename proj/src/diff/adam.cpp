#include "rpvfield/diff/adam.hpp"

#include <cmath>

#include "rpvfield/common/error.hpp"

namespace rpvfield::diff {

AdamState AdamState::for_params(std::span<const Tensor> params, double lr, double beta1, double beta2, double eps) {
  AdamState s;
  s.lr = lr;
  s.beta1 = beta1;
  s.beta2 = beta2;
  s.eps = eps;
  for (const Tensor& p : params) {
    s.shapes.push_back(p.shape());
    s.m.emplace_back(p.size(), 0.0);
    s.v.emplace_back(p.size(), 0.0);
    s.slot_steps.push_back(0);
  }
  return s;
}

void adam_step(std::vector<Tensor>& params, std::span<const Tensor> grads, AdamState& state,
               std::span<const char> active) {
  if (params.size() != grads.size() || params.size() != state.shapes.size()) {
    throw ShapeError("adam_step: " + std::to_string(params.size()) + " params, " + std::to_string(grads.size()) +
                     " grads, " + std::to_string(state.shapes.size()) + " state slots");
  }
  if (!active.empty() && active.size() != params.size()) throw ShapeError("adam_step: active mask size mismatch");
  ++state.step;
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!active.empty() && !active[i]) continue;
    const Tensor& p = params[i];
    const Tensor& g = grads[i];
    if (p.shape() != state.shapes[i] || g.shape() != state.shapes[i]) {
      throw ShapeError("adam_step: slot " + std::to_string(i) + " has param " + shape_string(p.shape()) +
                       ", grad " + shape_string(g.shape()) + ", state " + shape_string(state.shapes[i]));
    }
    const std::uint64_t t = ++state.slot_steps[i];
    const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(t));
    auto& m = state.m[i];
    auto& v = state.v[i];
    std::vector<double> next(p.values().begin(), p.values().end());
    for (std::size_t j = 0; j < next.size(); ++j) {
      const double gj = g[j];
      m[j] = state.beta1 * m[j] + (1.0 - state.beta1) * gj;
      v[j] = state.beta2 * v[j] + (1.0 - state.beta2) * gj * gj;
      const double mhat = m[j] / c1;
      const double vhat = v[j] / c2;
      next[j] -= state.lr * mhat / (std::sqrt(vhat) + state.eps);
    }
    params[i] = Tensor(p.shape(), std::move(next));
  }
}

}  // namespace rpvfield::diff

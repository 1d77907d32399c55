#include "rpvfield/rpv/rpv_tensor.hpp"

#include <cmath>

#include "rpvfield/diff/ops.hpp"

namespace rpvfield::rpv {

using diff::Tensor;

AngleTerms AngleTerms::from(std::span<const AngleConfig> angles) {
  const std::size_t n = angles.size();
  std::vector<double> log_base(n), cos_g(n), inv(n);
  for (std::size_t i = 0; i < n; ++i) {
    const AngleConfig& a = angles[i];
    const double ci = std::cos(a.theta_ir), cr = std::cos(a.theta_r);
    log_base[i] = std::log(ci * cr * (ci + cr));
    cos_g[i] = std::cos(a.g);
    inv[i] = 1.0 / (1.0 + geometric_factor(a.theta_ir, a.theta_r, a.phi));
  }
  return {Tensor({n, 1}, std::move(log_base)), Tensor({n, 1}, std::move(cos_g)), Tensor({n, 1}, std::move(inv))};
}

Tensor angular_factor(const ParamTensors& p, const AngleTerms& t) {
  const Tensor m = diff::exp((p.k - 1.0) * t.log_minnaert_base);
  const Tensor theta_sq = p.theta * p.theta;
  const Tensor f = (1.0 - theta_sq) * diff::pow(1.0 + 2.0 * p.theta * t.cos_g + theta_sq, -1.5);
  const Tensor h = 1.0 + (1.0 - p.rhoc) * t.inv_one_plus_g;
  return m * f * h;
}

Tensor rpv_factor(const ParamTensors& p, const AngleTerms& t) { return p.rho0 * angular_factor(p, t); }

}  // namespace rpvfield::rpv

#pragma once

#include <span>

#include "rpvfield/diff/tensor.hpp"
#include "rpvfield/rpv/rpv.hpp"

// Differentiable form of rpv_factor for batches of rows. Geometry enters as
// constants; the parameters may be attached to a graph.
namespace rpvfield::rpv {

struct AngleTerms {
  diff::Tensor log_minnaert_base;  // log(cos_ir * cos_r * (cos_ir + cos_r)), [R x 1]
  diff::Tensor cos_g;              // [R x 1]
  diff::Tensor inv_one_plus_g;     // 1 / (1 + G), [R x 1]

  static AngleTerms from(std::span<const AngleConfig> angles);
};

struct ParamTensors {
  diff::Tensor rho0;   // [R x 3]
  diff::Tensor k;      // [R x 1]
  diff::Tensor theta;  // [R x 1]
  diff::Tensor rhoc;   // [R x 1]
};

// [R x 1]: M * F_HG * H
diff::Tensor angular_factor(const ParamTensors& params, const AngleTerms& terms);
// [R x 3]: rho0 * M * F_HG * H
diff::Tensor rpv_factor(const ParamTensors& params, const AngleTerms& terms);

}  // namespace rpvfield::rpv

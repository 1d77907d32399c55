#pragma once

#include <span>

#include "rpvfield/diff/tensor.hpp"

namespace rpvfield::train {

// Input depth for one ray with the matcher's confidence. Depths are in the
// same units as the rendered depth (normalized scene units in training).
class DepthPrior {
 public:
  // Throws std::invalid_argument unless corr is in [0, 1].
  DepthPrior(double dbar, double corr);

  double dbar() const { return dbar_; }
  double corr() const { return corr_; }
  // Allowed disagreement: 1 - corr.
  double sigma() const { return 1.0 - corr_; }

 private:
  double dbar_;
  double corr_;
};

// A ray is supervised when the rendered depth is uncertain (std > sigma) or
// disagrees with the prior by more than sigma.
bool in_rsub(double depth, double dbar, double depth_std, double sigma_prior);

// Sum over masked rays of corr * (D - dbar)^2, divided by `batch_rays`.
// `depth` is [R x 1]; an empty mask gives a zero that still belongs to the
// graph.
diff::Tensor depth_loss(const diff::Tensor& depth, std::span<const DepthPrior> priors, std::span<const char> in_subset,
                        std::size_t batch_rays);

// Sum of squared colour errors over rays and channels divided by the ray
// count. Both operands are [R x 3].
diff::Tensor colour_loss(const diff::Tensor& rendered, const diff::Tensor& target);

diff::Tensor total_loss(const diff::Tensor& colour, const diff::Tensor& depth, double lambda);
double total_loss(double colour, double depth, double lambda);

}  // namespace rpvfield::train

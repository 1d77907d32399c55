#include "rpvfield/train/loss.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "rpvfield/common/error.hpp"
#include "rpvfield/diff/ops.hpp"

namespace rpvfield::train {

using diff::Tensor;

DepthPrior::DepthPrior(double dbar, double corr) : dbar_(dbar), corr_(corr) {
  if (!(corr >= 0.0 && corr <= 1.0)) throw std::invalid_argument("corr must lie in [0, 1], got " + std::to_string(corr));
  if (!std::isfinite(dbar)) throw std::invalid_argument("prior depth must be finite");
}

bool in_rsub(double depth, double dbar, double depth_std, double sigma_prior) {
  return depth_std > sigma_prior || std::abs(depth - dbar) > sigma_prior;
}

Tensor depth_loss(const Tensor& depth, std::span<const DepthPrior> priors, std::span<const char> in_subset,
                  std::size_t batch_rays) {
  const std::size_t rays = priors.size();
  if (depth.rank() != 2 || depth.rows() != rays || depth.cols() != 1 || in_subset.size() != rays) {
    throw ShapeError("depth_loss: depth must be [R x 1] with one prior and one flag per ray");
  }
  if (batch_rays == 0) throw std::invalid_argument("depth_loss: batch_rays must be positive");
  std::vector<double> target(rays), weight(rays);
  for (std::size_t r = 0; r < rays; ++r) {
    target[r] = priors[r].dbar();
    weight[r] = in_subset[r] ? priors[r].corr() / static_cast<double>(batch_rays) : 0.0;
  }
  const Tensor error = depth - Tensor({rays, 1}, std::move(target));
  return diff::sum(error * error * Tensor({rays, 1}, std::move(weight)));
}

Tensor colour_loss(const Tensor& rendered, const Tensor& target) {
  if (rendered.shape() != target.shape() || rendered.rank() != 2 || rendered.rows() == 0) {
    throw ShapeError("colour_loss: rendered and target colours differ in shape");
  }
  const Tensor e = rendered - target;
  return diff::sum(e * e) * (1.0 / static_cast<double>(rendered.rows()));
}

Tensor total_loss(const Tensor& colour, const Tensor& depth, double lambda) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be >= 0");
  return colour + depth * lambda;
}

double total_loss(double colour, double depth, double lambda) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be >= 0");
  return colour + lambda * depth;
}

}  // namespace rpvfield::train

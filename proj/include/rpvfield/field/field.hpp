#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rpvfield/common/vec3.hpp"
#include "rpvfield/diff/tensor.hpp"
#include "rpvfield/rpv/rpv.hpp"

namespace rpvfield::field {

struct FieldConfig {
  int trunk_layers = 8;
  int trunk_width = 256;
  int pe_frequencies = 10;
  // Trunk layer that sees the encoded input again; negative disables.
  int skip_at = 4;
  std::uint64_t seed = 0;

  void validate() const;
  std::size_t encoded_dim() const { return 3 + 6 * static_cast<std::size_t>(pe_frequencies); }
  bool has_skip() const { return skip_at > 0 && skip_at < trunk_layers; }
};

// [N x 3] -> [N x (3 + 6L)]: x, then sin(2^j pi x) and cos(2^j pi x) for
// j = 0..L-1, each block holding the three coordinates.
diff::Tensor positional_encoding(const diff::Tensor& x, int frequencies);
std::vector<double> positional_encoding(const Vec3& x, int frequencies);

// Per-point network outputs, already passed through their activations.
struct FieldOutputs {
  diff::Tensor sigma;  // [N x 1]
  diff::Tensor rho0;   // [N x 3]
  diff::Tensor k;      // [N x 1]
  diff::Tensor theta;  // [N x 1]
  diff::Tensor rhoc;   // [N x 1]
};

struct FieldSample {
  double sigma = 0.0;
  rpv::RpvParams params;
  std::optional<Direction> normal;
};

class RadianceField {
 public:
  // Random trunk initialisation from config.seed. The k, theta and rho_c
  // heads start at zero, i.e. k = 1, theta = 0, rho_c = 0.5.
  explicit RadianceField(FieldConfig config);
  // Restores a field from named weights; throws ShapeError when a tensor is
  // missing or has the wrong shape.
  RadianceField(FieldConfig config, std::span<const std::string> names, std::span<const diff::Tensor> weights);

  const FieldConfig& config() const { return config_; }
  const std::vector<std::string>& names() const { return names_; }
  const std::vector<diff::Tensor>& weights() const { return weights_; }
  void set_weights(std::vector<diff::Tensor> weights);

  std::size_t slot(std::string_view name) const;
  // Slots of the k, theta and rho_c heads (frozen during the Lambertian phase).
  bool is_rpv_head(std::size_t slot) const;

  // x: raw normalized coordinates [N x 3]. The second form evaluates with
  // caller-supplied weights (e.g. attached to a graph) in slot order.
  FieldOutputs forward(const diff::Tensor& x) const { return forward(x, weights_); }
  FieldOutputs forward(const diff::Tensor& x, std::span<const diff::Tensor> weights) const;
  // Density only; skips the feature layer and heads.
  diff::Tensor density(const diff::Tensor& x) const { return density(x, weights_); }
  diff::Tensor density(const diff::Tensor& x, std::span<const diff::Tensor> weights) const;

 private:
  diff::Tensor trunk(const diff::Tensor& x, std::span<const diff::Tensor> weights) const;
  void build_layout();

  FieldConfig config_;
  std::vector<std::string> names_;
  std::vector<diff::Shape> shapes_;
  std::vector<diff::Tensor> weights_;
};

FieldSample query(const RadianceField& field, const Vec3& x);

// Differentiable density [N x 3] -> [N x 1]. Lets tests inject analytic fields.
using DensityFn = std::function<diff::Tensor(const diff::Tensor&)>;
DensityFn density_fn(const RadianceField& field);

inline constexpr double kNormalEpsilon = 1e-8;

struct NormalResult {
  Direction normal;
  bool degenerate = false;
};

// -grad sigma / |grad sigma| per row of a gradient [N x 3]; rows with norm at
// or below eps fall back to +z and are flagged.
std::vector<NormalResult> normals_from_gradient(const diff::Tensor& grad, double eps = kNormalEpsilon);
// Gradient of the density with respect to the input coordinates, [N x 3].
diff::Tensor density_gradient(const DensityFn& density, const diff::Tensor& x);
NormalResult analytic_normal(const DensityFn& density, const Vec3& x, double eps = kNormalEpsilon);
std::vector<NormalResult> analytic_normals(const DensityFn& density, const diff::Tensor& x,
                                           double eps = kNormalEpsilon);

}  // namespace rpvfield::field

#include "rpvfield/field/field.hpp"

#include <algorithm>
#include <cmath>

#include "rpvfield/common/error.hpp"
#include "rpvfield/common/rng.hpp"
#include "rpvfield/diff/graph.hpp"
#include "rpvfield/diff/nn.hpp"
#include "rpvfield/diff/ops.hpp"

namespace rpvfield::field {

using diff::Tensor;

void FieldConfig::validate() const {
  if (trunk_layers < 1) throw std::invalid_argument("trunk_layers must be >= 1");
  if (trunk_width < 1) throw std::invalid_argument("trunk_width must be >= 1");
  if (pe_frequencies < 0) throw std::invalid_argument("pe_frequencies must be >= 0");
}

Tensor positional_encoding(const Tensor& x, int frequencies) {
  if (x.rank() != 2 || x.cols() != 3) throw ShapeError("positional_encoding expects [N x 3], got " + diff::shape_string(x.shape()));
  if (frequencies <= 0) return x;
  std::vector<Tensor> parts{x};
  parts.reserve(1 + 2 * static_cast<std::size_t>(frequencies));
  for (int j = 0; j < frequencies; ++j) {
    const Tensor scaled = x * (std::ldexp(1.0, j) * kPi);
    parts.push_back(diff::sin(scaled));
    parts.push_back(diff::cos(scaled));
  }
  return diff::concat(parts, 1);
}

std::vector<double> positional_encoding(const Vec3& x, int frequencies) {
  const double c[3] = {x.x, x.y, x.z};
  std::vector<double> out(c, c + 3);
  for (int j = 0; j < frequencies; ++j) {
    const double f = std::ldexp(1.0, j) * kPi;
    for (double v : c) out.push_back(std::sin(f * v));
    for (double v : c) out.push_back(std::cos(f * v));
  }
  return out;
}

RadianceField::RadianceField(FieldConfig config) : config_(config) {
  config_.validate();
  build_layout();
  Rng rng(split_seed(config_.seed, "field"));
  weights_.reserve(names_.size());
  for (std::size_t i = 0; i < names_.size(); ++i) {
    const diff::Shape& s = shapes_[i];
    const bool bias = names_[i].ends_with(".b");
    const std::size_t fan_in = bias ? shapes_[i - 1][0] : s[0];
    if (is_rpv_head(i)) {
      weights_.push_back(Tensor::zeros(s));
    } else {
      weights_.push_back(bias ? diff::uniform_bias(fan_in, s[1], rng) : diff::uniform_weight(fan_in, s[1], rng));
    }
  }
}

RadianceField::RadianceField(FieldConfig config, std::span<const std::string> names, std::span<const Tensor> weights)
    : config_(config) {
  config_.validate();
  build_layout();
  if (names.size() != weights.size()) throw ShapeError("field restore: names and tensors differ in count");
  weights_.resize(names_.size());
  std::vector<bool> seen(names_.size(), false);
  for (std::size_t i = 0; i < names.size(); ++i) {
    const auto it = std::find(names_.begin(), names_.end(), names[i]);
    if (it == names_.end()) continue;
    const std::size_t s = static_cast<std::size_t>(it - names_.begin());
    if (weights[i].shape() != shapes_[s]) {
      throw ShapeError("field restore: " + names[i] + " has shape " + diff::shape_string(weights[i].shape()) +
                       ", expected " + diff::shape_string(shapes_[s]));
    }
    weights_[s] = weights[i].detached();
    seen[s] = true;
  }
  for (std::size_t s = 0; s < names_.size(); ++s) {
    if (!seen[s]) throw ShapeError("field restore: missing tensor " + names_[s]);
  }
}

void RadianceField::build_layout() {
  const std::size_t w = static_cast<std::size_t>(config_.trunk_width);
  const std::size_t d = config_.encoded_dim();
  auto add = [&](const std::string& name, std::size_t in, std::size_t out) {
    names_.push_back(name + ".w");
    shapes_.push_back({in, out});
    names_.push_back(name + ".b");
    shapes_.push_back({1, out});
  };
  for (int i = 0; i < config_.trunk_layers; ++i) {
    std::size_t in = w;
    if (i == 0) in = d;
    if (config_.has_skip() && i == config_.skip_at) in = w + d;
    add("trunk." + std::to_string(i), in, w);
  }
  add("density", w, 1);
  add("feature", w, w);
  add("rho0", w, 3);
  add("k", w, 1);
  add("theta", w, 1);
  add("rhoc", w, 1);
}

void RadianceField::set_weights(std::vector<Tensor> weights) {
  if (weights.size() != shapes_.size()) throw ShapeError("set_weights: wrong tensor count");
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i].shape() != shapes_[i]) {
      throw ShapeError("set_weights: " + names_[i] + " has shape " + diff::shape_string(weights[i].shape()));
    }
    weights[i] = weights[i].detached();
  }
  weights_ = std::move(weights);
}

std::size_t RadianceField::slot(std::string_view name) const {
  const auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) throw std::out_of_range("no field tensor named " + std::string(name));
  return static_cast<std::size_t>(it - names_.begin());
}

bool RadianceField::is_rpv_head(std::size_t slot) const {
  const std::string& n = names_.at(slot);
  return n.starts_with("k.") || n.starts_with("theta.") || n.starts_with("rhoc.");
}

Tensor RadianceField::trunk(const Tensor& x, std::span<const Tensor> w) const {
  if (w.size() != shapes_.size()) throw ShapeError("field forward: wrong weight count");
  const Tensor encoded = positional_encoding(x, config_.pe_frequencies);
  Tensor h = encoded;
  for (int i = 0; i < config_.trunk_layers; ++i) {
    if (config_.has_skip() && i == config_.skip_at) {
      const Tensor parts[2] = {h, encoded};
      h = diff::concat(parts, 1);
    }
    h = diff::relu(diff::linear(h, w[2 * i], w[2 * i + 1]));
  }
  return h;
}

Tensor RadianceField::density(const Tensor& x, std::span<const Tensor> w) const {
  const std::size_t d = 2 * static_cast<std::size_t>(config_.trunk_layers);
  return diff::softplus(diff::linear(trunk(x, w), w[d], w[d + 1]));
}

FieldOutputs RadianceField::forward(const Tensor& x, std::span<const Tensor> w) const {
  const Tensor h = trunk(x, w);
  std::size_t s = 2 * static_cast<std::size_t>(config_.trunk_layers);
  auto layer = [&](const Tensor& in) {
    const Tensor out = diff::linear(in, w[s], w[s + 1]);
    s += 2;
    return out;
  };
  FieldOutputs out;
  out.sigma = diff::softplus(layer(h));
  const Tensor feature = layer(h);
  out.rho0 = diff::sigmoid(layer(feature));
  out.k = diff::sigmoid(layer(feature)) * 2.0;
  out.theta = diff::sigmoid(layer(feature)) * 2.0 - 1.0;
  out.rhoc = diff::sigmoid(layer(feature));
  return out;
}

FieldSample query(const RadianceField& field, const Vec3& x) {
  const FieldOutputs o = field.forward(Tensor({1, 3}, {x.x, x.y, x.z}));
  FieldSample s;
  s.sigma = o.sigma[0];
  s.params = rpv::RpvParams{{o.rho0[0], o.rho0[1], o.rho0[2]}, o.k[0], o.theta[0], o.rhoc[0]};
  return s;
}

DensityFn density_fn(const RadianceField& field) {
  return [&field](const Tensor& x) { return field.density(x); };
}

std::vector<NormalResult> normals_from_gradient(const Tensor& grad, double eps) {
  if (grad.rank() != 2 || grad.cols() != 3) throw ShapeError("normals_from_gradient expects [N x 3]");
  std::vector<NormalResult> out(grad.rows());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const Vec3 g(grad.at(i, 0), grad.at(i, 1), grad.at(i, 2));
    const double n = norm(g);
    if (!(n > eps)) {
      out[i] = {Direction::up(), true};
    } else {
      out[i] = {Direction::normalized(-g), false};
    }
  }
  return out;
}

Tensor density_gradient(const DensityFn& density, const Tensor& x) {
  diff::Graph graph;
  const Tensor xv = graph.variable(x);
  const Tensor total = diff::sum(density(xv));
  const Tensor wrt[1] = {xv};
  return graph.backward(total, wrt).of(xv);
}

std::vector<NormalResult> analytic_normals(const DensityFn& density, const Tensor& x, double eps) {
  return normals_from_gradient(density_gradient(density, x), eps);
}

NormalResult analytic_normal(const DensityFn& density, const Vec3& x, double eps) {
  return analytic_normals(density, Tensor({1, 3}, {x.x, x.y, x.z}), eps).front();
}

}  // namespace rpvfield::field

#include "rpvfield/diff/graph.hpp"

#include <Eigen/Core>
#include <cmath>
#include <stdexcept>

#include "broadcast.hpp"
#include "rpvfield/common/error.hpp"

namespace rpvfield::diff {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

std::vector<double>& slot(std::vector<std::vector<double>>& grads, NodeId id, std::size_t n) {
  auto& g = grads[static_cast<std::size_t>(id)];
  if (g.empty()) g.assign(n, 0.0);
  return g;
}

double sigmoid_value(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

Tensor Gradients::of(const Tensor& t) const {
  if (has(t)) return Tensor(t.shape(), grads_[static_cast<std::size_t>(t.node())]);
  return Tensor::zeros(t.shape());
}

bool Gradients::has(const Tensor& t) const {
  return t.attached() && static_cast<std::size_t>(t.node()) < grads_.size() &&
         !grads_[static_cast<std::size_t>(t.node())].empty();
}

Tensor Graph::parameter(const Tensor& value) {
  Node node;
  node.value = value.detached();
  node.is_parameter = true;
  return record(std::move(node));
}

Tensor Graph::variable(const Tensor& value) {
  Node node;
  node.value = value.detached();
  return record(std::move(node));
}

Tensor Graph::record(Node node) {
  const auto id = static_cast<NodeId>(nodes_.size());
  Tensor handle(node.value.shape(), node.value.data_, this, id);
  nodes_.push_back(std::move(node));
  return handle;
}

Gradients Graph::backward(const Tensor& output, std::span<const Tensor> wrt) const {
  if (output.graph() != this) throw std::invalid_argument("backward: output is not recorded on this graph");
  if (output.size() != 1) {
    throw ShapeError("backward requires a scalar output, got shape " + shape_string(output.shape()));
  }
  const auto last = static_cast<std::size_t>(output.node());
  std::vector<char> reach(last + 1, 0);
  std::vector<char> keep(last + 1, 0);
  if (wrt.empty()) {
    for (std::size_t i = 0; i <= last; ++i) reach[i] = keep[i] = nodes_[i].is_parameter;
  } else {
    for (const Tensor& t : wrt) {
      if (t.graph() != this) throw std::invalid_argument("backward: target is not recorded on this graph");
      if (static_cast<std::size_t>(t.node()) <= last) reach[t.node()] = keep[t.node()] = 1;
    }
  }
  for (std::size_t i = 0; i <= last; ++i) {
    if (reach[i]) continue;
    for (NodeId in : nodes_[i].inputs) {
      if (in != kNoNode && reach[static_cast<std::size_t>(in)]) {
        reach[i] = 1;
        break;
      }
    }
  }

  Gradients result;
  auto& grads = result.grads_;
  grads.resize(last + 1);
  grads[last].assign(1, 1.0);

  for (std::size_t idx = last + 1; idx-- > 0;) {
    const Node& node = nodes_[idx];
    if (!reach[idx] || grads[idx].empty() || node.op == OpKind::kLeaf) continue;
    const std::vector<double>& g = grads[idx];
    const double* out = node.value.data();
    const std::size_t n = node.value.size();

    auto wants = [&](std::size_t k) {
      const NodeId in = node.inputs[k];
      return in != kNoNode && reach[static_cast<std::size_t>(in)];
    };
    auto input_grad = [&](std::size_t k) -> std::vector<double>& {
      return slot(grads, node.inputs[k], node.input_values[k].size());
    };
    // Elementwise unary: ga[i] += g[i] * local(i)
    auto unary_back = [&](auto local) {
      if (!wants(0)) return;
      auto& ga = input_grad(0);
      const double* a = node.input_values[0].data();
      for (std::size_t i = 0; i < n; ++i) ga[i] += g[i] * local(a[i], out[i]);
    };

    switch (node.op) {
      case OpKind::kLeaf:
        break;
      case OpKind::kAdd:
      case OpKind::kSub:
      case OpKind::kMul:
      case OpKind::kDiv: {
        const Tensor& ta = node.input_values[0];
        const Tensor& tb = node.input_values[1];
        const detail::Broadcast bc = detail::make_broadcast(ta, tb, "backward");
        const double* a = ta.data();
        const double* b = tb.data();
        std::vector<double>* ga = wants(0) ? &input_grad(0) : nullptr;
        std::vector<double>* gb = wants(1) ? &input_grad(1) : nullptr;
        for (std::size_t r = 0; r < bc.rows; ++r) {
          for (std::size_t c = 0; c < bc.cols; ++c) {
            const std::size_t o = r * bc.cols + c;
            const std::size_t ia = bc.same ? o : bc.a_index(r, c);
            const std::size_t ib = bc.same ? o : bc.b_index(r, c);
            const double go = g[o];
            switch (node.op) {
              case OpKind::kAdd:
                if (ga) (*ga)[ia] += go;
                if (gb) (*gb)[ib] += go;
                break;
              case OpKind::kSub:
                if (ga) (*ga)[ia] += go;
                if (gb) (*gb)[ib] -= go;
                break;
              case OpKind::kMul:
                if (ga) (*ga)[ia] += go * b[ib];
                if (gb) (*gb)[ib] += go * a[ia];
                break;
              default:
                if (ga) (*ga)[ia] += go / b[ib];
                if (gb) (*gb)[ib] -= go * a[ia] / (b[ib] * b[ib]);
                break;
            }
          }
        }
        break;
      }
      case OpKind::kMatMul: {
        const Tensor& ta = node.input_values[0];
        const Tensor& tb = node.input_values[1];
        const auto m = static_cast<Eigen::Index>(ta.shape()[0]);
        const auto k = static_cast<Eigen::Index>(ta.shape()[1]);
        const auto cols = static_cast<Eigen::Index>(tb.shape()[1]);
        Eigen::Map<const RowMatrix> mg(g.data(), m, cols);
        if (wants(0)) {
          Eigen::Map<RowMatrix> ga(input_grad(0).data(), m, k);
          ga.noalias() += mg * Eigen::Map<const RowMatrix>(tb.data(), k, cols).transpose();
        }
        if (wants(1)) {
          Eigen::Map<RowMatrix> gb(input_grad(1).data(), k, cols);
          gb.noalias() += Eigen::Map<const RowMatrix>(ta.data(), m, k).transpose() * mg;
        }
        break;
      }
      case OpKind::kSum:
      case OpKind::kMean: {
        if (!wants(0)) break;
        auto& ga = input_grad(0);
        const double scale = node.op == OpKind::kMean ? g[0] / static_cast<double>(ga.size()) : g[0];
        for (double& v : ga) v += scale;
        break;
      }
      case OpKind::kSumAxis: {
        if (!wants(0)) break;
        auto& ga = input_grad(0);
        const Tensor& ta = node.input_values[0];
        const std::size_t rows = ta.shape()[0], cols = ta.shape()[1];
        for (std::size_t r = 0; r < rows; ++r) {
          for (std::size_t c = 0; c < cols; ++c) ga[r * cols + c] += g[node.axis == 0 ? c : r];
        }
        break;
      }
      case OpKind::kNeg:
        unary_back([](double, double) { return -1.0; });
        break;
      case OpKind::kAddScalar:
      case OpKind::kReshape:
        unary_back([](double, double) { return 1.0; });
        break;
      case OpKind::kMulScalar: {
        const double s = node.a;
        unary_back([s](double, double) { return s; });
        break;
      }
      case OpKind::kExp:
        unary_back([](double, double y) { return y; });
        break;
      case OpKind::kExpm1:
        unary_back([](double, double y) { return y + 1.0; });
        break;
      case OpKind::kLog:
        unary_back([](double x, double) { return 1.0 / x; });
        break;
      case OpKind::kPow: {
        const double p = node.a;
        unary_back([p](double x, double) { return p * std::pow(x, p - 1.0); });
        break;
      }
      case OpKind::kSqrt:
        unary_back([](double, double y) { return 0.5 / y; });
        break;
      case OpKind::kSin:
        unary_back([](double x, double) { return std::cos(x); });
        break;
      case OpKind::kCos:
        unary_back([](double x, double) { return -std::sin(x); });
        break;
      case OpKind::kTanh:
        unary_back([](double, double y) { return 1.0 - y * y; });
        break;
      case OpKind::kSigmoid:
        unary_back([](double, double y) { return y * (1.0 - y); });
        break;
      case OpKind::kSoftplus:
        unary_back([](double x, double) { return sigmoid_value(x); });
        break;
      case OpKind::kRelu:
        unary_back([](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
        break;
      case OpKind::kAbs:
        unary_back([](double x, double) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); });
        break;
      case OpKind::kClamp: {
        const double lo = node.a, hi = node.b;
        unary_back([lo, hi](double x, double) { return (x > lo && x < hi) ? 1.0 : 0.0; });
        break;
      }
      case OpKind::kConcat: {
        const std::size_t cols = node.value.shape()[1];
        std::size_t offset = 0;
        for (std::size_t k = 0; k < node.inputs.size(); ++k) {
          const Tensor& part = node.input_values[k];
          const std::size_t pr = part.shape()[0], pc = part.shape()[1];
          if (wants(k)) {
            auto& gp = input_grad(k);
            for (std::size_t r = 0; r < pr; ++r) {
              for (std::size_t c = 0; c < pc; ++c) {
                const std::size_t orow = node.axis == 0 ? r + offset : r;
                const std::size_t ocol = node.axis == 1 ? c + offset : c;
                gp[r * pc + c] += g[orow * cols + ocol];
              }
            }
          }
          offset += part.shape()[node.axis];
        }
        break;
      }
      case OpKind::kSlice: {
        if (!wants(0)) break;
        auto& ga = input_grad(0);
        const std::size_t cols = node.input_values[0].shape()[1];
        const std::size_t orows = node.value.shape()[0], ocols = node.value.shape()[1];
        for (std::size_t r = 0; r < orows; ++r) {
          for (std::size_t c = 0; c < ocols; ++c) {
            const std::size_t src = node.axis == 0 ? (r + node.begin) * cols + c : r * cols + c + node.begin;
            ga[src] += g[r * ocols + c];
          }
        }
        break;
      }
      case OpKind::kCumsumExclusive: {
        if (!wants(0)) break;
        auto& ga = input_grad(0);
        const std::size_t rows = node.value.shape()[0], cols = node.value.shape()[1];
        for (std::size_t r = 0; r < rows; ++r) {
          double acc = 0.0;
          for (std::size_t c = cols; c-- > 0;) {
            ga[r * cols + c] += acc;
            acc += g[r * cols + c];
          }
        }
        break;
      }
    }
    if (!keep[idx]) std::vector<double>().swap(grads[idx]);
  }
  return result;
}

}  // namespace rpvfield::diff

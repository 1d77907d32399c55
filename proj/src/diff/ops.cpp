#include "rpvfield/diff/ops.hpp"

#include <Eigen/Core>
#include <cmath>
#include <string>

#include "broadcast.hpp"
#include "rpvfield/common/error.hpp"
#include "rpvfield/diff/graph.hpp"

namespace rpvfield::diff {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Graph* common_graph(std::initializer_list<const Tensor*> operands) {
  Graph* g = nullptr;
  for (const Tensor* t : operands) {
    if (!t->attached()) continue;
    if (g != nullptr && g != t->graph()) throw std::invalid_argument("operands attached to different graphs");
    g = t->graph();
  }
  return g;
}

Tensor finish(Graph* graph, OpKind op, std::initializer_list<const Tensor*> operands, Shape shape,
              std::vector<double> values, double a = 0.0, double b = 0.0, std::size_t axis = 0,
              std::size_t begin = 0) {
  Tensor out(std::move(shape), std::move(values));
  if (graph == nullptr) return out;
  Graph::Node node;
  node.op = op;
  for (const Tensor* t : operands) {
    node.inputs.push_back(t->attached() ? t->node() : kNoNode);
    node.input_values.push_back(t->detached());
  }
  node.value = std::move(out);
  node.a = a;
  node.b = b;
  node.axis = axis;
  node.begin = begin;
  return graph->record(std::move(node));
}

template <class F>
Tensor binary(const Tensor& a, const Tensor& b, OpKind op, const char* name, F f) {
  Graph* g = common_graph({&a, &b});
  const detail::Broadcast bc = detail::make_broadcast(a, b, name);
  std::vector<double> out(bc.rows * bc.cols);
  const double* pa = a.data();
  const double* pb = b.data();
  if (bc.same) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(pa[i], pb[i]);
  } else {
    for (std::size_t r = 0; r < bc.rows; ++r) {
      for (std::size_t c = 0; c < bc.cols; ++c) out[r * bc.cols + c] = f(pa[bc.a_index(r, c)], pb[bc.b_index(r, c)]);
    }
  }
  return finish(g, op, {&a, &b}, bc.out_shape, std::move(out));
}

template <class F>
Tensor unary(const Tensor& a, OpKind op, F f, double pa = 0.0, double pb = 0.0) {
  std::vector<double> out(a.size());
  const double* src = a.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(src[i]);
  return finish(a.graph(), op, {&a}, a.shape(), std::move(out), pa, pb);
}

void require_rank2(const Tensor& t, const char* op) {
  if (t.rank() != 2) throw ShapeError(std::string(op) + " requires a rank-2 tensor, got " + shape_string(t.shape()));
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  return binary(a, b, OpKind::kAdd, "add", [](double x, double y) { return x + y; });
}
Tensor sub(const Tensor& a, const Tensor& b) {
  return binary(a, b, OpKind::kSub, "sub", [](double x, double y) { return x - y; });
}
Tensor mul(const Tensor& a, const Tensor& b) {
  return binary(a, b, OpKind::kMul, "mul", [](double x, double y) { return x * y; });
}
Tensor div(const Tensor& a, const Tensor& b) {
  return binary(a, b, OpKind::kDiv, "div", [](double x, double y) { return x / y; });
}
Tensor add(const Tensor& a, double s) {
  return unary(a, OpKind::kAddScalar, [s](double x) { return x + s; }, s);
}
Tensor mul(const Tensor& a, double s) {
  return unary(a, OpKind::kMulScalar, [s](double x) { return x * s; }, s);
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_rank2(a, "matmul");
  require_rank2(b, "matmul");
  if (a.shape()[1] != b.shape()[0]) {
    throw ShapeError("matmul: inner dimensions differ for " + shape_string(a.shape()) + " and " +
                     shape_string(b.shape()));
  }
  const auto m = static_cast<Eigen::Index>(a.shape()[0]);
  const auto k = static_cast<Eigen::Index>(a.shape()[1]);
  const auto n = static_cast<Eigen::Index>(b.shape()[1]);
  std::vector<double> out(static_cast<std::size_t>(m * n));
  Eigen::Map<const RowMatrix> ma(a.data(), m, k);
  Eigen::Map<const RowMatrix> mb(b.data(), k, n);
  Eigen::Map<RowMatrix> mo(out.data(), m, n);
  mo.noalias() = ma * mb;
  return finish(common_graph({&a, &b}), OpKind::kMatMul, {&a, &b}, {a.shape()[0], b.shape()[1]}, std::move(out));
}

Tensor sum(const Tensor& a) {
  double s = 0.0;
  for (double v : a.values()) s += v;
  return finish(a.graph(), OpKind::kSum, {&a}, {}, {s});
}

Tensor sum(const Tensor& a, std::size_t axis) {
  require_rank2(a, "sum(axis)");
  if (axis > 1) throw ShapeError("sum: axis must be 0 or 1");
  const std::size_t rows = a.shape()[0], cols = a.shape()[1];
  const double* p = a.data();
  std::vector<double> out(axis == 0 ? cols : rows, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) out[axis == 0 ? c : r] += p[r * cols + c];
  }
  Shape shape = axis == 0 ? Shape{1, cols} : Shape{rows, 1};
  return finish(a.graph(), OpKind::kSumAxis, {&a}, std::move(shape), std::move(out), 0.0, 0.0, axis);
}

Tensor mean(const Tensor& a) {
  double s = 0.0;
  for (double v : a.values()) s += v;
  return finish(a.graph(), OpKind::kMean, {&a}, {}, {s / static_cast<double>(a.size())});
}

Tensor neg(const Tensor& a) {
  return unary(a, OpKind::kNeg, [](double x) { return -x; });
}
Tensor exp(const Tensor& a) {
  return unary(a, OpKind::kExp, [](double x) { return std::exp(x); });
}
Tensor expm1(const Tensor& a) {
  return unary(a, OpKind::kExpm1, [](double x) { return std::expm1(x); });
}
Tensor log(const Tensor& a) {
  if (checked_mode()) {
    for (double v : a.values()) {
      if (!(v > 0.0)) throw DomainError("log of non-positive value " + std::to_string(v));
    }
  }
  return unary(a, OpKind::kLog, [](double x) { return std::log(x); });
}
Tensor pow(const Tensor& a, double exponent) {
  return unary(a, OpKind::kPow, [exponent](double x) { return std::pow(x, exponent); }, exponent);
}
Tensor sqrt(const Tensor& a) {
  if (checked_mode()) {
    for (double v : a.values()) {
      if (v < 0.0) throw DomainError("sqrt of negative value " + std::to_string(v));
    }
  }
  return unary(a, OpKind::kSqrt, [](double x) { return std::sqrt(x); });
}
Tensor sin(const Tensor& a) {
  return unary(a, OpKind::kSin, [](double x) { return std::sin(x); });
}
Tensor cos(const Tensor& a) {
  return unary(a, OpKind::kCos, [](double x) { return std::cos(x); });
}
Tensor tanh(const Tensor& a) {
  return unary(a, OpKind::kTanh, [](double x) { return std::tanh(x); });
}
Tensor sigmoid(const Tensor& a) {
  return unary(a, OpKind::kSigmoid, [](double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
  });
}
Tensor softplus(const Tensor& a) {
  return unary(a, OpKind::kSoftplus, [](double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); });
}
Tensor relu(const Tensor& a) {
  return unary(a, OpKind::kRelu, [](double x) { return x > 0.0 ? x : 0.0; });
}
Tensor abs(const Tensor& a) {
  return unary(a, OpKind::kAbs, [](double x) { return std::abs(x); });
}
Tensor clamp(const Tensor& a, double lo, double hi) {
  if (lo > hi) throw std::invalid_argument("clamp: lo > hi");
  return unary(a, OpKind::kClamp, [lo, hi](double x) { return std::clamp(x, lo, hi); }, lo, hi);
}

Tensor concat(std::span<const Tensor> parts, std::size_t axis) {
  if (parts.empty()) throw ShapeError("concat of zero tensors");
  if (axis > 1) throw ShapeError("concat: axis must be 0 or 1");
  for (const Tensor& p : parts) require_rank2(p, "concat");
  const std::size_t other = parts[0].shape()[1 - axis];
  std::size_t total = 0;
  Graph* g = nullptr;
  for (const Tensor& p : parts) {
    if (p.shape()[1 - axis] != other) {
      throw ShapeError("concat: mismatched shapes " + shape_string(parts[0].shape()) + " and " +
                       shape_string(p.shape()));
    }
    total += p.shape()[axis];
    if (p.attached()) {
      if (g != nullptr && g != p.graph()) throw std::invalid_argument("operands attached to different graphs");
      g = p.graph();
    }
  }
  const std::size_t rows = axis == 0 ? total : other;
  const std::size_t cols = axis == 1 ? total : other;
  std::vector<double> out(rows * cols);
  std::size_t offset = 0;
  for (const Tensor& p : parts) {
    const std::size_t pr = p.shape()[0], pc = p.shape()[1];
    const double* src = p.data();
    for (std::size_t r = 0; r < pr; ++r) {
      for (std::size_t c = 0; c < pc; ++c) {
        const std::size_t orow = axis == 0 ? r + offset : r;
        const std::size_t ocol = axis == 1 ? c + offset : c;
        out[orow * cols + ocol] = src[r * pc + c];
      }
    }
    offset += p.shape()[axis];
  }
  Tensor result(Shape{rows, cols}, std::move(out));
  if (g == nullptr) return result;
  Graph::Node node;
  node.op = OpKind::kConcat;
  for (const Tensor& p : parts) {
    node.inputs.push_back(p.attached() ? p.node() : kNoNode);
    node.input_values.push_back(p.detached());
  }
  node.value = std::move(result);
  node.axis = axis;
  return g->record(std::move(node));
}

Tensor slice(const Tensor& a, std::size_t axis, std::size_t begin, std::size_t end) {
  require_rank2(a, "slice");
  if (axis > 1) throw ShapeError("slice: axis must be 0 or 1");
  if (begin >= end || end > a.shape()[axis]) {
    throw ShapeError("slice [" + std::to_string(begin) + ", " + std::to_string(end) + ") out of range for " +
                     shape_string(a.shape()));
  }
  const std::size_t rows = a.shape()[0], cols = a.shape()[1];
  const std::size_t orows = axis == 0 ? end - begin : rows;
  const std::size_t ocols = axis == 1 ? end - begin : cols;
  std::vector<double> out(orows * ocols);
  const double* p = a.data();
  for (std::size_t r = 0; r < orows; ++r) {
    for (std::size_t c = 0; c < ocols; ++c) {
      out[r * ocols + c] = axis == 0 ? p[(r + begin) * cols + c] : p[r * cols + c + begin];
    }
  }
  return finish(a.graph(), OpKind::kSlice, {&a}, {orows, ocols}, std::move(out), 0.0, 0.0, axis, begin);
}

Tensor reshape(const Tensor& a, Shape shape) {
  if (shape_size(shape) != a.size()) {
    throw ShapeError("cannot reshape " + shape_string(a.shape()) + " to " + shape_string(shape));
  }
  std::vector<double> out(a.values().begin(), a.values().end());
  return finish(a.graph(), OpKind::kReshape, {&a}, std::move(shape), std::move(out));
}

Tensor cumsum_exclusive(const Tensor& a) {
  require_rank2(a, "cumsum_exclusive");
  const std::size_t rows = a.shape()[0], cols = a.shape()[1];
  const double* p = a.data();
  std::vector<double> out(rows * cols);
  for (std::size_t r = 0; r < rows; ++r) {
    double acc = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      out[r * cols + c] = acc;
      acc += p[r * cols + c];
    }
  }
  return finish(a.graph(), OpKind::kCumsumExclusive, {&a}, a.shape(), std::move(out));
}

}  // namespace rpvfield::diff

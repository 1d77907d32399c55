#pragma once

#include <memory>
#include <span>
#include <vector>

#include "rpvfield/diff/tensor.hpp"

namespace rpvfield::diff {

enum class OpKind {
  kLeaf,
  kAdd,
  kSub,
  kMul,
  kDiv,
  kMatMul,
  kSum,
  kSumAxis,
  kMean,
  kNeg,
  kExp,
  kExpm1,
  kLog,
  kPow,
  kSqrt,
  kSin,
  kCos,
  kTanh,
  kSigmoid,
  kSoftplus,
  kRelu,
  kAbs,
  kClamp,
  kConcat,
  kSlice,
  kReshape,
  kCumsumExclusive,
  kAddScalar,
  kMulScalar,
};

// Gradients produced by one backward pass, indexed by node handle.
class Gradients {
 public:
  Gradients() = default;

  // Gradient with the shape of `t`. Zero when `t` was not on the path from
  // the differentiated output.
  Tensor of(const Tensor& t) const;
  bool has(const Tensor& t) const;

 private:
  friend class Graph;
  std::vector<std::vector<double>> grads_;
};

// Append-only tape. Nodes only reference earlier nodes, so the graph is
// acyclic by construction. A Graph must outlive every tensor attached to it.
class Graph {
 public:
  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  // Leaf whose gradient is reported by backward() when no explicit targets are
  // given.
  Tensor parameter(const Tensor& value);
  // Leaf that is differentiable but not a parameter (e.g. input coordinates).
  Tensor variable(const Tensor& value);

  std::size_t size() const { return nodes_.size(); }

  // Reverse sweep from a scalar output. With empty `wrt` gradients are
  // produced for every parameter leaf; otherwise only for the listed tensors,
  // and work on branches that cannot reach them is skipped.
  Gradients backward(const Tensor& output, std::span<const Tensor> wrt = {}) const;

  struct Node {
    OpKind op = OpKind::kLeaf;
    std::vector<NodeId> inputs;       // kNoNode for constant operands
    std::vector<Tensor> input_values;  // detached
    Tensor value;                      // detached output
    bool is_parameter = false;
    double a = 0.0;  // op-specific scalars (exponent, clamp bounds, ...)
    double b = 0.0;
    std::size_t axis = 0;
    std::size_t begin = 0;
  };

  // Records an op result. Used by the op implementations.
  Tensor record(Node node);

 private:
  std::vector<Node> nodes_;
};

}  // namespace rpvfield::diff

#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace rpvfield::diff {

using Shape = std::vector<std::size_t>;
using NodeId = std::ptrdiff_t;
inline constexpr NodeId kNoNode = -1;

class Graph;

std::string shape_string(const Shape& shape);
std::size_t shape_size(const Shape& shape);

// Process-wide switch. In checked mode every tensor created (directly or as
// an op result) is validated for finiteness, and log/sqrt reject negative
// arguments. Unchecked mode skips both for training throughput.
bool checked_mode();
void set_checked_mode(bool on);

class CheckedModeGuard {
 public:
  explicit CheckedModeGuard(bool on) : previous_(checked_mode()) { set_checked_mode(on); }
  ~CheckedModeGuard() { set_checked_mode(previous_); }
  CheckedModeGuard(const CheckedModeGuard&) = delete;
  CheckedModeGuard& operator=(const CheckedModeGuard&) = delete;

 private:
  bool previous_;
};

// Dense row-major array of doubles. Values are immutable after creation and
// shared between copies. A tensor may carry a handle into a Graph, in which
// case ops on it are recorded for reverse-mode differentiation.
class Tensor {
 public:
  Tensor();  // scalar zero
  Tensor(Shape shape, std::vector<double> values);

  static Tensor scalar(double v);
  static Tensor zeros(Shape shape);
  static Tensor full(Shape shape, double v);
  static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_->size(); }
  // 2-D view: rank-0 is 1x1, rank-1 {n} is 1xn.
  std::size_t rows() const;
  std::size_t cols() const;

  std::span<const double> values() const { return *data_; }
  const double* data() const { return data_->data(); }
  double operator[](std::size_t i) const { return (*data_)[i]; }
  double at(std::size_t r, std::size_t c) const { return (*data_)[r * cols() + c]; }
  double item() const;

  bool attached() const { return graph_ != nullptr; }
  Graph* graph() const { return graph_; }
  NodeId node() const { return node_; }

  // Same values, no graph handle.
  Tensor detached() const;
  Tensor reshaped(Shape shape) const;

 private:
  friend class Graph;
  Tensor(Shape shape, std::shared_ptr<const std::vector<double>> data, Graph* graph, NodeId node);

  Shape shape_;
  std::shared_ptr<const std::vector<double>> data_;
  Graph* graph_ = nullptr;
  NodeId node_ = kNoNode;
};

}  // namespace rpvfield::diff

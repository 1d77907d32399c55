#include "rpvfield/diff/tensor.hpp"

#include <atomic>
#include <cmath>
#include <numeric>
#include <sstream>

#include "rpvfield/common/error.hpp"

namespace rpvfield::diff {

namespace {
std::atomic<bool> g_checked{true};
}  // namespace

bool checked_mode() { return g_checked.load(std::memory_order_relaxed); }
void set_checked_mode(bool on) { g_checked.store(on, std::memory_order_relaxed); }

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "x" : "") << shape[i];
  os << ']';
  return os.str();
}

std::size_t shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

Tensor::Tensor() : data_(std::make_shared<const std::vector<double>>(1, 0.0)) {}

Tensor::Tensor(Shape shape, std::vector<double> values) : shape_(std::move(shape)) {
  for (std::size_t d : shape_) {
    if (d == 0) throw ShapeError("tensor dimensions must be positive, got " + shape_string(shape_));
  }
  if (shape_size(shape_) != values.size()) {
    throw ShapeError("shape " + shape_string(shape_) + " does not match " + std::to_string(values.size()) +
                     " values");
  }
  if (checked_mode()) {
    for (double v : values) {
      if (!std::isfinite(v)) throw DomainError("non-finite value in tensor of shape " + shape_string(shape_));
    }
  }
  data_ = std::make_shared<const std::vector<double>>(std::move(values));
}

Tensor::Tensor(Shape shape, std::shared_ptr<const std::vector<double>> data, Graph* graph, NodeId node)
    : shape_(std::move(shape)), data_(std::move(data)), graph_(graph), node_(node) {}

Tensor Tensor::scalar(double v) { return Tensor({}, {v}); }
Tensor Tensor::zeros(Shape shape) { return full(std::move(shape), 0.0); }
Tensor Tensor::full(Shape shape, double v) {
  const std::size_t n = shape_size(shape);
  return Tensor(std::move(shape), std::vector<double>(n, v));
}
Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::vector<double> values) {
  return Tensor({rows, cols}, std::move(values));
}

std::size_t Tensor::rows() const { return shape_.size() < 2 ? 1 : shape_[0]; }
std::size_t Tensor::cols() const {
  if (shape_.empty()) return 1;
  return shape_.size() == 1 ? shape_[0] : shape_size(shape_) / shape_[0];
}

double Tensor::item() const {
  if (size() != 1) throw ShapeError("item() on tensor of shape " + shape_string(shape_));
  return (*data_)[0];
}

Tensor Tensor::detached() const { return Tensor(shape_, data_, nullptr, kNoNode); }

Tensor Tensor::reshaped(Shape shape) const {
  if (shape_size(shape) != size()) {
    throw ShapeError("cannot reshape " + shape_string(shape_) + " to " + shape_string(shape));
  }
  return Tensor(std::move(shape), data_, nullptr, kNoNode);
}

}  // namespace rpvfield::diff

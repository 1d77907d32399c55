#pragma once

#include <cstddef>

#include "rpvfield/common/error.hpp"
#include "rpvfield/diff/tensor.hpp"

namespace rpvfield::diff::detail {

// Index mapping for a broadcast binary op over a 2-D output.
struct Broadcast {
  Shape out_shape;
  std::size_t rows = 1, cols = 1;
  std::size_t a_rows = 1, a_cols = 1, b_rows = 1, b_cols = 1;
  bool same = false;

  std::size_t a_index(std::size_t r, std::size_t c) const {
    return (a_rows == 1 ? 0 : r) * a_cols + (a_cols == 1 ? 0 : c);
  }
  std::size_t b_index(std::size_t r, std::size_t c) const {
    return (b_rows == 1 ? 0 : r) * b_cols + (b_cols == 1 ? 0 : c);
  }
};

inline Broadcast make_broadcast(const Tensor& a, const Tensor& b, const char* op) {
  Broadcast bc;
  if (a.shape() == b.shape()) {
    bc.out_shape = a.shape();
    bc.same = true;
    bc.rows = bc.a_rows = bc.b_rows = a.rows();
    bc.cols = bc.a_cols = bc.b_cols = a.cols();
    return bc;
  }
  auto mismatch = [&] {
    return ShapeError(std::string(op) + ": incompatible shapes " + shape_string(a.shape()) + " and " +
                      shape_string(b.shape()));
  };
  if (a.size() == 1 && a.rank() <= b.rank()) {
    bc.out_shape = b.shape();
  } else if (b.size() == 1 && b.rank() <= a.rank()) {
    bc.out_shape = a.shape();
  } else {
    if (a.rank() != b.rank() || a.rank() > 2) throw mismatch();
    bc.out_shape = a.shape();
    for (std::size_t d = 0; d < a.rank(); ++d) {
      const std::size_t x = a.shape()[d], y = b.shape()[d];
      if (x != y && x != 1 && y != 1) throw mismatch();
      bc.out_shape[d] = x > y ? x : y;
    }
  }
  if (bc.out_shape.size() > 2) {
    // Only scalar broadcasting against higher ranks: flatten.
    bc.rows = 1;
    bc.cols = shape_size(bc.out_shape);
  } else {
    bc.rows = bc.out_shape.size() < 2 ? 1 : bc.out_shape[0];
    bc.cols = bc.out_shape.empty() ? 1 : bc.out_shape.back();
  }
  auto dims = [&](const Tensor& t, std::size_t& r, std::size_t& c) {
    if (t.size() == 1) {
      r = c = 1;
    } else {
      r = t.rows();
      c = t.cols();
    }
  };
  dims(a, bc.a_rows, bc.a_cols);
  dims(b, bc.b_rows, bc.b_cols);
  return bc;
}

}  // namespace rpvfield::diff::detail

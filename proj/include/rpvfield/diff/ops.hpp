#pragma once

#include <span>

#include "rpvfield/diff/tensor.hpp"

// Differentiable primitives. Each returns a new tensor; when any operand is
// attached to a Graph the result is recorded on it. Operands attached to two
// different graphs are rejected.
//
// Broadcasting is limited to rank <= 2 operands of equal rank where each
// dimension matches or is 1 on one side, plus size-1 (scalar) operands.
namespace rpvfield::diff {

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);
Tensor add(const Tensor& a, double s);
Tensor mul(const Tensor& a, double s);

// (m x k) . (k x n)
Tensor matmul(const Tensor& a, const Tensor& b);

Tensor sum(const Tensor& a);
// Rank-2 reduction keeping the reduced dimension as size 1.
Tensor sum(const Tensor& a, std::size_t axis);
Tensor mean(const Tensor& a);

Tensor neg(const Tensor& a);
Tensor exp(const Tensor& a);
// exp(a) - 1 without cancellation near zero.
Tensor expm1(const Tensor& a);
Tensor log(const Tensor& a);
Tensor pow(const Tensor& a, double exponent);
Tensor sqrt(const Tensor& a);
Tensor sin(const Tensor& a);
Tensor cos(const Tensor& a);
Tensor tanh(const Tensor& a);
Tensor sigmoid(const Tensor& a);
Tensor softplus(const Tensor& a);
Tensor relu(const Tensor& a);
Tensor abs(const Tensor& a);
// Gradient passes through strictly inside (lo, hi) and is zero outside.
Tensor clamp(const Tensor& a, double lo, double hi);

// Rank-2 concatenation / slicing along axis 0 or 1.
Tensor concat(std::span<const Tensor> parts, std::size_t axis);
Tensor slice(const Tensor& a, std::size_t axis, std::size_t begin, std::size_t end);
Tensor reshape(const Tensor& a, Shape shape);
// out[i][j] = sum_{l<j} a[i][l] along axis 1 of a rank-2 tensor.
Tensor cumsum_exclusive(const Tensor& a);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }
inline Tensor operator/(const Tensor& a, const Tensor& b) { return div(a, b); }
inline Tensor operator-(const Tensor& a) { return neg(a); }
inline Tensor operator+(const Tensor& a, double s) { return add(a, s); }
inline Tensor operator+(double s, const Tensor& a) { return add(a, s); }
inline Tensor operator-(const Tensor& a, double s) { return add(a, -s); }
inline Tensor operator-(double s, const Tensor& a) { return add(neg(a), s); }
inline Tensor operator*(const Tensor& a, double s) { return mul(a, s); }
inline Tensor operator*(double s, const Tensor& a) { return mul(a, s); }

}  // namespace rpvfield::diff

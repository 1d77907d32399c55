#pragma once

#include <cstddef>

#include "rpvfield/common/rng.hpp"
#include "rpvfield/diff/ops.hpp"

namespace rpvfield::diff {

// Weights drawn from U(-1/sqrt(fan_in), 1/sqrt(fan_in)), shape [fan_in x fan_out].
Tensor uniform_weight(std::size_t fan_in, std::size_t fan_out, Rng& rng);
Tensor uniform_bias(std::size_t fan_in, std::size_t fan_out, Rng& rng);

// x [n x in] . w [in x out] + b [1 x out]
inline Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b) { return add(matmul(x, w), b); }

}  // namespace rpvfield::diff

#pragma once

#include <vector>

#include "artbank/autograd.hpp"

// Differentiable operations over Var. Each records a backward rule on the tape.
namespace artbank {

Var matmul(const Var& a, const Var& b);
Var transpose(const Var& a);
Var softmax_rows(const Var& a);
Var channel_norm(const Var& x, double eps = 1e-8);

Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, double factor);
Var add_scalar(const Var& a, double offset);
// factor * a + (1 - factor) * b with `factor` a single-element Var.
Var mix(const Var& a, const Var& b, const Var& factor);

// a[m x n] scaled per row by col[m x 1], or per column by row[1 x n].
Var mul_rows(const Var& a, const Var& col);
Var mul_cols(const Var& a, const Var& row);
// x[C, ...] plus bias[C] broadcast over every trailing position.
Var add_channel_bias(const Var& x, const Var& bias);

Var sqrt(const Var& a);
Var clamp_min(const Var& a, double floor);
Var gelu(const Var& a);

Var reshape(const Var& a, Shape shape);
Var concat_rows(const std::vector<Var>& parts);

Var conv2d(const Var& input, const Var& weight, const Var& bias, std::size_t stride);
Var upsample_nearest2x(const Var& input);

Var sum(const Var& a);
Var sum_squares(const Var& a);
// Mean over elements of (pred - target)^2.
Var mse(const Var& pred, const Tensor& target);

}  // namespace artbank

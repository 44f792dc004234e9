#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace artbank {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_str(const Shape& shape);

// Dense row-major float64 array. Plain value type; gradients live on Var.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> values);

  static Tensor scalar(double value);
  static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows);
  static Tensor identity(std::size_t n);
  static Tensor filled(Shape shape, double value) { return Tensor(std::move(shape), value); }

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  // 2-D accessors.
  std::size_t rows() const { return dim(0); }
  std::size_t cols() const { return dim(1); }
  double& at(std::size_t r, std::size_t c) { return data_[r * shape_[1] + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * shape_[1] + c]; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double item() const;

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  const std::vector<double>& values() const noexcept { return data_; }

  Tensor reshaped(Shape shape) const;
  bool all_finite() const;

  bool operator==(const Tensor& other) const = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

double max_abs_diff(const Tensor& a, const Tensor& b);
// True iff shapes match and every element has the same bit pattern.
bool bitwise_equal(const Tensor& a, const Tensor& b);
double sum(const Tensor& a);
double sum_squares(const Tensor& a);

Tensor transpose(const Tensor& a);
Tensor matmul(const Tensor& a, const Tensor& b);
// Row-wise softmax with max subtraction.
Tensor softmax_rows(const Tensor& a);
// Per-row (channel) standardization over positions, population variance.
Tensor channel_norm(const Tensor& x, double eps = 1e-8);

// 2-D convolution over [C, H, W] maps with square odd kernels, zero padding k/2.
Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias, std::size_t stride);
void conv2d_backward(const Tensor& input, const Tensor& weight, const Tensor& grad_out,
                     std::size_t stride, Tensor* grad_input, Tensor* grad_weight,
                     Tensor* grad_bias);

}  // namespace artbank

#include "artbank/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>

#include "artbank/errors.hpp"

namespace artbank {

std::size_t shape_size(const Shape& shape) {
  std::size_t n = 1;
  for (auto extent : shape) n *= extent;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)) {
  for (auto extent : shape_) {
    if (extent == 0) throw DimensionError("tensor extents must be positive, got " + shape_str(shape_));
  }
  data_.assign(shape_size(shape_), fill);
}

Tensor::Tensor(Shape shape, std::vector<double> values) : shape_(std::move(shape)), data_(std::move(values)) {
  for (auto extent : shape_) {
    if (extent == 0) throw DimensionError("tensor extents must be positive, got " + shape_str(shape_));
  }
  if (shape_size(shape_) != data_.size()) {
    throw DimensionError("shape " + shape_str(shape_) + " does not match " + std::to_string(data_.size()) +
                         " values");
  }
}

Tensor Tensor::scalar(double value) { return Tensor({1}, std::vector<double>{value}); }

Tensor Tensor::matrix(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t m = rows.size();
  const std::size_t n = m ? rows.begin()->size() : 0;
  std::vector<double> values;
  values.reserve(m * n);
  for (const auto& row : rows) {
    if (row.size() != n) throw DimensionError("ragged matrix literal");
    values.insert(values.end(), row.begin(), row.end());
  }
  return Tensor({m, n}, std::move(values));
}

Tensor Tensor::identity(std::size_t n) {
  Tensor out({n, n});
  for (std::size_t i = 0; i < n; ++i) out.at(i, i) = 1.0;
  return out;
}

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= shape_.size()) {
    throw DimensionError("axis " + std::to_string(axis) + " out of range for " + shape_str(shape_));
  }
  return shape_[axis];
}

double Tensor::item() const {
  if (data_.size() != 1) throw DimensionError("item() on tensor of shape " + shape_str(shape_));
  return data_[0];
}

Tensor Tensor::reshaped(Shape shape) const {
  if (shape_size(shape) != data_.size()) {
    throw DimensionError("cannot reshape " + shape_str(shape_) + " to " + shape_str(shape));
  }
  return Tensor(std::move(shape), data_);
}

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw DimensionError("max_abs_diff: " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

bool bitwise_equal(const Tensor& a, const Tensor& b) {
  return a.shape() == b.shape() &&
         (a.size() == 0 || std::memcmp(a.data().data(), b.data().data(), a.size() * sizeof(double)) == 0);
}

double sum(const Tensor& a) {
  double s = 0.0;
  for (double v : a.data()) s += v;
  return s;
}

double sum_squares(const Tensor& a) {
  double s = 0.0;
  for (double v : a.data()) s += v * v;
  return s;
}

static void require_matrix(const Tensor& a, const char* op) {
  if (a.rank() != 2) throw DimensionError(std::string(op) + ": expected a matrix, got " + shape_str(a.shape()));
}

Tensor transpose(const Tensor& a) {
  require_matrix(a, "transpose");
  const std::size_t m = a.rows(), n = a.cols();
  Tensor out({n, m});
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out.at(j, i) = a.at(i, j);
  return out;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_matrix(a, "matmul");
  require_matrix(b, "matmul");
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: inner extents differ, " + shape_str(a.shape()) + " x " + shape_str(b.shape()));
  }
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  Tensor out({m, n});
  const double* pa = a.data().data();
  const double* pb = b.data().data();
  double* po = out.data().data();
  for (std::size_t i = 0; i < m; ++i) {
    double* row = po + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = pa[i * k + p];
      const double* brow = pb + p * n;
      for (std::size_t j = 0; j < n; ++j) row[j] += aip * brow[j];
    }
  }
  return out;
}

Tensor softmax_rows(const Tensor& a) {
  require_matrix(a, "softmax_rows");
  if (!a.all_finite()) throw NumericError("softmax_rows: non-finite input");
  const std::size_t m = a.rows(), n = a.cols();
  Tensor out({m, n});
  for (std::size_t i = 0; i < m; ++i) {
    double peak = a.at(i, 0);
    for (std::size_t j = 1; j < n; ++j) peak = std::max(peak, a.at(i, j));
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double e = std::exp(a.at(i, j) - peak);
      out.at(i, j) = e;
      total += e;
    }
    for (std::size_t j = 0; j < n; ++j) out.at(i, j) /= total;
  }
  return out;
}

Tensor channel_norm(const Tensor& x, double eps) {
  require_matrix(x, "channel_norm");
  const std::size_t c = x.rows(), n = x.cols();
  Tensor out({c, n});
  for (std::size_t i = 0; i < c; ++i) {
    double mean = 0.0;
    for (std::size_t j = 0; j < n; ++j) mean += x.at(i, j);
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double d = x.at(i, j) - mean;
      var += d * d;
    }
    var /= static_cast<double>(n);
    const double inv = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < n; ++j) out.at(i, j) = (x.at(i, j) - mean) * inv;
  }
  return out;
}

namespace {

struct ConvGeometry {
  std::size_t cin, h, w, cout, k, pad, stride, hout, wout;
};

ConvGeometry conv_geometry(const Tensor& input, const Tensor& weight, std::size_t stride) {
  if (input.rank() != 3) throw DimensionError("conv2d: input must be [C,H,W], got " + shape_str(input.shape()));
  if (weight.rank() != 4 || weight.dim(2) != weight.dim(3) || weight.dim(2) % 2 == 0) {
    throw DimensionError("conv2d: weight must be [Cout,Cin,K,K] with odd K, got " + shape_str(weight.shape()));
  }
  if (weight.dim(1) != input.dim(0)) {
    throw DimensionError("conv2d: weight expects " + std::to_string(weight.dim(1)) + " input channels, got " +
                         std::to_string(input.dim(0)));
  }
  if (stride == 0) throw DimensionError("conv2d: stride must be positive");
  ConvGeometry g{};
  g.cin = input.dim(0);
  g.h = input.dim(1);
  g.w = input.dim(2);
  g.cout = weight.dim(0);
  g.k = weight.dim(2);
  g.pad = g.k / 2;
  g.stride = stride;
  g.hout = (g.h + 2 * g.pad - g.k) / stride + 1;
  g.wout = (g.w + 2 * g.pad - g.k) / stride + 1;
  return g;
}

// Output columns x whose input column x*stride + kx - pad lies inside [0, w).
void valid_range(std::size_t out_extent, std::size_t in_extent, std::size_t stride, std::size_t offset,
                 std::size_t pad, std::size_t& lo, std::size_t& hi) {
  lo = 0;
  while (lo < out_extent && lo * stride + offset < pad) ++lo;
  hi = out_extent;
  while (hi > lo && (hi - 1) * stride + offset - pad >= in_extent) --hi;
}

}  // namespace

Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias, std::size_t stride) {
  const auto g = conv_geometry(input, weight, stride);
  if (!bias.empty() && bias.size() != g.cout) throw DimensionError("conv2d: bias size mismatch");
  Tensor out({g.cout, g.hout, g.wout});
  const double* in = input.data().data();
  const double* wt = weight.data().data();
  double* po = out.data().data();
  const std::size_t plane = g.hout * g.wout;
  for (std::size_t o = 0; o < g.cout; ++o) {
    double* oplane = po + o * plane;
    if (!bias.empty()) std::fill(oplane, oplane + plane, bias[o]);
    for (std::size_t i = 0; i < g.cin; ++i) {
      const double* iplane = in + i * g.h * g.w;
      for (std::size_t ky = 0; ky < g.k; ++ky) {
        std::size_t ylo, yhi;
        valid_range(g.hout, g.h, g.stride, ky, g.pad, ylo, yhi);
        for (std::size_t kx = 0; kx < g.k; ++kx) {
          const double wv = wt[((o * g.cin + i) * g.k + ky) * g.k + kx];
          std::size_t xlo, xhi;
          valid_range(g.wout, g.w, g.stride, kx, g.pad, xlo, xhi);
          for (std::size_t y = ylo; y < yhi; ++y) {
            const double* irow = iplane + (y * g.stride + ky - g.pad) * g.w;
            double* orow = oplane + y * g.wout;
            for (std::size_t x = xlo; x < xhi; ++x) orow[x] += wv * irow[x * g.stride + kx - g.pad];
          }
        }
      }
    }
  }
  return out;
}

void conv2d_backward(const Tensor& input, const Tensor& weight, const Tensor& grad_out, std::size_t stride,
                     Tensor* grad_input, Tensor* grad_weight, Tensor* grad_bias) {
  const auto g = conv_geometry(input, weight, stride);
  if (grad_out.shape() != Shape{g.cout, g.hout, g.wout}) throw DimensionError("conv2d_backward: grad shape");
  const double* in = input.data().data();
  const double* wt = weight.data().data();
  const double* go = grad_out.data().data();
  const std::size_t plane = g.hout * g.wout;
  if (grad_bias) {
    for (std::size_t o = 0; o < g.cout; ++o) {
      double s = 0.0;
      for (std::size_t p = 0; p < plane; ++p) s += go[o * plane + p];
      (*grad_bias)[o] += s;
    }
  }
  if (!grad_input && !grad_weight) return;
  double* gi = grad_input ? grad_input->data().data() : nullptr;
  double* gw = grad_weight ? grad_weight->data().data() : nullptr;
  for (std::size_t o = 0; o < g.cout; ++o) {
    const double* gplane = go + o * plane;
    for (std::size_t i = 0; i < g.cin; ++i) {
      const double* iplane = in + i * g.h * g.w;
      double* giplane = gi ? gi + i * g.h * g.w : nullptr;
      for (std::size_t ky = 0; ky < g.k; ++ky) {
        std::size_t ylo, yhi;
        valid_range(g.hout, g.h, g.stride, ky, g.pad, ylo, yhi);
        for (std::size_t kx = 0; kx < g.k; ++kx) {
          const std::size_t widx = ((o * g.cin + i) * g.k + ky) * g.k + kx;
          const double wv = wt[widx];
          std::size_t xlo, xhi;
          valid_range(g.wout, g.w, g.stride, kx, g.pad, xlo, xhi);
          double acc = 0.0;
          for (std::size_t y = ylo; y < yhi; ++y) {
            const std::size_t row = (y * g.stride + ky - g.pad) * g.w;
            const double* grow = gplane + y * g.wout;
            if (gw) {
              for (std::size_t x = xlo; x < xhi; ++x) acc += grow[x] * iplane[row + x * g.stride + kx - g.pad];
            }
            if (giplane) {
              for (std::size_t x = xlo; x < xhi; ++x) giplane[row + x * g.stride + kx - g.pad] += wv * grow[x];
            }
          }
          if (gw) gw[widx] += acc;
        }
      }
    }
  }
}

}  // namespace artbank

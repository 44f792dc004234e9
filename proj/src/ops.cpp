#include "artbank/ops.hpp"

#include <cmath>
#include <numbers>

#include "artbank/errors.hpp"

namespace artbank {

namespace {

void require_same_shape(const Var& a, const Var& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  }
}

void accumulate(Tensor& dst, const Tensor& src) {
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

}  // namespace

Var matmul(const Var& a, const Var& b) {
  return Var::from_op("matmul", matmul(a.value(), b.value()), {a, b}, [](const BackwardContext& c) {
    if (c.gin[0]) accumulate(*c.gin[0], matmul(c.gout, transpose(*c.in[1])));
    if (c.gin[1]) accumulate(*c.gin[1], matmul(transpose(*c.in[0]), c.gout));
  });
}

Var transpose(const Var& a) {
  return Var::from_op("transpose", transpose(a.value()), {a}, [](const BackwardContext& c) {
    accumulate(*c.gin[0], transpose(c.gout));
  });
}

Var softmax_rows(const Var& a) {
  return Var::from_op("softmax_rows", softmax_rows(a.value()), {a}, [](const BackwardContext& c) {
    const Tensor& y = c.out;
    Tensor& g = *c.gin[0];
    for (std::size_t i = 0; i < y.rows(); ++i) {
      double dot = 0.0;
      for (std::size_t j = 0; j < y.cols(); ++j) dot += c.gout.at(i, j) * y.at(i, j);
      for (std::size_t j = 0; j < y.cols(); ++j) g.at(i, j) += y.at(i, j) * (c.gout.at(i, j) - dot);
    }
  });
}

Var channel_norm(const Var& x, double eps) {
  return Var::from_op("channel_norm", channel_norm(x.value(), eps), {x}, [eps](const BackwardContext& c) {
    const Tensor& in = *c.in[0];
    const Tensor& y = c.out;
    Tensor& g = *c.gin[0];
    const std::size_t n = in.cols();
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < in.rows(); ++i) {
      double mean = 0.0;
      for (std::size_t j = 0; j < n; ++j) mean += in.at(i, j);
      mean *= inv_n;
      double var = 0.0;
      for (std::size_t j = 0; j < n; ++j) var += (in.at(i, j) - mean) * (in.at(i, j) - mean);
      var *= inv_n;
      const double inv_sigma = 1.0 / std::sqrt(var + eps);
      double mean_g = 0.0, mean_gy = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        mean_g += c.gout.at(i, j);
        mean_gy += c.gout.at(i, j) * y.at(i, j);
      }
      mean_g *= inv_n;
      mean_gy *= inv_n;
      for (std::size_t j = 0; j < n; ++j) g.at(i, j) += inv_sigma * (c.gout.at(i, j) - mean_g - y.at(i, j) * mean_gy);
    }
  });
}

Var add(const Var& a, const Var& b) {
  require_same_shape(a, b, "add");
  Tensor out = a.value();
  accumulate(out, b.value());
  return Var::from_op("add", std::move(out), {a, b}, [](const BackwardContext& c) {
    for (auto* g : c.gin)
      if (g) accumulate(*g, c.gout);
  });
}

Var sub(const Var& a, const Var& b) {
  require_same_shape(a, b, "sub");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b.value()[i];
  return Var::from_op("sub", std::move(out), {a, b}, [](const BackwardContext& c) {
    if (c.gin[0]) accumulate(*c.gin[0], c.gout);
    if (c.gin[1])
      for (std::size_t i = 0; i < c.gout.size(); ++i) (*c.gin[1])[i] -= c.gout[i];
  });
}

Var mul(const Var& a, const Var& b) {
  require_same_shape(a, b, "mul");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b.value()[i];
  return Var::from_op("mul", std::move(out), {a, b}, [](const BackwardContext& c) {
    if (c.gin[0])
      for (std::size_t i = 0; i < c.gout.size(); ++i) (*c.gin[0])[i] += c.gout[i] * (*c.in[1])[i];
    if (c.gin[1])
      for (std::size_t i = 0; i < c.gout.size(); ++i) (*c.gin[1])[i] += c.gout[i] * (*c.in[0])[i];
  });
}

Var scale(const Var& a, double factor) {
  Tensor out = a.value();
  for (double& v : out.data()) v *= factor;
  return Var::from_op("scale", std::move(out), {a}, [factor](const BackwardContext& c) {
    for (std::size_t i = 0; i < c.gout.size(); ++i) (*c.gin[0])[i] += factor * c.gout[i];
  });
}

Var add_scalar(const Var& a, double offset) {
  Tensor out = a.value();
  for (double& v : out.data()) v += offset;
  return Var::from_op("add_scalar", std::move(out), {a},
                      [](const BackwardContext& c) { accumulate(*c.gin[0], c.gout); });
}

Var mix(const Var& a, const Var& b, const Var& factor) {
  require_same_shape(a, b, "mix");
  if (factor.value().size() != 1) throw DimensionError("mix: factor must be a single element");
  const double f = factor.value()[0];
  Tensor out(a.shape());
  // Interpolation form: identical inputs come back unchanged for any factor.
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = b.value()[i] + f * (a.value()[i] - b.value()[i]);
  return Var::from_op("mix", std::move(out), {a, b, factor}, [](const BackwardContext& c) {
    const double f = (*c.in[2])[0];
    if (c.gin[0])
      for (std::size_t i = 0; i < c.gout.size(); ++i) (*c.gin[0])[i] += f * c.gout[i];
    if (c.gin[1])
      for (std::size_t i = 0; i < c.gout.size(); ++i) (*c.gin[1])[i] += (1.0 - f) * c.gout[i];
    if (c.gin[2]) {
      double s = 0.0;
      for (std::size_t i = 0; i < c.gout.size(); ++i) s += c.gout[i] * ((*c.in[0])[i] - (*c.in[1])[i]);
      (*c.gin[2])[0] += s;
    }
  });
}

Var mul_rows(const Var& a, const Var& col) {
  const Tensor& av = a.value();
  if (av.rank() != 2 || col.shape() != Shape{av.rows(), 1}) {
    throw DimensionError("mul_rows: " + shape_str(av.shape()) + " by " + shape_str(col.shape()));
  }
  Tensor out = av;
  for (std::size_t i = 0; i < av.rows(); ++i)
    for (std::size_t j = 0; j < av.cols(); ++j) out.at(i, j) *= col.value()[i];
  return Var::from_op("mul_rows", std::move(out), {a, col}, [](const BackwardContext& c) {
    const Tensor& av = *c.in[0];
    const Tensor& cv = *c.in[1];
    for (std::size_t i = 0; i < av.rows(); ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < av.cols(); ++j) {
        if (c.gin[0]) c.gin[0]->at(i, j) += c.gout.at(i, j) * cv[i];
        s += c.gout.at(i, j) * av.at(i, j);
      }
      if (c.gin[1]) (*c.gin[1])[i] += s;
    }
  });
}

Var mul_cols(const Var& a, const Var& row) {
  const Tensor& av = a.value();
  if (av.rank() != 2 || row.shape() != Shape{1, av.cols()}) {
    throw DimensionError("mul_cols: " + shape_str(av.shape()) + " by " + shape_str(row.shape()));
  }
  Tensor out = av;
  for (std::size_t i = 0; i < av.rows(); ++i)
    for (std::size_t j = 0; j < av.cols(); ++j) out.at(i, j) *= row.value()[j];
  return Var::from_op("mul_cols", std::move(out), {a, row}, [](const BackwardContext& c) {
    const Tensor& av = *c.in[0];
    const Tensor& rv = *c.in[1];
    for (std::size_t i = 0; i < av.rows(); ++i) {
      for (std::size_t j = 0; j < av.cols(); ++j) {
        if (c.gin[0]) c.gin[0]->at(i, j) += c.gout.at(i, j) * rv[j];
        if (c.gin[1]) (*c.gin[1])[j] += c.gout.at(i, j) * av.at(i, j);
      }
    }
  });
}

Var add_channel_bias(const Var& x, const Var& bias) {
  const Tensor& xv = x.value();
  const std::size_t channels = xv.dim(0);
  if (bias.value().size() != channels) {
    throw DimensionError("add_channel_bias: " + shape_str(xv.shape()) + " with bias " + shape_str(bias.shape()));
  }
  const std::size_t plane = xv.size() / channels;
  Tensor out = xv;
  for (std::size_t ch = 0; ch < channels; ++ch)
    for (std::size_t p = 0; p < plane; ++p) out[ch * plane + p] += bias.value()[ch];
  return Var::from_op("add_channel_bias", std::move(out), {x, bias}, [channels, plane](const BackwardContext& c) {
    if (c.gin[0]) accumulate(*c.gin[0], c.gout);
    if (c.gin[1]) {
      for (std::size_t ch = 0; ch < channels; ++ch) {
        double s = 0.0;
        for (std::size_t p = 0; p < plane; ++p) s += c.gout[ch * plane + p];
        (*c.gin[1])[ch] += s;
      }
    }
  });
}

Var sqrt(const Var& a) {
  Tensor out = a.value();
  for (double& v : out.data()) v = std::sqrt(v);
  return Var::from_op("sqrt", std::move(out), {a}, [](const BackwardContext& c) {
    for (std::size_t i = 0; i < c.gout.size(); ++i) (*c.gin[0])[i] += c.gout[i] * 0.5 / c.out[i];
  });
}

Var clamp_min(const Var& a, double floor) {
  Tensor out = a.value();
  for (double& v : out.data()) v = std::max(v, floor);
  return Var::from_op("clamp_min", std::move(out), {a}, [floor](const BackwardContext& c) {
    for (std::size_t i = 0; i < c.gout.size(); ++i)
      if ((*c.in[0])[i] > floor) (*c.gin[0])[i] += c.gout[i];
  });
}

Var gelu(const Var& a) {
  Tensor out = a.value();
  for (double& v : out.data()) v = 0.5 * v * (1.0 + std::erf(v * std::numbers::sqrt2 / 2.0));
  return Var::from_op("gelu", std::move(out), {a}, [](const BackwardContext& c) {
    constexpr double inv_sqrt_2pi = 0.3989422804014327;
    for (std::size_t i = 0; i < c.gout.size(); ++i) {
      const double x = (*c.in[0])[i];
      const double cdf = 0.5 * (1.0 + std::erf(x * std::numbers::sqrt2 / 2.0));
      const double pdf = inv_sqrt_2pi * std::exp(-0.5 * x * x);
      (*c.gin[0])[i] += c.gout[i] * (cdf + x * pdf);
    }
  });
}

Var reshape(const Var& a, Shape shape) {
  return Var::from_op("reshape", a.value().reshaped(std::move(shape)), {a}, [](const BackwardContext& c) {
    accumulate(*c.gin[0], c.gout);
  });
}

Var concat_rows(const std::vector<Var>& parts) {
  if (parts.empty()) throw DimensionError("concat_rows: no inputs");
  const std::size_t width = parts.front().value().cols();
  std::size_t rows = 0;
  for (const auto& p : parts) {
    if (p.value().rank() != 2 || p.value().cols() != width) {
      throw DimensionError("concat_rows: width mismatch, " + shape_str(p.shape()));
    }
    rows += p.value().rows();
  }
  std::vector<double> values;
  values.reserve(rows * width);
  for (const auto& p : parts) values.insert(values.end(), p.value().data().begin(), p.value().data().end());
  return Var::from_op("concat_rows", Tensor({rows, width}, std::move(values)), parts, [](const BackwardContext& c) {
    std::size_t offset = 0;
    for (std::size_t k = 0; k < c.in.size(); ++k) {
      const std::size_t n = c.in[k]->size();
      if (c.gin[k])
        for (std::size_t i = 0; i < n; ++i) (*c.gin[k])[i] += c.gout[offset + i];
      offset += n;
    }
  });
}

Var conv2d(const Var& input, const Var& weight, const Var& bias, std::size_t stride) {
  return Var::from_op("conv2d", conv2d(input.value(), weight.value(), bias.value(), stride), {input, weight, bias},
                      [stride](const BackwardContext& c) {
                        conv2d_backward(*c.in[0], *c.in[1], c.gout, stride, c.gin[0], c.gin[1], c.gin[2]);
                      });
}

Var upsample_nearest2x(const Var& input) {
  const Tensor& in = input.value();
  if (in.rank() != 3) throw DimensionError("upsample_nearest2x: expected [C,H,W]");
  const std::size_t ch = in.dim(0), h = in.dim(1), w = in.dim(2);
  Tensor out({ch, 2 * h, 2 * w});
  for (std::size_t k = 0; k < ch; ++k)
    for (std::size_t y = 0; y < 2 * h; ++y)
      for (std::size_t x = 0; x < 2 * w; ++x) out[(k * 2 * h + y) * 2 * w + x] = in[(k * h + y / 2) * w + x / 2];
  return Var::from_op("upsample_nearest2x", std::move(out), {input}, [ch, h, w](const BackwardContext& c) {
    Tensor& g = *c.gin[0];
    for (std::size_t k = 0; k < ch; ++k)
      for (std::size_t y = 0; y < 2 * h; ++y)
        for (std::size_t x = 0; x < 2 * w; ++x) g[(k * h + y / 2) * w + x / 2] += c.gout[(k * 2 * h + y) * 2 * w + x];
  });
}

Var sum(const Var& a) {
  return Var::from_op("sum", Tensor::scalar(sum(a.value())), {a}, [](const BackwardContext& c) {
    for (double& g : c.gin[0]->data()) g += c.gout[0];
  });
}

Var sum_squares(const Var& a) {
  return Var::from_op("sum_squares", Tensor::scalar(sum_squares(a.value())), {a}, [](const BackwardContext& c) {
    for (std::size_t i = 0; i < c.in[0]->size(); ++i) (*c.gin[0])[i] += 2.0 * (*c.in[0])[i] * c.gout[0];
  });
}

Var mse(const Var& pred, const Tensor& target) {
  if (pred.shape() != target.shape()) {
    throw DimensionError("mse: " + shape_str(pred.shape()) + " vs " + shape_str(target.shape()));
  }
  const double inv_n = 1.0 / static_cast<double>(target.size());
  double s = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    const double d = pred.value()[i] - target[i];
    s += d * d;
  }
  return Var::from_op("mse", Tensor::scalar(s * inv_n), {pred}, [target, inv_n](const BackwardContext& c) {
    for (std::size_t i = 0; i < target.size(); ++i)
      (*c.gin[0])[i] += 2.0 * inv_n * ((*c.in[0])[i] - target[i]) * c.gout[0];
  });
}

}  // namespace artbank

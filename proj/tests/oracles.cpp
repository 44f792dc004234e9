#include "oracles.hpp"

#include <algorithm>
#include <cmath>

namespace oracle {

Mat from_tensor(const artbank::Tensor& t) {
  Mat m(t.rows(), std::vector<double>(t.cols()));
  for (std::size_t i = 0; i < t.rows(); ++i)
    for (std::size_t j = 0; j < t.cols(); ++j) m[i][j] = t.at(i, j);
  return m;
}

artbank::Tensor to_tensor(const Mat& m) {
  artbank::Tensor t({m.size(), m.front().size()});
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < m[i].size(); ++j) t.at(i, j) = m[i][j];
  return t;
}

Mat matmul(const Mat& a, const Mat& b) {
  Mat c(a.size(), std::vector<double>(b.front().size(), 0.0));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.front().size(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < b.size(); ++k) s += a[i][k] * b[k][j];
      c[i][j] = s;
    }
  return c;
}

Mat transpose(const Mat& a) {
  Mat t(a.front().size(), std::vector<double>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a[i].size(); ++j) t[j][i] = a[i][j];
  return t;
}

Mat softmax_rows(const Mat& a) {
  Mat out = a;
  for (auto& row : out) {
    const double m = *std::max_element(row.begin(), row.end());
    double z = 0.0;
    for (double& v : row) z += (v = std::exp(v - m));
    for (double& v : row) v /= z;
  }
  return out;
}

Mat channel_norm(const Mat& x, double eps) {
  Mat out = x;
  for (std::size_t c = 0; c < x.size(); ++c) {
    const double n = static_cast<double>(x[c].size());
    double mean = 0.0;
    for (double v : x[c]) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : x[c]) var += (v - mean) * (v - mean);
    var /= n;
    for (std::size_t j = 0; j < x[c].size(); ++j) out[c][j] = (x[c][j] - mean) / std::sqrt(var + eps);
  }
  return out;
}

namespace {

Mat statistics(SsamSteps& s, const Mat& i_m, double eps) {
  const std::size_t c = i_m.size(), n = i_m.front().size();
  s.mean = matmul(s.v, transpose(s.a_hat));
  Mat v_sq = s.v;
  for (auto& row : v_sq)
    for (double& x : row) x *= x;
  const Mat second = matmul(v_sq, transpose(s.a_hat));
  s.var = Mat(c, std::vector<double>(n));
  s.stddev = s.var;
  s.out = s.var;
  const Mat normed = channel_norm(i_m, eps);
  for (std::size_t i = 0; i < c; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      s.var[i][j] = second[i][j] - s.mean[i][j] * s.mean[i][j];
      s.stddev[i][j] = std::sqrt(std::max(0.0, s.var[i][j]) + eps);
      s.out[i][j] = s.stddev[i][j] * normed[i][j] + s.mean[i][j];
    }
  return s.out;
}

}  // namespace

SsamSteps ssam(const Mat& i_m, const Mat& w_q, const Mat& w_k, const Mat& w_v, const std::vector<double>& w_col,
               const std::vector<double>& w_row, double alpha, double eps) {
  SsamSteps s;
  s.q = matmul(w_q, i_m);
  s.k = matmul(w_k, i_m);
  s.v = matmul(w_v, i_m);
  s.a = softmax_rows(matmul(transpose(s.q), s.k));
  const std::size_t n = s.a.size();
  s.a_col = s.a;
  s.a_row = s.a;
  s.a_hat = s.a;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      s.a_col[i][j] = s.a[i][j] * w_col[i];
      s.a_row[i][j] = s.a[i][j] * w_row[j];
      s.a_hat[i][j] = alpha * s.a_col[i][j] + (1.0 - alpha) * s.a_row[i][j];
    }
  statistics(s, i_m, eps);
  return s;
}

Mat adaattn(const Mat& i_m, const Mat& w_q, const Mat& w_k, const Mat& w_v, double eps) {
  SsamSteps s;
  s.q = matmul(w_q, i_m);
  s.k = matmul(w_k, i_m);
  s.v = matmul(w_v, i_m);
  s.a = softmax_rows(matmul(transpose(s.q), s.k));
  s.a_hat = s.a;
  return statistics(s, i_m, eps);
}

Mat sanet(const Mat& i_m, const Mat& w_q, const Mat& w_k, const Mat& w_v, const Mat& w_o, double eps) {
  const Mat normed = channel_norm(i_m, eps);
  const Mat a = softmax_rows(matmul(transpose(matmul(w_q, normed)), matmul(w_k, normed)));
  const Mat mixed = matmul(w_o, matmul(matmul(w_v, i_m), transpose(a)));
  Mat out = i_m;
  for (std::size_t i = 0; i < out.size(); ++i)
    for (std::size_t j = 0; j < out[i].size(); ++j) out[i][j] += mixed[i][j];
  return out;
}

Volume conv2d(const Volume& in, const std::vector<Volume>& weight, const std::vector<double>& bias, int stride) {
  const int cin = static_cast<int>(in.size());
  const int h = static_cast<int>(in[0].size()), w = static_cast<int>(in[0][0].size());
  const int k = static_cast<int>(weight[0][0].size()), pad = k / 2;
  const int hout = (h + 2 * pad - k) / stride + 1, wout = (w + 2 * pad - k) / stride + 1;
  Volume out(weight.size(), Mat(hout, std::vector<double>(wout, 0.0)));
  for (std::size_t o = 0; o < weight.size(); ++o)
    for (int y = 0; y < hout; ++y)
      for (int x = 0; x < wout; ++x) {
        double s = bias.empty() ? 0.0 : bias[o];
        for (int i = 0; i < cin; ++i)
          for (int ky = 0; ky < k; ++ky)
            for (int kx = 0; kx < k; ++kx) {
              const int yy = y * stride + ky - pad, xx = x * stride + kx - pad;
              if (yy >= 0 && yy < h && xx >= 0 && xx < w) s += weight[o][i][ky][kx] * in[i][yy][xx];
            }
        out[o][y][x] = s;
      }
  return out;
}

double ssim_constant(double a, double b) {
  const double c1 = 1e-4;
  // Zero variance and covariance: the contrast/structure factor is C2 / C2.
  return (2 * a * b + c1) / (a * a + b * b + c1);
}

double alpha_bar_product(int t, int steps, double beta_start, double beta_end) {
  double p = 1.0;
  for (int i = 1; i <= t; ++i) {
    const double beta =
        steps == 1 ? beta_start : beta_start + (beta_end - beta_start) * (i - 1) / static_cast<double>(steps - 1);
    p *= 1.0 - beta;
  }
  return p;
}

}  // namespace oracle

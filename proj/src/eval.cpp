#include "artbank/eval.hpp"

#include <algorithm>
#include <cmath>

#include "artbank/errors.hpp"
#include "artbank/rng.hpp"

namespace artbank {

namespace {

struct WindowStats {
  double mean_a, mean_b, var_a, var_b, cov;
};

WindowStats window_stats(const ImageSample& a, const ImageSample& b, std::size_t x0, std::size_t y0, std::size_t wx,
                         std::size_t wy, std::size_t c) {
  const double n = static_cast<double>(wx * wy);
  double sa = 0.0, sb = 0.0;
  for (std::size_t y = y0; y < y0 + wy; ++y)
    for (std::size_t x = x0; x < x0 + wx; ++x) {
      sa += a.at(x, y, c);
      sb += b.at(x, y, c);
    }
  WindowStats s{sa / n, sb / n, 0.0, 0.0, 0.0};
  for (std::size_t y = y0; y < y0 + wy; ++y)
    for (std::size_t x = x0; x < x0 + wx; ++x) {
      const double da = a.at(x, y, c) - s.mean_a;
      const double db = b.at(x, y, c) - s.mean_b;
      s.var_a += da * da;
      s.var_b += db * db;
      s.cov += da * db;
    }
  s.var_a /= n;
  s.var_b /= n;
  s.cov /= n;
  return s;
}

// Circular-padded 3x3 convolution followed by ReLU; input [cin, h, w].
Tensor conv_relu_circular(const Tensor& in, const Tensor& weight) {
  const std::size_t cin = in.dim(0), h = in.dim(1), w = in.dim(2), cout = weight.dim(0);
  Tensor out({cout, h, w});
  for (std::size_t o = 0; o < cout; ++o)
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x) {
        double acc = 0.0;
        for (std::size_t i = 0; i < cin; ++i)
          for (std::size_t ky = 0; ky < 3; ++ky)
            for (std::size_t kx = 0; kx < 3; ++kx) {
              const std::size_t yy = (y + h + ky - 1) % h;
              const std::size_t xx = (x + w + kx - 1) % w;
              acc += weight[((o * cin + i) * 3 + ky) * 3 + kx] * in[(i * h + yy) * w + xx];
            }
        out[(o * h + y) * w + x] = std::max(acc, 0.0);
      }
  return out;
}

void append_gram(const Tensor& f, std::vector<double>& out) {
  const std::size_t k = f.dim(0), p = f.dim(1) * f.dim(2);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) {
      double s = 0.0;
      for (std::size_t q = 0; q < p; ++q) s += f[i * p + q] * f[j * p + q];
      out.push_back(s / static_cast<double>(p));
    }
}

double norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

double ssim(const ImageSample& a, const ImageSample& b) {
  a.validate();
  b.validate();
  if (a.width != b.width || a.height != b.height || a.channels != b.channels) {
    throw DimensionError("ssim: images differ in size (" + std::to_string(a.width) + "x" + std::to_string(a.height) +
                         "x" + std::to_string(a.channels) + " vs " + std::to_string(b.width) + "x" +
                         std::to_string(b.height) + "x" + std::to_string(b.channels) + ")");
  }
  const std::size_t wx = std::min(kSsimWindow, a.width);
  const std::size_t wy = std::min(kSsimWindow, a.height);
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t c = 0; c < a.channels; ++c)
    for (std::size_t y0 = 0; y0 + wy <= a.height; ++y0)
      for (std::size_t x0 = 0; x0 + wx <= a.width; ++x0) {
        const auto s = window_stats(a, b, x0, y0, wx, wy, c);
        const double num = (2.0 * s.mean_a * s.mean_b + kSsimC1) * (2.0 * s.cov + kSsimC2);
        const double den = (s.mean_a * s.mean_a + s.mean_b * s.mean_b + kSsimC1) * (s.var_a + s.var_b + kSsimC2);
        total += num / den;
        ++count;
      }
  return total / static_cast<double>(count);
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("cosine_similarity: length mismatch");
  const double na = norm(a), nb = norm(b);
  if (na == 0.0 || nb == 0.0) return 0.0;
  double dot = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
  return std::clamp(dot / (na * nb), -1.0, 1.0);
}

GramFeatureBank::GramFeatureBank(std::uint64_t seed) {
  Rng rng(derive_seed(seed, "gram-features"));
  // He-scaled normal weights keep both layers' activations on a similar scale.
  w1_ = rng.normal_tensor({kFeatures, 3, 3, 3}, std::sqrt(2.0 / 27.0));
  w2_ = rng.normal_tensor({kFeatures, kFeatures, 3, 3}, std::sqrt(2.0 / (9.0 * kFeatures)));
}

std::vector<double> GramFeatureBank::gram_vector(const ImageSample& img) const {
  img.validate();
  Tensor rgb({3, img.height, img.width});
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t y = 0; y < img.height; ++y)
      for (std::size_t x = 0; x < img.width; ++x)
        rgb[(c * img.height + y) * img.width + x] = img.at(x, y, img.channels == 3 ? c : 0);
  const Tensor f1 = conv_relu_circular(rgb, w1_);
  const Tensor f2 = conv_relu_circular(f1, w2_);
  std::vector<double> out;
  out.reserve(2 * kFeatures * kFeatures);
  append_gram(f1, out);
  append_gram(f2, out);
  return out;
}

StyleSignature signature_of(const std::vector<ImageSample>& collection, const GramFeatureBank& bank) {
  if (collection.empty()) throw ConfigError("signature_of: empty collection");
  std::vector<double> mean;
  for (const auto& img : collection) {
    const auto g = bank.gram_vector(img);
    if (mean.empty()) mean.assign(g.size(), 0.0);
    for (std::size_t i = 0; i < g.size(); ++i) mean[i] += g[i];
  }
  for (double& v : mean) v /= static_cast<double>(collection.size());
  const double n = norm(mean);
  if (n > 0.0)
    for (double& v : mean) v /= n;
  return {std::move(mean)};
}

double gram_style_score(const ImageSample& img, const StyleSignature& signature, const GramFeatureBank& bank) {
  return cosine_similarity(bank.gram_vector(img), signature.direction);
}

}  // namespace artbank

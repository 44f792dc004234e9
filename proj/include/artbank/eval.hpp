#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "artbank/data_io.hpp"

namespace artbank {

inline constexpr double kSsimC1 = 0.01 * 0.01;
inline constexpr double kSsimC2 = 0.03 * 0.03;
inline constexpr std::size_t kSsimWindow = 8;

// Mean SSIM over every 8x8 window (stride 1) and channel. Images smaller than a
// window are treated as a single window. Throws DimensionError on mismatch.
double ssim(const ImageSample& a, const ImageSample& b);

double cosine_similarity(std::span<const double> a, std::span<const double> b);

// Frozen two-layer random 3x3 conv feature extractor (circular padding, ReLU).
class GramFeatureBank {
 public:
  static constexpr std::uint64_t kDefaultSeed = 0x6772616dULL;
  static constexpr std::size_t kFeatures = 16;

  explicit GramFeatureBank(std::uint64_t seed = kDefaultSeed);

  // Both layers' vectorized Gram matrices (F F^T / positions), concatenated.
  std::vector<double> gram_vector(const ImageSample& img) const;

 private:
  Tensor w1_;  // kFeatures x 3 x 3 x 3
  Tensor w2_;  // kFeatures x kFeatures x 3 x 3
};

struct StyleSignature {
  std::vector<double> direction;  // unit norm
};

// Mean Gram vector of the collection, unit-normalized. Throws ConfigError if empty.
StyleSignature signature_of(const std::vector<ImageSample>& collection, const GramFeatureBank& bank = GramFeatureBank());

// Cosine between the image's Gram vector and the signature, in [-1, 1].
double gram_style_score(const ImageSample& img, const StyleSignature& signature,
                        const GramFeatureBank& bank = GramFeatureBank());

}  // namespace artbank

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "artbank/tensor.hpp"

namespace artbank {

// H x W x ch image with pixels in [0, 1], row-major and channel-interleaved.
struct ImageSample {
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t channels = 0;
  std::vector<double> pixels;

  ImageSample() = default;
  ImageSample(std::size_t w, std::size_t h, std::size_t ch, double fill = 0.0);

  double& at(std::size_t x, std::size_t y, std::size_t c) { return pixels[(y * width + x) * channels + c]; }
  double at(std::size_t x, std::size_t y, std::size_t c) const { return pixels[(y * width + x) * channels + c]; }

  // Throws DimensionError / NumericError when the invariants do not hold.
  void validate() const;
  bool operator==(const ImageSample&) const = default;
};

// Planar [ch, H, W] view used by the diffusion model.
Tensor to_tensor(const ImageSample& img);
// Clamps into [0, 1].
ImageSample from_tensor(const Tensor& t);

// P6 for 3 channels, P5 for 1; maxval 255.
std::vector<std::uint8_t> encode_ppm(const ImageSample& img);
ImageSample decode_ppm(std::span<const std::uint8_t> bytes);
void write_ppm(const ImageSample& img, const std::filesystem::path& path);
ImageSample read_ppm(const std::filesystem::path& path);
// Sorted *.ppm / *.pgm files of a directory.
std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir);

// Dataset layout: <root>/<style_id>/*.ppm, one subdirectory per collection.
struct StyleCollection {
  std::string style_id;
  std::vector<ImageSample> images;
};
// All images of `dir`; throws IoError if there are none or their sizes differ.
std::vector<ImageSample> load_collection(const std::filesystem::path& dir);
// Collections in sorted subdirectory order.
std::vector<StyleCollection> load_dataset(const std::filesystem::path& root);
// Writes images as 000.ppm, 001.ppm, ... into `dir` (created if missing).
void save_collection(const std::vector<ImageSample>& images, const std::filesystem::path& dir);

using Rgb = std::array<double, 3>;

enum class StyleFamily { stripes, blobs, checks, waves };
std::string_view to_string(StyleFamily f);
StyleFamily parse_style_family(std::string_view name);

struct StyleSpec {
  StyleFamily family = StyleFamily::stripes;
  std::vector<Rgb> palette;
  double orientation = 0.0;  // degrees
  double scale = 4.0;        // pixels per motif
  double jitter = 0.1;

  void validate() const;
};

// Built-in specs with distinct second-order statistics, one per family.
StyleSpec default_style_spec(StyleFamily family);

std::vector<ImageSample> gen_style_collection(const StyleSpec& spec, std::size_t count, std::size_t size,
                                              std::uint64_t seed, std::size_t channels = 3);

enum class ContentKind { shapes, gradient, photo };
std::string_view to_string(ContentKind k);
ContentKind parse_content_kind(std::string_view name);

ImageSample gen_content_image(ContentKind kind, std::size_t size, std::uint64_t seed, std::size_t channels = 3);

}  // namespace artbank

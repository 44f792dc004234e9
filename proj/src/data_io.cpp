#include "artbank/data_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "artbank/binary_io.hpp"
#include "artbank/errors.hpp"

namespace artbank {

ImageSample::ImageSample(std::size_t w, std::size_t h, std::size_t ch, double fill)
    : width(w), height(h), channels(ch), pixels(w * h * ch, fill) {
  if (w == 0 || h == 0) throw DimensionError("image extents must be positive");
  if (ch != 1 && ch != 3) throw DimensionError("image must have 1 or 3 channels");
}

void ImageSample::validate() const {
  if (width == 0 || height == 0) throw DimensionError("image extents must be positive");
  if (channels != 1 && channels != 3) throw DimensionError("image must have 1 or 3 channels");
  if (pixels.size() != width * height * channels) throw DimensionError("image pixel count mismatch");
  for (double v : pixels) {
    if (!std::isfinite(v) || v < 0.0 || v > 1.0) throw NumericError("image pixel outside [0, 1]");
  }
}

Tensor to_tensor(const ImageSample& img) {
  img.validate();
  Tensor t({img.channels, img.height, img.width});
  for (std::size_t c = 0; c < img.channels; ++c)
    for (std::size_t y = 0; y < img.height; ++y)
      for (std::size_t x = 0; x < img.width; ++x) t[(c * img.height + y) * img.width + x] = img.at(x, y, c);
  return t;
}

ImageSample from_tensor(const Tensor& t) {
  if (t.rank() != 3 || (t.dim(0) != 1 && t.dim(0) != 3)) {
    throw DimensionError("from_tensor expects [1|3, H, W], got " + shape_str(t.shape()));
  }
  ImageSample img(t.dim(2), t.dim(1), t.dim(0));
  for (std::size_t c = 0; c < img.channels; ++c)
    for (std::size_t y = 0; y < img.height; ++y)
      for (std::size_t x = 0; x < img.width; ++x) {
        const double v = t[(c * img.height + y) * img.width + x];
        if (!std::isfinite(v)) throw NumericError("from_tensor: non-finite pixel");
        img.at(x, y, c) = std::clamp(v, 0.0, 1.0);
      }
  return img;
}

std::vector<std::uint8_t> encode_ppm(const ImageSample& img) {
  img.validate();
  const std::string header = std::string(img.channels == 3 ? "P6" : "P5") + "\n" + std::to_string(img.width) + " " +
                             std::to_string(img.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(header.size() + img.pixels.size());
  for (double v : img.pixels) out.push_back(static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)));
  return out;
}

namespace {

class HeaderParser {
 public:
  explicit HeaderParser(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::size_t number(const char* what) {
    skip_space_and_comments();
    std::size_t value = 0;
    std::size_t digits = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + static_cast<std::size_t>(bytes_[pos_] - '0');
      if (++digits > 9) throw MalformedHeaderError(std::string("ppm: ") + what + " too large");
      ++pos_;
    }
    if (digits == 0) throw MalformedHeaderError(std::string("ppm: expected ") + what);
    return value;
  }

  void single_whitespace() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
      throw MalformedHeaderError("ppm: expected whitespace after maxval");
    }
    ++pos_;
  }

  std::size_t position() const { return pos_; }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 2;
};

}  // namespace

ImageSample decode_ppm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P') throw MalformedHeaderError("ppm: missing 'P' magic");
  std::size_t channels = 0;
  switch (bytes[1]) {
    case '6':
      channels = 3;
      break;
    case '5':
      channels = 1;
      break;
    case '1':
    case '2':
    case '3':
    case '4':
    case '7':
      throw UnsupportedFormatError(std::string("ppm: unsupported variant P") + static_cast<char>(bytes[1]) +
                                   " (only binary P5/P6 are supported)");
    default:
      throw MalformedHeaderError("ppm: unknown magic");
  }
  HeaderParser parser(bytes);
  const std::size_t width = parser.number("width");
  const std::size_t height = parser.number("height");
  const std::size_t maxval = parser.number("maxval");
  parser.single_whitespace();
  if (width == 0 || height == 0) throw MalformedHeaderError("ppm: zero extent");
  if (maxval != 255) throw UnsupportedFormatError("ppm: maxval " + std::to_string(maxval) + " (only 255 supported)");
  const std::size_t need = width * height * channels;
  const std::size_t have = bytes.size() - parser.position();
  if (have < need) {
    throw TruncatedError("ppm: payload truncated, " + std::to_string(have) + " of " + std::to_string(need) + " bytes");
  }
  ImageSample img(width, height, channels);
  for (std::size_t i = 0; i < need; ++i) img.pixels[i] = bytes[parser.position() + i] / 255.0;
  return img;
}

void write_ppm(const ImageSample& img, const std::filesystem::path& path) { write_file_bytes(path, encode_ppm(img)); }

ImageSample read_ppm(const std::filesystem::path& path) { return decode_ppm(read_file_bytes(path)); }

std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw IoError("not a directory: '" + dir.string() + "'");
  std::vector<std::filesystem::path> out;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const auto ext = entry.path().extension();
    if (entry.is_regular_file() && (ext == ".ppm" || ext == ".pgm")) out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<ImageSample> load_collection(const std::filesystem::path& dir) {
  std::vector<ImageSample> images;
  for (const auto& path : list_images(dir)) {
    images.push_back(read_ppm(path));
    const auto& first = images.front();
    const auto& last = images.back();
    if (last.width != first.width || last.height != first.height || last.channels != first.channels) {
      throw IoError("image '" + path.string() + "' differs in size from the rest of '" + dir.string() + "'");
    }
  }
  if (images.empty()) throw IoError("no .ppm/.pgm images in '" + dir.string() + "'");
  return images;
}

std::vector<StyleCollection> load_dataset(const std::filesystem::path& root) {
  if (!std::filesystem::is_directory(root)) throw IoError("dataset root is not a directory: '" + root.string() + "'");
  std::vector<std::filesystem::path> dirs;
  for (const auto& entry : std::filesystem::directory_iterator(root)) {
    if (entry.is_directory()) dirs.push_back(entry.path());
  }
  std::sort(dirs.begin(), dirs.end());
  std::vector<StyleCollection> out;
  for (const auto& dir : dirs) out.push_back({dir.filename().string(), load_collection(dir)});
  if (out.empty()) throw IoError("dataset root '" + root.string() + "' has no collection subdirectories");
  return out;
}

void save_collection(const std::vector<ImageSample>& images, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (std::size_t i = 0; i < images.size(); ++i) {
    std::string name = std::to_string(i);
    name.insert(0, name.size() < 3 ? 3 - name.size() : 0, '0');
    write_ppm(images[i], dir / (name + ".ppm"));
  }
}

}  // namespace artbank

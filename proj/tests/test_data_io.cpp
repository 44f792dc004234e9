#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "artbank/data_io.hpp"
#include "artbank/errors.hpp"
#include "artbank/rng.hpp"

using namespace artbank;
namespace fs = std::filesystem;

namespace {

std::vector<std::uint8_t> bytes_of(const std::string& s) { return {s.begin(), s.end()}; }

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("artbank_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

// Fraction of neighbouring pixel pairs whose luminance differs by more than 0.1.
double edge_density(const ImageSample& img) {
  const auto lum = [&](std::size_t x, std::size_t y) {
    double s = 0.0;
    for (std::size_t c = 0; c < img.channels; ++c) s += img.at(x, y, c);
    return s / static_cast<double>(img.channels);
  };
  std::size_t edges = 0, pairs = 0;
  for (std::size_t y = 0; y < img.height; ++y)
    for (std::size_t x = 0; x < img.width; ++x) {
      if (x + 1 < img.width) {
        edges += std::abs(lum(x + 1, y) - lum(x, y)) > 0.1;
        ++pairs;
      }
      if (y + 1 < img.height) {
        edges += std::abs(lum(x, y + 1) - lum(x, y)) > 0.1;
        ++pairs;
      }
    }
  return static_cast<double>(edges) / static_cast<double>(pairs);
}

double pixel_sum(const ImageSample& img) {
  double s = 0.0;
  for (double v : img.pixels) s += v;
  return s;
}

}  // namespace

TEST_CASE("a white pixel encodes to the exact P6 bytes") {
  const ImageSample white(1, 1, 3, 1.0);
  CHECK(encode_ppm(white) == bytes_of(std::string("P6\n1 1\n255\n\xff\xff\xff", 14)));
  const ImageSample gray(2, 1, 1, 0.0);
  CHECK(encode_ppm(gray) == bytes_of(std::string("P5\n2 1\n255\n\0\0", 13)));
}

TEST_CASE("ppm round-trips within one quantization step") {
  Rng rng(1);
  for (std::size_t ch : {1u, 3u}) {
    ImageSample img(5, 3, ch);
    for (double& v : img.pixels) v = rng.uniform();
    const ImageSample back = decode_ppm(encode_ppm(img));
    CHECK(back.width == 5);
    CHECK(back.height == 3);
    CHECK(back.channels == ch);
    for (std::size_t i = 0; i < img.pixels.size(); ++i) CHECK(std::abs(back.pixels[i] - img.pixels[i]) <= 1.0 / 255);
    // Quantized images are fixed points of the codec.
    CHECK(encode_ppm(decode_ppm(encode_ppm(back))) == encode_ppm(back));
  }
}

TEST_CASE("ppm files write and read back") {
  const fs::path dir = scratch_dir("ppm");
  const ImageSample img = gen_content_image(ContentKind::photo, 8, 2);
  write_ppm(img, dir / "a.ppm");
  const ImageSample back = read_ppm(dir / "a.ppm");
  write_ppm(back, dir / "b.ppm");
  CHECK(read_ppm(dir / "b.ppm") == back);
  CHECK_THROWS_AS(read_ppm(dir / "missing.ppm"), IoError);
  fs::remove_all(dir);
}

TEST_CASE("headers accept comments and arbitrary whitespace") {
  const auto img = decode_ppm(bytes_of(std::string("P5 # comment\n 2\t1 # more\n255\n\x10\x20", 31)));
  CHECK(img.width == 2);
  CHECK(img.pixels[1] == doctest::Approx(32.0 / 255));
}

TEST_CASE("bad ppm inputs raise distinct errors") {
  CHECK_THROWS_AS(decode_ppm(bytes_of("P3\n1 1\n255\n255 255 255\n")), UnsupportedFormatError);
  CHECK_THROWS_AS(decode_ppm(bytes_of("P6\n1 1\n65535\n\xff\xff\xff\xff\xff\xff")), UnsupportedFormatError);
  CHECK_THROWS_AS(decode_ppm(bytes_of("P6\n2 2\n255\n\xff\xff\xff")), TruncatedError);
  CHECK_THROWS_AS(decode_ppm(bytes_of("P6\nx 2\n255\n")), MalformedHeaderError);
  CHECK_THROWS_AS(decode_ppm(bytes_of("Q6\n1 1\n255\n")), MalformedHeaderError);
  CHECK_THROWS_AS(decode_ppm(bytes_of("P6\n0 1\n255\n")), MalformedHeaderError);
  CHECK_THROWS_AS(decode_ppm(bytes_of("P6\n1 1\n255")), MalformedHeaderError);
  CHECK_THROWS_AS(decode_ppm(bytes_of("")), MalformedHeaderError);
}

TEST_CASE("image invariants are validated") {
  ImageSample img(2, 2, 3);
  CHECK_NOTHROW(img.validate());
  img.pixels[0] = 1.5;
  CHECK_THROWS_AS(img.validate(), NumericError);
  CHECK_THROWS_AS(ImageSample(2, 2, 2), DimensionError);
  CHECK_THROWS_AS(from_tensor(Tensor({2, 4, 4})), DimensionError);
  const Tensor t({3, 2, 2}, 2.0);
  for (double v : from_tensor(t).pixels) CHECK(v == 1.0);
}

TEST_CASE("tensor conversion is planar and lossless") {
  const ImageSample img = gen_content_image(ContentKind::shapes, 6, 3);
  const Tensor t = to_tensor(img);
  CHECK(t.shape() == Shape{3, 6, 6});
  CHECK(t[(2 * 6 + 1) * 6 + 4] == img.at(4, 1, 2));
  CHECK(from_tensor(t) == img);
}

TEST_CASE("collections save and load in sorted order") {
  const fs::path root = scratch_dir("dataset");
  const auto a = gen_style_collection(default_style_spec(StyleFamily::waves), 3, 8, 4);
  const auto b = gen_style_collection(default_style_spec(StyleFamily::checks), 2, 8, 5);
  save_collection(a, root / "waves");
  save_collection(b, root / "checks");
  CHECK(fs::exists(root / "waves" / "002.ppm"));
  const auto ds = load_dataset(root);
  REQUIRE(ds.size() == 2);
  CHECK(ds[0].style_id == "checks");
  CHECK(ds[1].images.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) CHECK(encode_ppm(ds[1].images[i]) == encode_ppm(a[i]));
  write_ppm(ImageSample(4, 4, 3), root / "checks" / "zz.ppm");
  CHECK_THROWS_AS(load_collection(root / "checks"), IoError);
  fs::create_directories(root / "empty");
  CHECK_THROWS_AS(load_collection(root / "empty"), IoError);
  fs::remove_all(root);
}

TEST_CASE("style collections are reproducible and seed dependent") {
  for (StyleFamily f : {StyleFamily::stripes, StyleFamily::blobs, StyleFamily::checks, StyleFamily::waves}) {
    CAPTURE(to_string(f));
    const StyleSpec spec = default_style_spec(f);
    const auto a = gen_style_collection(spec, 1, 16, 7);
    CHECK(a == gen_style_collection(spec, 1, 16, 7));
    const auto b = gen_style_collection(spec, 1, 16, 8);
    CHECK(pixel_sum(a[0]) != pixel_sum(b[0]));
    CHECK_NOTHROW(a[0].validate());
    CHECK(parse_style_family(to_string(f)) == f);
  }
  // The first images of a larger collection match a smaller one with the same seed.
  const auto many = gen_style_collection(default_style_spec(StyleFamily::blobs), 4, 8, 9);
  CHECK(many[0] == gen_style_collection(default_style_spec(StyleFamily::blobs), 1, 8, 9)[0]);
  CHECK_THROWS_AS(parse_style_family("cubism"), ConfigError);
  StyleSpec broken = default_style_spec(StyleFamily::stripes);
  broken.palette.clear();
  CHECK_THROWS_AS(gen_style_collection(broken, 1, 8, 1), ConfigError);
}

TEST_CASE("content images behave as documented") {
  for (ContentKind k : {ContentKind::shapes, ContentKind::gradient, ContentKind::photo}) {
    CAPTURE(to_string(k));
    CHECK(gen_content_image(k, 16, 3) == gen_content_image(k, 16, 3));
    CHECK_FALSE(gen_content_image(k, 16, 3) == gen_content_image(k, 16, 4));
    CHECK(parse_content_kind(to_string(k)) == k);
  }
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const ImageSample g = gen_content_image(ContentKind::gradient, 16, seed);
    for (std::size_t y = 0; y < 16; ++y)
      for (std::size_t c = 0; c < 3; ++c) {
        const double dir = g.at(15, y, c) - g.at(0, y, c);
        for (std::size_t x = 1; x < 16; ++x) CHECK((g.at(x, y, c) - g.at(x - 1, y, c)) * dir >= 0.0);
      }
  }
  double shapes = 0.0, gradient = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    shapes += edge_density(gen_content_image(ContentKind::shapes, 16, seed));
    gradient += edge_density(gen_content_image(ContentKind::gradient, 16, seed));
  }
  CHECK(shapes > gradient);
  const ImageSample gray = gen_content_image(ContentKind::photo, 8, 1, 1);
  CHECK(gray.channels == 1);
  CHECK_THROWS_AS(gen_content_image(ContentKind::photo, 8, 1, 2), ConfigError);
}

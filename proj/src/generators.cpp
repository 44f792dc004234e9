#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>

#include "artbank/data_io.hpp"
#include "artbank/errors.hpp"
#include "artbank/rng.hpp"

namespace artbank {

namespace {

constexpr int kSuper = 3;

double positive_mod(double a, double m) {
  const double r = std::fmod(a, m);
  return r < 0 ? r + m : r;
}

// Box-filtered rendering of a colour field over kSuper x kSuper subsamples.
ImageSample render(std::size_t size, std::size_t channels, const std::function<Rgb(double, double)>& field) {
  ImageSample img(size, size, channels);
  for (std::size_t y = 0; y < size; ++y) {
    for (std::size_t x = 0; x < size; ++x) {
      Rgb acc{0, 0, 0};
      for (int sy = 0; sy < kSuper; ++sy) {
        for (int sx = 0; sx < kSuper; ++sx) {
          const Rgb c = field(static_cast<double>(x) + (sx + 0.5) / kSuper, static_cast<double>(y) + (sy + 0.5) / kSuper);
          for (int k = 0; k < 3; ++k) acc[k] += c[k];
        }
      }
      for (int k = 0; k < 3; ++k) acc[k] /= kSuper * kSuper;
      if (channels == 3) {
        for (int k = 0; k < 3; ++k) img.at(x, y, k) = std::clamp(acc[k], 0.0, 1.0);
      } else {
        img.at(x, y, 0) = std::clamp(0.299 * acc[0] + 0.587 * acc[1] + 0.114 * acc[2], 0.0, 1.0);
      }
    }
  }
  return img;
}

Rgb lerp(const Rgb& a, const Rgb& b, double t) {
  return {a[0] + (b[0] - a[0]) * t, a[1] + (b[1] - a[1]) * t, a[2] + (b[2] - a[2]) * t};
}

// Piecewise-linear ramp through the palette, t in [0, 1].
Rgb palette_ramp(const std::vector<Rgb>& palette, double t) {
  if (palette.size() == 1) return palette.front();
  const double pos = std::clamp(t, 0.0, 1.0) * static_cast<double>(palette.size() - 1);
  const std::size_t i = std::min(static_cast<std::size_t>(pos), palette.size() - 2);
  return lerp(palette[i], palette[i + 1], pos - static_cast<double>(i));
}

void require_channels(std::size_t channels) {
  if (channels != 1 && channels != 3) throw ConfigError("image channels must be 1 or 3");
}

}  // namespace

std::string_view to_string(StyleFamily f) {
  switch (f) {
    case StyleFamily::stripes:
      return "stripes";
    case StyleFamily::blobs:
      return "blobs";
    case StyleFamily::checks:
      return "checks";
    case StyleFamily::waves:
      return "waves";
  }
  return "unknown";
}

StyleFamily parse_style_family(std::string_view name) {
  for (auto f : {StyleFamily::stripes, StyleFamily::blobs, StyleFamily::checks, StyleFamily::waves}) {
    if (to_string(f) == name) return f;
  }
  throw ConfigError("unknown style family '" + std::string(name) + "'");
}

void StyleSpec::validate() const {
  if (palette.empty()) throw ConfigError("style spec needs a non-empty palette");
  if (!(scale >= 1.0)) throw ConfigError("style spec scale must be >= 1");
  if (!(jitter >= 0.0)) throw ConfigError("style spec jitter must be >= 0");
}

StyleSpec default_style_spec(StyleFamily family) {
  switch (family) {
    case StyleFamily::stripes:
      return {family, {{0.90, 0.20, 0.10}, {0.95, 0.85, 0.20}, {0.10, 0.10, 0.40}}, 30.0, 2.5, 0.1};
    case StyleFamily::blobs:
      return {family, {{0.10, 0.30, 0.15}, {0.90, 0.60, 0.70}, {0.95, 0.95, 0.85}}, 0.0, 2.5, 0.2};
    case StyleFamily::checks:
      return {family, {{0.08, 0.08, 0.10}, {0.85, 0.85, 0.75}}, 0.0, 4.0, 0.1};
    case StyleFamily::waves:
      return {family, {{0.05, 0.20, 0.60}, {0.30, 0.70, 0.90}, {0.90, 0.95, 1.00}}, 90.0, 3.0, 0.1};
  }
  throw ConfigError("unknown style family");
}

std::vector<ImageSample> gen_style_collection(const StyleSpec& spec, std::size_t count, std::size_t size,
                                              std::uint64_t seed, std::size_t channels) {
  spec.validate();
  require_channels(channels);
  if (count == 0) throw ConfigError("collection count must be at least 1");
  if (size == 0) throw ConfigError("image size must be positive");
  const auto& pal = spec.palette;
  const double period = spec.scale * static_cast<double>(pal.size());
  std::vector<ImageSample> out;
  out.reserve(count);
  for (std::size_t n = 0; n < count; ++n) {
    Rng rng(derive_seed(seed, n));
    const double theta = (spec.orientation + rng.uniform(-15.0, 15.0) * spec.jitter) * std::numbers::pi / 180.0;
    const double ct = std::cos(theta), st = std::sin(theta);
    const double phase_u = rng.uniform(0.0, 2.0 * period);
    const double phase_v = rng.uniform(0.0, 2.0 * period);
    auto rotate_u = [=](double x, double y) { return x * ct + y * st + phase_u; };
    auto rotate_v = [=](double x, double y) { return -x * st + y * ct + phase_v; };

    switch (spec.family) {
      case StyleFamily::stripes:
        out.push_back(render(size, channels, [&](double x, double y) {
          const auto band = static_cast<std::size_t>(positive_mod(rotate_u(x, y), period) / spec.scale);
          return pal[std::min(band, pal.size() - 1)];
        }));
        break;
      case StyleFamily::checks:
        out.push_back(render(size, channels, [&](double x, double y) {
          const auto i = static_cast<long>(std::floor(rotate_u(x, y) / spec.scale));
          const auto j = static_cast<long>(std::floor(rotate_v(x, y) / spec.scale));
          const long k = (i + j) % static_cast<long>(pal.size());
          return pal[static_cast<std::size_t>(k < 0 ? k + static_cast<long>(pal.size()) : k)];
        }));
        break;
      case StyleFamily::waves: {
        const double amplitude = spec.scale * (0.6 + rng.uniform(-0.2, 0.2) * spec.jitter);
        out.push_back(render(size, channels, [&](double x, double y) {
          const double u = rotate_u(x, y);
          const double v = rotate_v(x, y);
          const double warp = amplitude * std::sin(2.0 * std::numbers::pi * v / (2.0 * spec.scale));
          const double s = std::sin(2.0 * std::numbers::pi * (u + warp) / (2.0 * spec.scale));
          return palette_ramp(pal, 0.5 * (s + 1.0));
        }));
        break;
      }
      case StyleFamily::blobs: {
        struct Disk {
          double cx, cy, r;
          Rgb color;
        };
        const double area = static_cast<double>(size * size);
        const auto disks_n = static_cast<std::size_t>(std::max(1.0, std::round(area / (4.0 * spec.scale * spec.scale))));
        std::vector<Disk> disks;
        for (std::size_t d = 0; d < disks_n; ++d) {
          const double r = spec.scale * (0.7 + rng.uniform(-0.3, 0.3) * (0.5 + spec.jitter));
          const Rgb color = pal.size() > 1 ? pal[1 + rng.index(pal.size() - 1)] : pal[0];
          disks.push_back({rng.uniform(0.0, static_cast<double>(size)), rng.uniform(0.0, static_cast<double>(size)), r,
                           color});
        }
        out.push_back(render(size, channels, [&](double x, double y) {
          Rgb c = pal[0];
          for (const auto& d : disks) {
            if ((x - d.cx) * (x - d.cx) + (y - d.cy) * (y - d.cy) <= d.r * d.r) c = d.color;
          }
          return c;
        }));
        break;
      }
    }
  }
  return out;
}

std::string_view to_string(ContentKind k) {
  switch (k) {
    case ContentKind::shapes:
      return "shapes";
    case ContentKind::gradient:
      return "gradient";
    case ContentKind::photo:
      return "photo";
  }
  return "unknown";
}

ContentKind parse_content_kind(std::string_view name) {
  for (auto k : {ContentKind::shapes, ContentKind::gradient, ContentKind::photo}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("unknown content kind '" + std::string(name) + "'");
}

ImageSample gen_content_image(ContentKind kind, std::size_t size, std::uint64_t seed, std::size_t channels) {
  require_channels(channels);
  if (size == 0) throw ConfigError("image size must be positive");
  Rng rng(derive_seed(seed, to_string(kind)));
  auto random_color = [&](double lo, double hi) -> Rgb {
    return {rng.uniform(lo, hi), rng.uniform(lo, hi), rng.uniform(lo, hi)};
  };
  const double s = static_cast<double>(size);

  switch (kind) {
    case ContentKind::gradient: {
      const Rgb c0 = random_color(0.0, 0.3);
      const Rgb c1 = random_color(0.7, 1.0);
      ImageSample img(size, size, channels);
      for (std::size_t y = 0; y < size; ++y)
        for (std::size_t x = 0; x < size; ++x) {
          const double t = size > 1 ? static_cast<double>(x) / (s - 1.0) : 0.0;
          const Rgb c = lerp(c0, c1, t);
          if (channels == 3) {
            for (int k = 0; k < 3; ++k) img.at(x, y, k) = c[k];
          } else {
            img.at(x, y, 0) = 0.299 * c[0] + 0.587 * c[1] + 0.114 * c[2];
          }
        }
      return img;
    }
    case ContentKind::shapes: {
      struct Shape2d {
        bool disk;
        double cx, cy, r;
        std::vector<std::pair<double, double>> poly;
        Rgb color;
      };
      const Rgb background = random_color(0.2, 0.8);
      const int count = rng.integer(2, 4);
      std::vector<Shape2d> shapes;
      for (int i = 0; i < count; ++i) {
        Shape2d sh{};
        sh.disk = rng.uniform() < 0.5;
        sh.cx = rng.uniform(0.2 * s, 0.8 * s);
        sh.cy = rng.uniform(0.2 * s, 0.8 * s);
        sh.r = rng.uniform(0.15 * s, 0.3 * s);
        Rgb c = random_color(0.0, 1.0);
        // Keep each shape visibly distinct from the background.
        for (int k = 0; k < 3; ++k) {
          if (std::abs(c[k] - background[k]) < 0.25) c[k] = background[k] > 0.5 ? c[k] * 0.3 : 1.0 - 0.3 * c[k];
        }
        sh.color = c;
        if (!sh.disk) {
          const int sides = rng.integer(3, 5);
          const double start = rng.uniform(0.0, 2.0 * std::numbers::pi);
          for (int v = 0; v < sides; ++v) {
            const double a = start + 2.0 * std::numbers::pi * v / sides;
            sh.poly.emplace_back(sh.cx + sh.r * std::cos(a), sh.cy + sh.r * std::sin(a));
          }
        }
        shapes.push_back(std::move(sh));
      }
      auto inside = [](const Shape2d& sh, double x, double y) {
        if (sh.disk) return (x - sh.cx) * (x - sh.cx) + (y - sh.cy) * (y - sh.cy) <= sh.r * sh.r;
        // Convex polygon with counter-clockwise vertices.
        for (std::size_t i = 0; i < sh.poly.size(); ++i) {
          const auto [x0, y0] = sh.poly[i];
          const auto [x1, y1] = sh.poly[(i + 1) % sh.poly.size()];
          if ((x1 - x0) * (y - y0) - (y1 - y0) * (x - x0) < 0) return false;
        }
        return true;
      };
      return render(size, channels, [&](double x, double y) {
        Rgb c = background;
        for (const auto& sh : shapes) {
          if (inside(sh, x, y)) c = sh.color;
        }
        return c;
      });
    }
    case ContentKind::photo: {
      const Rgb sky_top = random_color(0.3, 0.6);
      const Rgb sky_low = random_color(0.6, 0.95);
      const Rgb ground = random_color(0.1, 0.45);
      const double horizon = rng.uniform(0.45, 0.7) * s;
      const double hill_amp = rng.uniform(0.05, 0.15) * s;
      const double hill_freq = rng.uniform(0.5, 1.5);
      const double sun_x = rng.uniform(0.2, 0.8) * s;
      const double sun_y = rng.uniform(0.15, 0.35) * s;
      const double sun_r = rng.uniform(0.08, 0.14) * s;
      return render(size, channels, [&](double x, double y) {
        const double ridge = horizon - hill_amp * std::sin(2.0 * std::numbers::pi * hill_freq * x / s);
        if (y > ridge) {
          const double depth = std::clamp((y - ridge) / (s - ridge + 1e-9), 0.0, 1.0);
          return lerp(ground, {ground[0] * 0.5, ground[1] * 0.5, ground[2] * 0.5}, depth);
        }
        const double d = std::hypot(x - sun_x, y - sun_y);
        const double glow = std::clamp(1.0 - (d - sun_r) / (0.5 * sun_r), 0.0, 1.0);
        return lerp(lerp(sky_top, sky_low, std::clamp(y / ridge, 0.0, 1.0)), {1.0, 0.95, 0.7}, glow);
      });
    }
  }
  throw ConfigError("unknown content kind");
}

}  // namespace artbank

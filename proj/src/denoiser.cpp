#include <cmath>

#include "artbank/binary_io.hpp"
#include "artbank/diffusion.hpp"
#include "artbank/errors.hpp"
#include "artbank/ops.hpp"

namespace artbank {

namespace {

struct ParamSpec {
  const char* name;
  Shape shape;
  double bound;  // U(-bound, bound); 0 means zero-initialized
};

std::vector<ParamSpec> param_specs(const DenoiserConfig& c) {
  const auto inv_sqrt = [](std::size_t n) { return 1.0 / std::sqrt(static_cast<double>(n)); };
  const std::size_t w = c.width;
  return {
      {"conv_in.w", {w, c.channels, 3, 3}, inv_sqrt(c.channels * 9)},
      {"conv_in.b", {w}, 0.0},
      {"time.w", {w, c.time_features}, inv_sqrt(c.time_features)},
      {"conv_down.w", {w, w, 3, 3}, inv_sqrt(w * 9)},
      {"conv_down.b", {w}, 0.0},
      {"attn.q", {c.attn_dim, w}, inv_sqrt(w)},
      {"attn.k", {c.attn_dim, c.cond_dim}, inv_sqrt(c.cond_dim)},
      {"attn.v", {c.attn_dim, c.cond_dim}, inv_sqrt(c.cond_dim)},
      {"attn.o", {w, c.attn_dim}, inv_sqrt(c.attn_dim)},
      {"conv_up.w", {w, w, 3, 3}, inv_sqrt(w * 9)},
      {"conv_up.b", {w}, 0.0},
      {"conv_out.w", {c.channels, w, 3, 3}, 0.0},
      {"conv_out.b", {c.channels}, 0.0},
  };
}

void check_params(const DenoiserConfig& config, const ParameterSet& params) {
  const auto specs = param_specs(config);
  if (params.size() != specs.size()) throw DimensionError("denoiser parameter count does not match config");
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const auto& p = params.items()[i];
    if (p.name != specs[i].name || p.value.shape() != specs[i].shape) {
      throw DimensionError("denoiser parameter '" + p.name + "' " + shape_str(p.value.shape()) + " expected '" +
                           specs[i].name + "' " + shape_str(specs[i].shape));
    }
  }
}

}  // namespace

void DenoiserConfig::validate() const {
  if (channels != 1 && channels != 3) throw ConfigError("denoiser channels must be 1 or 3");
  if (width == 0 || cond_dim == 0 || attn_dim == 0) throw ConfigError("denoiser widths must be positive");
  if (time_features == 0 || time_features % 2 != 0) throw ConfigError("time_features must be a positive even number");
}

Tensor time_features(int t, std::size_t count) {
  Tensor f({count, 1});
  const std::size_t half = count / 2;
  for (std::size_t i = 0; i < half; ++i) {
    const double freq = std::exp(-std::log(10000.0) * static_cast<double>(i) / static_cast<double>(half));
    f[i] = std::sin(t * freq);
    f[half + i] = std::cos(t * freq);
  }
  return f;
}

Denoiser::Denoiser(DenoiserConfig config, std::uint64_t seed) : config_(config) {
  config_.validate();
  Rng rng(derive_seed(seed, "denoiser"));
  for (const auto& spec : param_specs(config_)) {
    params_.add(spec.name, spec.bound > 0.0 ? rng.uniform_tensor(spec.shape, -spec.bound, spec.bound)
                                            : Tensor(spec.shape));
  }
}

Denoiser::Denoiser(DenoiserConfig config, ParameterSet params) : config_(config), params_(std::move(params)) {
  config_.validate();
  check_params(config_, params_);
}

Denoiser Denoiser::zeros(DenoiserConfig config) {
  config.validate();
  ParameterSet params;
  for (const auto& spec : param_specs(config)) params.add(spec.name, Tensor(spec.shape));
  return Denoiser(config, std::move(params));
}

Var Denoiser::forward(const Var& z, int t, const ConditionVector& cond) const {
  const Tensor& zv = z.value();
  if (zv.rank() != 3 || zv.dim(0) != config_.channels || zv.dim(1) % 2 != 0 || zv.dim(2) % 2 != 0) {
    throw DimensionError("denoiser input " + shape_str(zv.shape()) + " needs [" + std::to_string(config_.channels) +
                         ", even H, even W]");
  }
  if (cond.rows() > 0 && cond.width != config_.cond_dim) {
    throw DimensionError("condition width " + std::to_string(cond.width) + " vs denoiser " +
                         std::to_string(config_.cond_dim));
  }
  const auto p = [this](const char* name) { return params_.get(name); };

  const Var temb = matmul(p("time.w"), Var::constant(time_features(t, config_.time_features)));
  const Var h1 = gelu(add_channel_bias(conv2d(z, p("conv_in.w"), p("conv_in.b"), 1), temb));
  Var h2 = gelu(conv2d(h1, p("conv_down.w"), p("conv_down.b"), 2));

  if (cond.rows() > 0) {
    const Shape inner = h2.shape();
    const Var x = reshape(h2, {inner[0], inner[1] * inner[2]});
    const Var c_t = transpose(cond.embeddings);
    const Var q = transpose(matmul(p("attn.q"), x));          // P x d
    const Var k = matmul(p("attn.k"), c_t);                   // d x L
    const Var v = matmul(p("attn.v"), c_t);                   // d x L
    const Var a = softmax_rows(scale(matmul(q, k), 1.0 / std::sqrt(static_cast<double>(config_.attn_dim))));
    const Var attended = matmul(p("attn.o"), matmul(v, transpose(a)));  // W x P
    h2 = add(h2, reshape(attended, inner));
  }

  const Var h3 = add(gelu(conv2d(upsample_nearest2x(h2), p("conv_up.w"), p("conv_up.b"), 1)), h1);
  return conv2d(h3, p("conv_out.w"), p("conv_out.b"), 1);
}

Tensor Denoiser::predict(const Tensor& z, int t, const ConditionVector& cond) const {
  return forward(Var::constant(z), t, cond).value();
}

void Denoiser::freeze() { params_.set_requires_grad(false); }
void Denoiser::unfreeze() { params_.set_requires_grad(true); }

bool Denoiser::frozen() const {
  for (const auto& p : params_) {
    if (p.value.requires_grad()) return false;
  }
  return true;
}

Denoiser Denoiser::clone() const { return Denoiser(config_, params_.clone()); }

std::vector<std::uint8_t> serialize_denoiser(const Denoiser& d) {
  const auto& c = d.config();
  ByteWriter w;
  w.raw("ABDN");
  w.u16(kCheckpointVersion);
  for (std::size_t v : {c.channels, c.width, c.cond_dim, c.time_features, c.attn_dim}) {
    w.u32(static_cast<std::uint32_t>(v));
  }
  for (const auto& p : d.parameters()) w.values(p.value.value().data());
  return w.bytes();
}

Denoiser deserialize_denoiser(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  if (bytes.size() < 4 || r.raw(4) != "ABDN") throw BadMagicError("not a denoiser checkpoint (bad magic)");
  const std::uint16_t version = r.u16();
  if (version != kCheckpointVersion) {
    throw VersionError("unsupported checkpoint version " + std::to_string(version) + " (expected " +
                       std::to_string(kCheckpointVersion) + ")");
  }
  DenoiserConfig c;
  c.channels = r.u32();
  c.width = r.u32();
  c.cond_dim = r.u32();
  c.time_features = r.u32();
  c.attn_dim = r.u32();
  try {
    c.validate();
  } catch (const ConfigError& e) {
    throw FormatError(std::string("checkpoint config invalid: ") + e.what());
  }
  ParameterSet params;
  for (const auto& spec : param_specs(c)) params.add(spec.name, r.tensor(spec.shape));
  if (r.remaining() != 0) throw FormatError("trailing bytes after checkpoint parameters");
  return Denoiser(c, std::move(params));
}

void save_denoiser(const Denoiser& d, const std::filesystem::path& path) {
  write_file_bytes(path, serialize_denoiser(d));
}

Denoiser load_denoiser(const std::filesystem::path& path) { return deserialize_denoiser(read_file_bytes(path)); }

}  // namespace artbank

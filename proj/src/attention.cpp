#include "artbank/attention.hpp"

#include <cmath>
#include <string>

#include "artbank/errors.hpp"
#include "artbank/ops.hpp"

namespace artbank {

namespace {

template <class F>
Var named_step(const char* encoder, const char* step, F&& f) {
  try {
    return f();
  } catch (const NumericError& e) {
    throw NumericError(std::string(encoder) + " step '" + step + "': " + e.what());
  }
}

void require_square(const Var& w, std::size_t channels, const char* name) {
  if (w.shape() != Shape{channels, channels}) {
    throw DimensionError(std::string(name) + " must be " + std::to_string(channels) + "x" + std::to_string(channels) +
                         ", got " + shape_str(w.shape()));
  }
}

void require_style_matrix(const Var& i_m) {
  if (i_m.value().rank() != 2) throw DimensionError("style matrix must be C x N, got " + shape_str(i_m.shape()));
}

// Attention-weighted mean and standard deviation of V under `weights`, used as
// shift and scale of the normalized style matrix.
Var modulate(const char* encoder, const Var& i_m, const Var& v, const Var& weights, double eps, SsamTrace* trace) {
  const Var weights_t = transpose(weights);
  const Var mean = named_step(encoder, "mean", [&] { return matmul(v, weights_t); });
  const Var stddev = named_step(encoder, "stddev", [&] {
    const Var second = matmul(mul(v, v), weights_t);
    const Var var = sub(second, mul(mean, mean));
    return sqrt(add_scalar(clamp_min(var, 0.0), eps));
  });
  const Var out = named_step(encoder, "modulate", [&] { return add(mul(stddev, channel_norm(i_m, eps)), mean); });
  if (trace) {
    trace->weighted_attention = weights.value();
    trace->mean = mean.value();
    trace->stddev = stddev.value();
  }
  return out;
}

Var self_attention_map(const char* encoder, const Var& q, const Var& k) {
  return named_step(encoder, "attention", [&] { return softmax_rows(matmul(transpose(q), k)); });
}

Tensor uniform_square(std::size_t channels, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(channels));
  return rng.uniform_tensor({channels, channels}, -bound, bound);
}

}  // namespace

void SsamParams::validate(std::size_t c, std::size_t n) const {
  const Shape square{c, c};
  if (w_q.shape() != square || w_k.shape() != square || w_v.shape() != square) {
    throw DimensionError("ssam projections must be " + shape_str(square));
  }
  if (w_col.shape() != Shape{n, 1}) throw DimensionError("w_col must be " + shape_str({n, 1}));
  if (w_row.shape() != Shape{1, n}) throw DimensionError("w_row must be " + shape_str({1, n}));
  if (!std::isfinite(alpha)) throw NumericError("ssam alpha is not finite");
}

SsamParams init_ssam_params(std::size_t channels, std::size_t positions, Rng& rng) {
  SsamParams p;
  p.w_q = uniform_square(channels, rng);
  p.w_k = uniform_square(channels, rng);
  p.w_v = uniform_square(channels, rng);
  p.w_col = Tensor({positions, 1}, 1.0);
  p.w_row = Tensor({1, positions}, 1.0);
  p.alpha = 0.5;
  return p;
}

SsamVars constant_vars(const SsamParams& p) {
  return {Var::constant(p.w_q),   Var::constant(p.w_k),   Var::constant(p.w_v),
          Var::constant(p.w_col), Var::constant(p.w_row), Var::constant(Tensor({1, 1}, p.alpha))};
}

Var ssam_forward(const Var& i_m, const SsamVars& p, double eps, SsamTrace* trace) {
  require_style_matrix(i_m);
  const std::size_t c = i_m.value().rows(), n = i_m.value().cols();
  require_square(p.w_q, c, "w_q");
  require_square(p.w_k, c, "w_k");
  require_square(p.w_v, c, "w_v");
  if (p.w_col.shape() != Shape{n, 1} || p.w_row.shape() != Shape{1, n}) {
    throw DimensionError("w_col/w_row must be " + shape_str({n, 1}) + "/" + shape_str({1, n}));
  }
  if (p.alpha.value().size() != 1) throw DimensionError("alpha must be a scalar");

  const Var q = matmul(p.w_q, i_m);
  const Var k = matmul(p.w_k, i_m);
  const Var v = matmul(p.w_v, i_m);
  const Var a = self_attention_map("ssam", q, k);
  const Var weighted = named_step("ssam", "spatial weighting", [&] {
    const Var by_col = mul_rows(a, p.w_col);
    const Var by_row = mul_cols(a, p.w_row);
    return mix(by_col, by_row, p.alpha);
  });
  if (trace) trace->attention = a.value();
  return modulate("ssam", i_m, v, weighted, eps, trace);
}

Tensor ssam_forward(const Tensor& i_m, const SsamParams& p, double eps, SsamTrace* trace) {
  p.validate(i_m.rows(), i_m.cols());
  return ssam_forward(Var::constant(i_m), constant_vars(p), eps, trace).value();
}

Var adaattn_forward(const Var& i_m, const Var& w_q, const Var& w_k, const Var& w_v, double eps, SsamTrace* trace) {
  require_style_matrix(i_m);
  const std::size_t c = i_m.value().rows();
  require_square(w_q, c, "w_q");
  require_square(w_k, c, "w_k");
  require_square(w_v, c, "w_v");
  const Var a = self_attention_map("adaattn", matmul(w_q, i_m), matmul(w_k, i_m));
  if (trace) trace->attention = a.value();
  return modulate("adaattn", i_m, matmul(w_v, i_m), a, eps, trace);
}

Tensor adaattn_forward(const Tensor& i_m, const Tensor& w_q, const Tensor& w_k, const Tensor& w_v, double eps) {
  return adaattn_forward(Var::constant(i_m), Var::constant(w_q), Var::constant(w_k), Var::constant(w_v), eps)
      .value();
}

Var sanet_forward(const Var& i_m, const Var& w_q, const Var& w_k, const Var& w_v, const Var& w_o, double eps) {
  require_style_matrix(i_m);
  const std::size_t c = i_m.value().rows();
  require_square(w_q, c, "w_q");
  require_square(w_k, c, "w_k");
  require_square(w_v, c, "w_v");
  require_square(w_o, c, "w_o");
  const Var normed = named_step("sanet", "normalize", [&] { return channel_norm(i_m, eps); });
  const Var a = self_attention_map("sanet", matmul(w_q, normed), matmul(w_k, normed));
  return named_step("sanet", "residual", [&] {
    const Var attended = matmul(matmul(w_v, i_m), transpose(a));
    return add(i_m, matmul(w_o, attended));
  });
}

Tensor sanet_forward(const Tensor& i_m, const Tensor& w_q, const Tensor& w_k, const Tensor& w_v, const Tensor& w_o,
                     double eps) {
  return sanet_forward(Var::constant(i_m), Var::constant(w_q), Var::constant(w_k), Var::constant(w_v),
                       Var::constant(w_o), eps)
      .value();
}

std::string_view to_string(AttentionVariant v) {
  switch (v) {
    case AttentionVariant::ssam:
      return "ssam";
    case AttentionVariant::sanet:
      return "sanet";
    case AttentionVariant::adaattn:
      return "adaattn";
  }
  return "unknown";
}

AttentionVariant parse_attention_variant(std::string_view name) {
  if (name == "ssam") return AttentionVariant::ssam;
  if (name == "sanet") return AttentionVariant::sanet;
  if (name == "adaattn") return AttentionVariant::adaattn;
  throw ConfigError("unknown attention variant '" + std::string(name) + "' (expected ssam, sanet or adaattn)");
}

Tensor init_style_matrix(std::size_t channels, std::size_t positions, std::uint64_t seed) {
  if (channels == 0 || positions == 0) throw ConfigError("style matrix dimensions must be positive");
  Rng rng(derive_seed(seed, "i_m"));
  return rng.normal_tensor({channels, positions}, 0.02);
}

StyleEncoder::StyleEncoder(AttentionVariant variant, ParameterSet params)
    : variant_(variant), params_(std::move(params)) {
  const Var i_m = params_.get("i_m");
  require_style_matrix(i_m);
  const std::size_t c = i_m.value().rows(), n = i_m.value().cols();
  require_square(params_.get("w_q"), c, "w_q");
  require_square(params_.get("w_k"), c, "w_k");
  require_square(params_.get("w_v"), c, "w_v");
  switch (variant_) {
    case AttentionVariant::ssam:
      if (params_.get("w_col").shape() != Shape{n, 1} || params_.get("w_row").shape() != Shape{1, n} ||
          params_.get("alpha").value().size() != 1) {
        throw DimensionError("ssam encoder parameters inconsistent with style matrix " + shape_str(i_m.shape()));
      }
      break;
    case AttentionVariant::sanet:
      require_square(params_.get("w_o"), c, "w_o");
      break;
    case AttentionVariant::adaattn:
      break;
  }
}

StyleEncoder StyleEncoder::initialize(AttentionVariant variant, std::size_t channels, std::size_t positions,
                                      std::uint64_t seed) {
  ParameterSet params;
  params.add("i_m", init_style_matrix(channels, positions, seed));
  Rng rng(derive_seed(seed, "attention"));
  params.add("w_q", uniform_square(channels, rng));
  params.add("w_k", uniform_square(channels, rng));
  params.add("w_v", uniform_square(channels, rng));
  switch (variant) {
    case AttentionVariant::ssam:
      params.add("w_col", Tensor({positions, 1}, 1.0));
      params.add("w_row", Tensor({1, positions}, 1.0));
      params.add("alpha", Tensor({1, 1}, 0.5));
      break;
    case AttentionVariant::sanet:
      params.add("w_o", uniform_square(channels, rng));
      break;
    case AttentionVariant::adaattn:
      break;
  }
  return StyleEncoder(variant, std::move(params));
}

StyleEncoder StyleEncoder::from_ssam(const Tensor& i_m, const SsamParams& p) {
  p.validate(i_m.rows(), i_m.cols());
  ParameterSet params;
  params.add("i_m", i_m);
  params.add("w_q", p.w_q);
  params.add("w_k", p.w_k);
  params.add("w_v", p.w_v);
  params.add("w_col", p.w_col);
  params.add("w_row", p.w_row);
  params.add("alpha", Tensor({1, 1}, p.alpha));
  return StyleEncoder(AttentionVariant::ssam, std::move(params));
}

std::size_t StyleEncoder::channels() const { return params_.get("i_m").value().rows(); }
std::size_t StyleEncoder::positions() const { return params_.get("i_m").value().cols(); }

Var StyleEncoder::encode(double eps) const {
  const Var i_m = params_.get("i_m");
  switch (variant_) {
    case AttentionVariant::ssam:
      return ssam_forward(i_m,
                          {params_.get("w_q"), params_.get("w_k"), params_.get("w_v"), params_.get("w_col"),
                           params_.get("w_row"), params_.get("alpha")},
                          eps);
    case AttentionVariant::sanet:
      return sanet_forward(i_m, params_.get("w_q"), params_.get("w_k"), params_.get("w_v"), params_.get("w_o"), eps);
    case AttentionVariant::adaattn:
      return adaattn_forward(i_m, params_.get("w_q"), params_.get("w_k"), params_.get("w_v"), eps);
  }
  throw ContractError("unreachable attention variant");
}

SsamParams StyleEncoder::ssam_params() const {
  if (variant_ != AttentionVariant::ssam) throw ContractError("ssam_params() on a non-ssam encoder");
  SsamParams p;
  p.w_q = params_.get("w_q").value();
  p.w_k = params_.get("w_k").value();
  p.w_v = params_.get("w_v").value();
  p.w_col = params_.get("w_col").value();
  p.w_row = params_.get("w_row").value();
  p.alpha = params_.get("alpha").value()[0];
  return p;
}

}  // namespace artbank

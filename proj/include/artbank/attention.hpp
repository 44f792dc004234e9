#pragma once

#include <cstdint>
#include <string_view>

#include "artbank/autograd.hpp"
#include "artbank/rng.hpp"

namespace artbank {

// Learnable pieces of the spatial-statistical self-attention encoder for a
// C x N style matrix. w_q/w_k/w_v are 1x1 convolutions (C x C), w_col is
// N x 1 and scales attention rows, w_row is 1 x N and scales attention columns.
struct SsamParams {
  Tensor w_q;
  Tensor w_k;
  Tensor w_v;
  Tensor w_col;
  Tensor w_row;
  double alpha = 0.5;

  std::size_t channels() const { return w_q.rows(); }
  std::size_t positions() const { return w_col.rows(); }
  // Throws DimensionError unless every field agrees with (channels, positions).
  void validate(std::size_t channels, std::size_t positions) const;
};

// Projections ~ U(-1/sqrt(C), 1/sqrt(C)); w_col = w_row = 1; alpha = 0.5.
SsamParams init_ssam_params(std::size_t channels, std::size_t positions, Rng& rng);

// Differentiable view of SsamParams; alpha is a 1x1 Var.
struct SsamVars {
  Var w_q, w_k, w_v, w_col, w_row, alpha;
};
SsamVars constant_vars(const SsamParams& p);

// Optional capture of the intermediate maps, for tests and diagnostics.
struct SsamTrace {
  Tensor attention;           // A, N x N
  Tensor weighted_attention;  // A-hat, N x N
  Tensor mean;                // M-hat, C x N
  Tensor stddev;              // S-hat, C x N
};

Var ssam_forward(const Var& i_m, const SsamVars& p, double eps = 1e-8, SsamTrace* trace = nullptr);
Tensor ssam_forward(const Tensor& i_m, const SsamParams& p, double eps = 1e-8, SsamTrace* trace = nullptr);

// ssam_forward with the weighted map replaced by the plain attention map.
Var adaattn_forward(const Var& i_m, const Var& w_q, const Var& w_k, const Var& w_v, double eps = 1e-8,
                    SsamTrace* trace = nullptr);
Tensor adaattn_forward(const Tensor& i_m, const Tensor& w_q, const Tensor& w_k, const Tensor& w_v,
                       double eps = 1e-8);

// Residual attention: i_m + w_o (V A^T), with queries/keys from the normalized input.
Var sanet_forward(const Var& i_m, const Var& w_q, const Var& w_k, const Var& w_v, const Var& w_o,
                  double eps = 1e-8);
Tensor sanet_forward(const Tensor& i_m, const Tensor& w_q, const Tensor& w_k, const Tensor& w_v,
                     const Tensor& w_o, double eps = 1e-8);

enum class AttentionVariant { ssam, sanet, adaattn };

std::string_view to_string(AttentionVariant v);
// Throws ConfigError on unknown names.
AttentionVariant parse_attention_variant(std::string_view name);

// A trainable style matrix together with the parameters of one encoder variant.
// Parameter names: "i_m" plus "w_q", "w_k", "w_v" and, per variant,
// "w_col", "w_row", "alpha" (ssam) or "w_o" (sanet).
class StyleEncoder {
 public:
  StyleEncoder(AttentionVariant variant, ParameterSet params);

  // i_m ~ N(0, 0.02) and projections drawn from streams derived from `seed`,
  // so every variant starts from the same i_m for a given seed.
  static StyleEncoder initialize(AttentionVariant variant, std::size_t channels, std::size_t positions,
                                 std::uint64_t seed);
  static StyleEncoder from_ssam(const Tensor& i_m, const SsamParams& params);

  AttentionVariant variant() const noexcept { return variant_; }
  const ParameterSet& parameters() const noexcept { return params_; }
  std::size_t channels() const;
  std::size_t positions() const;

  // v_m, C x N.
  Var encode(double eps = 1e-8) const;
  // Requires variant() == ssam.
  SsamParams ssam_params() const;
  Tensor style_matrix() const { return params_.get("i_m").value(); }

 private:
  AttentionVariant variant_;
  ParameterSet params_;
};

// Style matrix initialization shared by bank entries and encoders.
Tensor init_style_matrix(std::size_t channels, std::size_t positions, std::uint64_t seed);

}  // namespace artbank

#include "artbank/inversion.hpp"

#include <algorithm>
#include <cmath>

#include "artbank/errors.hpp"

namespace artbank {

void InversionConfig::validate() const {
  if (!(strength > 0.0 && strength <= 1.0)) {
    throw ConfigError("inversion strength " + std::to_string(strength) + " outside (0, 1]");
  }
}

int inversion_timestep(double strength, const NoiseSchedule& sched) {
  InversionConfig{strength, 0}.validate();
  const auto t = static_cast<int>(std::lround(strength * sched.T));
  return std::clamp(t, 1, sched.T);
}

Tensor probe_noise(const Shape& shape, std::uint64_t seed) { return Rng(derive_seed(seed, "probe")).normal_tensor(shape); }

InversionResult stochastic_invert(const NoisePredictor& predict, const NoiseSchedule& sched, const Tensor& content,
                                  const InversionConfig& cfg) {
  cfg.validate();
  const int t0 = inversion_timestep(cfg.strength, sched);
  const auto state = q_sample(content, t0, probe_noise(content.shape(), cfg.seed), sched);
  Tensor eps = predict(state.z, t0);
  if (eps.shape() != content.shape()) throw DimensionError("stochastic_invert: predictor shape mismatch");
  return {std::move(eps), t0};
}

InversionResult stochastic_invert(const Denoiser& d, const NoiseSchedule& sched, const ImageSample& content,
                                  const InversionConfig& cfg, const ConditionVector& text_cond) {
  if (!d.frozen()) throw ContractError("stochastic_invert requires a frozen denoiser");
  return stochastic_invert(predictor_for(d, text_cond), sched, to_tensor(content), cfg);
}

Tensor stylize_tensor(const NoisePredictor& text_predict, const NoisePredictor& style_predict,
                      const NoiseSchedule& sched, const Tensor& content, const InversionConfig& cfg,
                      StartNoise start) {
  cfg.validate();
  int t0 = 0;
  Tensor eps;
  if (start == StartNoise::inversion) {
    auto inv = stochastic_invert(text_predict, sched, content, cfg);
    t0 = inv.t0;
    eps = std::move(inv.eps_pred);
  } else {
    t0 = inversion_timestep(cfg.strength, sched);
    eps = probe_noise(content.shape(), cfg.seed);
  }
  SampleInit init;
  init.start_step = t0;
  init.z = q_sample(content, t0, eps, sched).z;
  init.seed = cfg.seed;
  return sample_tensor(style_predict, sched, SampleMode::ddim, init, content.shape());
}

ImageSample stylize(const Denoiser& d, const NoiseSchedule& sched, const StyleBankEntry& entry,
                    const ImageSample& content, const InversionConfig& cfg, std::uint64_t vocab_seed,
                    StartNoise start) {
  const TokenEmbeddingSeq prompt = entry_prompt(entry, vocab_seed);
  if (prompt.width() != d.config().cond_dim) {
    throw DimensionError("bank entry '" + entry.style_id + "' has width " + std::to_string(prompt.width()) +
                         " but the denoiser expects " + std::to_string(d.config().cond_dim));
  }
  if (content.channels != d.config().channels) {
    throw DimensionError("content image has " + std::to_string(content.channels) + " channels, denoiser expects " +
                         std::to_string(d.config().channels));
  }
  const Tensor v_m = ssam_forward(entry.i_m, entry.ssam);
  const auto text_predict = predictor_for(d, text_condition(prompt));
  const auto style_predict = predictor_for(d, assemble_condition(prompt, Var::constant(v_m)));
  return from_tensor(stylize_tensor(text_predict, style_predict, sched, to_tensor(content), cfg, start));
}

ImageSample stylize(const Denoiser& d, const NoiseSchedule& sched, const StyleBank& bank, std::string_view style_id,
                    const ImageSample& content, const InversionConfig& cfg, std::uint64_t vocab_seed,
                    StartNoise start) {
  return stylize(d, sched, bank.at(style_id), content, cfg, vocab_seed, start);
}

}  // namespace artbank

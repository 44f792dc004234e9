#pragma once

#include <cstdint>
#include <string_view>

#include "artbank/diffusion.hpp"

namespace artbank {

struct InversionConfig {
  double strength = 0.6;  // fraction of the schedule, in (0, 1]
  std::uint64_t seed = 0;

  void validate() const;
};

// round(strength * T) clamped to [1, T].
int inversion_timestep(double strength, const NoiseSchedule& sched);

// Probe noise drawn from `seed`.
Tensor probe_noise(const Shape& shape, std::uint64_t seed);

struct InversionResult {
  Tensor eps_pred;
  int t0 = 1;
};

// Noises `content` to t0 with the probe noise and predicts that noise.
InversionResult stochastic_invert(const NoisePredictor& predict, const NoiseSchedule& sched, const Tensor& content,
                                  const InversionConfig& cfg);
// Same with a frozen denoiser under the text-only condition `text_cond`.
InversionResult stochastic_invert(const Denoiser& d, const NoiseSchedule& sched, const ImageSample& content,
                                  const InversionConfig& cfg, const ConditionVector& text_cond);

// Where the start state's noise comes from. `random` substitutes the probe
// noise itself for the prediction (ablation at equal strength).
enum class StartNoise { inversion, random };

// z_t0 = sqrt(alpha_bar[t0]) content + sqrt(1 - alpha_bar[t0]) eps, then DDIM t0 -> 0.
Tensor stylize_tensor(const NoisePredictor& text_predict, const NoisePredictor& style_predict,
                      const NoiseSchedule& sched, const Tensor& content, const InversionConfig& cfg,
                      StartNoise start = StartNoise::inversion);

// Stylizes `content` with a bank entry. Throws NotFoundError on an unknown id.
ImageSample stylize(const Denoiser& d, const NoiseSchedule& sched, const StyleBank& bank, std::string_view style_id,
                    const ImageSample& content, const InversionConfig& cfg,
                    std::uint64_t vocab_seed = kDefaultVocabSeed, StartNoise start = StartNoise::inversion);
ImageSample stylize(const Denoiser& d, const NoiseSchedule& sched, const StyleBankEntry& entry,
                    const ImageSample& content, const InversionConfig& cfg,
                    std::uint64_t vocab_seed = kDefaultVocabSeed, StartNoise start = StartNoise::inversion);

}  // namespace artbank

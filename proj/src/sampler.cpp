#include <algorithm>
#include <cmath>

#include "artbank/diffusion.hpp"
#include "artbank/errors.hpp"

namespace artbank {

std::string_view to_string(SampleMode m) { return m == SampleMode::ddpm ? "ddpm" : "ddim"; }

SampleMode parse_sample_mode(std::string_view name) {
  if (name == "ddpm") return SampleMode::ddpm;
  if (name == "ddim") return SampleMode::ddim;
  throw ConfigError("unknown sample mode '" + std::string(name) + "' (expected ddpm or ddim)");
}

NoisePredictor predictor_for(const Denoiser& d, ConditionVector cond) {
  return [&d, cond = std::move(cond)](const Tensor& z, int t) { return d.predict(z, t, cond); };
}

Tensor sample_tensor(const NoisePredictor& predict, const NoiseSchedule& sched, SampleMode mode,
                     const SampleInit& init, const Shape& shape) {
  const int start = init.start_step == 0 ? sched.T : init.start_step;
  sched.check_step(start);
  Rng rng(derive_seed(init.seed, "sampler"));
  Tensor z = init.z ? *init.z : Rng(derive_seed(init.seed, "initial")).normal_tensor(shape);
  if (z.shape() != shape) throw DimensionError("sample: initial state " + shape_str(z.shape()) + " vs " + shape_str(shape));

  for (int t = start; t >= 1; --t) {
    const Tensor eps = predict(z, t);
    if (eps.shape() != z.shape()) throw DimensionError("sample: predictor returned " + shape_str(eps.shape()));
    const double ab = sched.alpha_bar[t];
    const double ab_prev = sched.alpha_bar[t - 1];
    const double sa = std::sqrt(ab), sb = std::sqrt(1.0 - ab);
    Tensor next(z.shape());
    if (mode == SampleMode::ddim) {
      const double sa_prev = std::sqrt(ab_prev), sb_prev = std::sqrt(1.0 - ab_prev);
      for (std::size_t i = 0; i < z.size(); ++i) {
        const double x0 = (z[i] - sb * eps[i]) / sa;
        next[i] = sa_prev * x0 + sb_prev * eps[i];
      }
    } else {
      // Ancestral step through the posterior q(z_{t-1} | z_t, x0) with x0 kept in range.
      const double beta = sched.beta[t];
      const double c0 = std::sqrt(ab_prev) * beta / (1.0 - ab);
      const double ct = std::sqrt(sched.alpha[t]) * (1.0 - ab_prev) / (1.0 - ab);
      const double sigma = std::sqrt(beta * (1.0 - ab_prev) / (1.0 - ab));
      for (std::size_t i = 0; i < z.size(); ++i) {
        const double x0 = std::clamp((z[i] - sb * eps[i]) / sa, 0.0, 1.0);
        next[i] = c0 * x0 + ct * z[i];
        if (t > 1) next[i] += sigma * rng.normal();
      }
    }
    if (!next.all_finite()) throw NumericError("sample: non-finite state at step " + std::to_string(t));
    z = std::move(next);
  }
  return z;
}

ImageSample sample(const Denoiser& d, const NoiseSchedule& sched, const ConditionVector& cond, SampleMode mode,
                   const SampleInit& init, std::size_t size) {
  const Shape shape{d.config().channels, size, size};
  return from_tensor(sample_tensor(predictor_for(d, cond), sched, mode, init, shape));
}

}  // namespace artbank

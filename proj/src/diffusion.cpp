#include "artbank/diffusion.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "artbank/errors.hpp"
#include "artbank/ops.hpp"

namespace artbank {

void NoiseSchedule::check_step(int t, bool allow_zero) const {
  if (t < (allow_zero ? 0 : 1) || t > T) {
    throw ConfigError("timestep " + std::to_string(t) + " outside [" + (allow_zero ? "0" : "1") + ", " +
                      std::to_string(T) + "]");
  }
}

NoiseSchedule make_schedule(int steps, double beta_start, double beta_end) {
  if (steps < 1) throw ConfigError("schedule needs at least one step");
  if (!(beta_start > 0.0 && beta_start <= beta_end && beta_end < 1.0)) {
    throw ConfigError("schedule requires 0 < beta_start <= beta_end < 1");
  }
  NoiseSchedule s;
  s.T = steps;
  s.beta.assign(steps + 1, 0.0);
  s.alpha.assign(steps + 1, 1.0);
  s.alpha_bar.assign(steps + 1, 1.0);
  for (int t = 1; t <= steps; ++t) {
    const double frac = steps == 1 ? 0.0 : static_cast<double>(t - 1) / static_cast<double>(steps - 1);
    s.beta[t] = beta_start + (beta_end - beta_start) * frac;
    s.alpha[t] = 1.0 - s.beta[t];
    s.alpha_bar[t] = s.alpha_bar[t - 1] * s.alpha[t];
  }
  return s;
}

LatentState q_sample(const Tensor& z0, int t, const Tensor& eps, const NoiseSchedule& sched) {
  sched.check_step(t);
  if (z0.shape() != eps.shape()) {
    throw DimensionError("q_sample: noise " + shape_str(eps.shape()) + " vs image " + shape_str(z0.shape()));
  }
  const double a = std::sqrt(sched.alpha_bar[t]);
  const double b = std::sqrt(1.0 - sched.alpha_bar[t]);
  Tensor z(z0.shape());
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = a * z0[i] + b * eps[i];
  if (!z.all_finite()) throw NumericError("q_sample: non-finite state");
  return {std::move(z), t};
}

double LossTrace::moving_average(std::size_t step, std::size_t window) const {
  if (step >= losses.size() || window == 0) throw ConfigError("moving_average: step or window out of range");
  const std::size_t first = step + 1 >= window ? step + 1 - window : 0;
  double s = 0.0;
  for (std::size_t i = first; i <= step; ++i) s += losses[i];
  return s / static_cast<double>(step + 1 - first);
}

std::string LossTrace::to_csv() const {
  std::ostringstream out;
  out.precision(17);
  out << "step,loss\n";
  for (std::size_t i = 0; i < losses.size(); ++i) out << i + 1 << ',' << losses[i] << '\n';
  return out.str();
}

void LossTrace::write_csv(const std::filesystem::path& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write '" + path.string() + "'");
  f << to_csv();
}

DrawStream::DrawStream(std::uint64_t seed, std::size_t image_count, const Shape& image_shape, int steps_T)
    : rng_(derive_seed(seed, "draws")), count_(image_count), shape_(image_shape), steps_T_(steps_T) {
  if (image_count == 0) throw ConfigError("training set is empty");
}

Draw DrawStream::next() {
  Draw d;
  d.image = rng_.index(count_);
  d.t = 1 + static_cast<int>(rng_.index(static_cast<std::size_t>(steps_T_)));
  d.eps = rng_.normal_tensor(shape_);
  return d;
}

namespace {

void check_images(const std::vector<Tensor>& images, const Denoiser& d) {
  if (images.empty()) throw ConfigError("training set is empty");
  const Shape& shape = images.front().shape();
  if (shape.size() != 3 || shape[0] != d.config().channels) {
    throw DimensionError("training image " + shape_str(shape) + " does not match denoiser channels " +
                         std::to_string(d.config().channels));
  }
  for (const auto& img : images) {
    if (img.shape() != shape) throw DimensionError("training images differ in shape");
  }
}

}  // namespace

LossTrace train_naive(Denoiser& d, const std::vector<Tensor>& images, const std::vector<ConditionVector>& conditions,
                      const NoiseSchedule& sched, const TrainConfig& cfg) {
  check_images(images, d);
  if (d.frozen()) throw ContractError("train_naive needs a trainable denoiser");
  if (conditions.size() != 1 && conditions.size() != images.size()) {
    throw ConfigError("train_naive expects one condition per image or a single shared condition");
  }
  if (cfg.steps < 0) throw ConfigError("steps must be >= 0");
  DrawStream stream(cfg.seed, images.size(), images.front().shape(), sched.T);
  Adam adam(cfg.adam);
  LossTrace trace;
  trace.losses.reserve(static_cast<std::size_t>(cfg.steps));
  for (int step = 0; step < cfg.steps; ++step) {
    const Draw draw = stream.next();
    const auto state = q_sample(images[draw.image], draw.t, draw.eps, sched);
    const ConditionVector& cond = conditions.size() == 1 ? conditions.front() : conditions[draw.image];
    const Var loss = mse(d.forward(Var::constant(state.z), state.t, cond), draw.eps);
    loss.backward();
    adam.step(d.parameters());
    d.parameters().zero_grad();
    trace.losses.push_back(loss.value().item());
  }
  return trace;
}

Var encoder_loss(const Denoiser& d, const StyleEncoder& encoder, const TokenEmbeddingSeq& prompt, const Tensor& z0,
                 const Draw& draw, const NoiseSchedule& sched) {
  const auto state = q_sample(z0, draw.t, draw.eps, sched);
  const ConditionVector cond = assemble_condition(prompt, encoder.encode());
  return mse(d.forward(Var::constant(state.z), state.t, cond), draw.eps);
}

LossTrace train_encoder(const Denoiser& d, StyleEncoder& encoder, const TokenEmbeddingSeq& prompt,
                        const std::vector<Tensor>& images, const NoiseSchedule& sched, const TrainConfig& cfg,
                        const StepCallback& on_step) {
  if (!d.frozen()) throw ContractError("encoder training requires a frozen denoiser");
  check_images(images, d);
  if (prompt.width() != d.config().cond_dim || encoder.channels() != d.config().cond_dim) {
    throw DimensionError("encoder width " + std::to_string(encoder.channels()) + " / prompt width " +
                         std::to_string(prompt.width()) + " vs denoiser condition width " +
                         std::to_string(d.config().cond_dim));
  }
  if (cfg.steps < 0) throw ConfigError("steps must be >= 0");
  DrawStream stream(cfg.seed, images.size(), images.front().shape(), sched.T);
  Adam adam(cfg.adam);
  LossTrace trace;
  for (int step = 0; step < cfg.steps; ++step) {
    const Draw draw = stream.next();
    const Var loss = encoder_loss(d, encoder, prompt, images[draw.image], draw, sched);
    loss.backward();
    adam.step(encoder.parameters());
    encoder.parameters().zero_grad();
    trace.losses.push_back(loss.value().item());
    if (on_step && on_step(step, trace.losses.back())) break;
  }
  return trace;
}

LossTrace train_ispb(const Denoiser& d, StyleBankEntry& entry, const std::vector<Tensor>& images,
                     const NoiseSchedule& sched, const TrainConfig& cfg, std::uint64_t vocab_seed) {
  if (!d.frozen()) throw ContractError("train_ispb requires a frozen denoiser");
  StyleEncoder encoder = encoder_for(entry);
  const LossTrace trace = train_encoder(d, encoder, entry_prompt(entry, vocab_seed), images, sched, cfg);
  store_encoder(entry, encoder);
  return trace;
}

}  // namespace artbank

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "artbank/bank.hpp"
#include "artbank/data_io.hpp"
#include "artbank/optimizer.hpp"

namespace artbank {

// Linear-beta schedule. Arrays are indexed 0..T with alpha_bar[0] = 1.
struct NoiseSchedule {
  int T = 0;
  std::vector<double> beta;
  std::vector<double> alpha;
  std::vector<double> alpha_bar;

  // Throws ConfigError unless 1 <= t <= T (or 0 <= t when allow_zero).
  void check_step(int t, bool allow_zero = false) const;
};

NoiseSchedule make_schedule(int steps = 100, double beta_start = 1e-4, double beta_end = 0.02);

struct LatentState {
  Tensor z;  // [ch, H, W]
  int t = 0;
};

// z_t = sqrt(alpha_bar[t]) z0 + sqrt(1 - alpha_bar[t]) eps.
LatentState q_sample(const Tensor& z0, int t, const Tensor& eps, const NoiseSchedule& sched);

struct DenoiserConfig {
  std::size_t channels = 3;        // image channels
  std::size_t width = 32;          // feature channels
  std::size_t cond_dim = kDefaultStyleChannels;
  std::size_t time_features = 16;  // sinusoidal features of t
  std::size_t attn_dim = 32;

  void validate() const;
  bool operator==(const DenoiserConfig&) const = default;
};

// Sinusoidal embedding of t, time_features x 1.
Tensor time_features(int t, std::size_t count);

// Conditional eps-predictor: conv_in (+ time bias) -> stride-2 conv_down ->
// cross-attention at half resolution -> upsample, conv_up (+ skip) -> conv_out.
// Output head is zero-initialized, so a fresh model predicts 0.
class Denoiser {
 public:
  Denoiser(DenoiserConfig config, std::uint64_t seed);
  Denoiser(DenoiserConfig config, ParameterSet params);
  static Denoiser zeros(DenoiserConfig config);

  const DenoiserConfig& config() const noexcept { return config_; }
  const ParameterSet& parameters() const noexcept { return params_; }

  // z: [channels, H, W] with even H and W. Rows of `cond` attend as keys/values;
  // an empty condition skips the attention block.
  Var forward(const Var& z, int t, const ConditionVector& cond) const;
  Tensor predict(const Tensor& z, int t, const ConditionVector& cond) const;

  // Frozen parameters carry no gradient buffers.
  void freeze();
  void unfreeze();
  bool frozen() const;

  Denoiser clone() const;

 private:
  DenoiserConfig config_;
  ParameterSet params_;
};

// Checkpoint: "ABDN", u16 version, u32 config ints, then every parameter's
// float64 values in definition order. Little-endian throughout.
inline constexpr std::uint16_t kCheckpointVersion = 1;
std::vector<std::uint8_t> serialize_denoiser(const Denoiser& d);
Denoiser deserialize_denoiser(std::span<const std::uint8_t> bytes);
void save_denoiser(const Denoiser& d, const std::filesystem::path& path);
Denoiser load_denoiser(const std::filesystem::path& path);

struct LossTrace {
  std::vector<double> losses;  // one per step

  // Mean of the trailing `window` losses ending at `step` (0-based, inclusive).
  double moving_average(std::size_t step, std::size_t window) const;
  std::string to_csv() const;
  void write_csv(const std::filesystem::path& path) const;
};

struct TrainConfig {
  int steps = 2000;
  std::uint64_t seed = 0;
  AdamConfig adam{};
};

// One training draw: image index, timestep in 1..T and unit-normal noise.
struct Draw {
  std::size_t image = 0;
  int t = 1;
  Tensor eps;
};

// The per-step draw sequence used by the trainers, reproducible from the seed.
class DrawStream {
 public:
  DrawStream(std::uint64_t seed, std::size_t image_count, const Shape& image_shape, int steps_T);
  Draw next();

 private:
  Rng rng_;
  std::size_t count_;
  Shape shape_;
  int steps_T_;
};

// Returns true to stop training early.
using StepCallback = std::function<bool(int step, double loss)>;

// Trains every denoiser parameter on ||eps - eps_theta(z_t, t, c)||^2.
// `conditions` holds one text condition per image, or a single shared one.
LossTrace train_naive(Denoiser& d, const std::vector<Tensor>& images, const std::vector<ConditionVector>& conditions,
                      const NoiseSchedule& sched, const TrainConfig& cfg);

// Trains only the encoder (style matrix and attention parameters); the denoiser
// must be frozen. Gradients reach the encoder through the condition rows.
LossTrace train_encoder(const Denoiser& d, StyleEncoder& encoder, const TokenEmbeddingSeq& prompt,
                        const std::vector<Tensor>& images, const NoiseSchedule& sched, const TrainConfig& cfg,
                        const StepCallback& on_step = {});

// train_encoder over the entry's SSAM encoder, written back into `entry`.
LossTrace train_ispb(const Denoiser& d, StyleBankEntry& entry, const std::vector<Tensor>& images,
                     const NoiseSchedule& sched, const TrainConfig& cfg, std::uint64_t vocab_seed = kDefaultVocabSeed);

// Single-sample encoder loss for a fixed draw; used by gradient checks.
Var encoder_loss(const Denoiser& d, const StyleEncoder& encoder, const TokenEmbeddingSeq& prompt, const Tensor& z0,
                 const Draw& draw, const NoiseSchedule& sched);

// eps-prediction as a plain function of (z_t, t).
using NoisePredictor = std::function<Tensor(const Tensor& z, int t)>;
// Holds a reference to `d`, which must outlive the predictor.
NoisePredictor predictor_for(const Denoiser& d, ConditionVector cond);

enum class SampleMode { ddpm, ddim };
std::string_view to_string(SampleMode m);
SampleMode parse_sample_mode(std::string_view name);

struct SampleInit {
  int start_step = 0;        // 0 means T
  std::optional<Tensor> z;   // state at start_step; drawn from `seed` when absent
  std::uint64_t seed = 0;    // initial noise (if needed) and ddpm noise
};

// Iterates start_step -> 0. Returns the unclamped final state.
Tensor sample_tensor(const NoisePredictor& predict, const NoiseSchedule& sched, SampleMode mode,
                     const SampleInit& init, const Shape& shape);
// Sampled image, clamped into [0, 1].
ImageSample sample(const Denoiser& d, const NoiseSchedule& sched, const ConditionVector& cond, SampleMode mode,
                   const SampleInit& init, std::size_t size);

}  // namespace artbank

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "artbank/diffusion.hpp"

namespace artbank {

struct BenchmarkConfig {
  std::vector<AttentionVariant> variants{AttentionVariant::ssam, AttentionVariant::sanet};
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  double threshold_ratio = 0.85;  // relative to the initial loss
  int max_iters = 5000;
  std::size_t window = 100;  // moving-average length
  std::size_t positions = kDefaultStylePositions;
  std::string artist = "artist";
  std::string prompt_template{kDefaultPromptTemplate};
  std::uint64_t vocab_seed = kDefaultVocabSeed;
  AdamConfig adam{};
  std::size_t threads = 1;

  void validate() const;
};

struct SeedRun {
  std::uint64_t seed = 0;
  double initial_loss = 0.0;  // mean loss at initialization over the first `window` draws
  double threshold = 0.0;
  std::optional<int> iterations;  // empty when not converged within max_iters
  double final_average = 0.0;
  int steps_run = 0;
};

struct ConvergenceReport {
  AttentionVariant variant = AttentionVariant::ssam;
  double threshold_ratio = 0.0;
  std::vector<SeedRun> runs;
  // Median with non-converged runs counted as infinite; empty if that median is infinite.
  std::optional<int> median_iters;
};

// Trains one encoder per (variant, seed) against the frozen denoiser and records the
// first iteration at which the moving-average loss drops below ratio * initial loss.
std::vector<ConvergenceReport> convergence_benchmark(const Denoiser& d, const std::vector<Tensor>& collection,
                                                     const NoiseSchedule& sched, const BenchmarkConfig& cfg);

std::optional<int> median_iterations(const std::vector<SeedRun>& runs);

std::string report_csv(const std::vector<ConvergenceReport>& reports);
std::string report_table(const std::vector<ConvergenceReport>& reports);

}  // namespace artbank

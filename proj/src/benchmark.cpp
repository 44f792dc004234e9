#include "artbank/benchmark.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <iomanip>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "artbank/errors.hpp"

namespace artbank {

void BenchmarkConfig::validate() const {
  if (variants.empty()) throw ConfigError("benchmark needs at least one attention variant");
  if (seeds.size() < 3) throw ConfigError("benchmark needs at least 3 seeds");
  if (!(threshold_ratio > 0.0)) throw ConfigError("threshold ratio must be positive");
  if (max_iters < 0) throw ConfigError("max_iters must be >= 0");
  if (window == 0) throw ConfigError("moving-average window must be positive");
  if (positions == 0) throw ConfigError("positions must be positive");
}

namespace {

SeedRun run_one(const Denoiser& d, const std::vector<Tensor>& collection, const NoiseSchedule& sched,
                const BenchmarkConfig& cfg, AttentionVariant variant, std::uint64_t seed) {
  const auto prompt = encode_prompt(cfg.prompt_template, cfg.artist, cfg.vocab_seed, d.config().cond_dim);
  StyleEncoder encoder =
      StyleEncoder::initialize(variant, d.config().cond_dim, cfg.positions, derive_seed(seed, "encoder"));

  SeedRun run;
  run.seed = seed;
  {
    DrawStream probe(seed, collection.size(), collection.front().shape(), sched.T);
    double s = 0.0;
    for (std::size_t i = 0; i < cfg.window; ++i) {
      const Draw draw = probe.next();
      s += encoder_loss(d, encoder, prompt, collection[draw.image], draw, sched).value().item();
    }
    run.initial_loss = s / static_cast<double>(cfg.window);
  }
  run.threshold = cfg.threshold_ratio * run.initial_loss;

  TrainConfig tc;
  tc.steps = cfg.max_iters;
  tc.seed = seed;
  tc.adam = cfg.adam;
  LossTrace seen;
  const auto trace = train_encoder(d, encoder, prompt, collection, sched, tc, [&](int step, double loss) {
    seen.losses.push_back(loss);
    const auto n = static_cast<std::size_t>(step) + 1;
    if (n < cfg.window) return false;
    if (seen.moving_average(n - 1, cfg.window) < run.threshold) {
      run.iterations = static_cast<int>(n);
      return true;
    }
    return false;
  });
  run.steps_run = static_cast<int>(trace.losses.size());
  if (!trace.losses.empty()) run.final_average = trace.moving_average(trace.losses.size() - 1, cfg.window);
  return run;
}

}  // namespace

std::optional<int> median_iterations(const std::vector<SeedRun>& runs) {
  if (runs.empty()) return std::nullopt;
  std::vector<long> values;
  for (const auto& r : runs) values.push_back(r.iterations ? *r.iterations : std::numeric_limits<long>::max());
  std::sort(values.begin(), values.end());
  const long mid = values[(values.size() - 1) / 2];
  if (mid == std::numeric_limits<long>::max()) return std::nullopt;
  return static_cast<int>(mid);
}

std::vector<ConvergenceReport> convergence_benchmark(const Denoiser& d, const std::vector<Tensor>& collection,
                                                     const NoiseSchedule& sched, const BenchmarkConfig& cfg) {
  cfg.validate();
  if (collection.empty()) throw ConfigError("benchmark collection is empty");
  if (!d.frozen()) throw ContractError("benchmark requires a frozen denoiser");

  struct Job {
    std::size_t variant, seed;
  };
  std::vector<Job> jobs;
  for (std::size_t v = 0; v < cfg.variants.size(); ++v)
    for (std::size_t s = 0; s < cfg.seeds.size(); ++s) jobs.push_back({v, s});

  std::vector<ConvergenceReport> reports(cfg.variants.size());
  for (std::size_t v = 0; v < cfg.variants.size(); ++v) {
    reports[v].variant = cfg.variants[v];
    reports[v].threshold_ratio = cfg.threshold_ratio;
    reports[v].runs.resize(cfg.seeds.size());
  }

  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  auto worker = [&] {
    for (std::size_t j; (j = next.fetch_add(1)) < jobs.size();) {
      try {
        const auto [v, s] = jobs[j];
        // Each job writes its own slot, so no lock is needed for results.
        reports[v].runs[s] = run_one(d, collection, sched, cfg, cfg.variants[v], cfg.seeds[s]);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(cfg.threads, 1, jobs.size());
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);

  for (auto& r : reports) r.median_iters = median_iterations(r.runs);
  return reports;
}

std::string report_csv(const std::vector<ConvergenceReport>& reports) {
  std::ostringstream out;
  out.precision(17);
  out << "variant,seed,initial_loss,threshold,iterations,converged,steps_run,final_average\n";
  for (const auto& r : reports) {
    for (const auto& run : r.runs) {
      out << to_string(r.variant) << ',' << run.seed << ',' << run.initial_loss << ',' << run.threshold << ','
          << (run.iterations ? std::to_string(*run.iterations) : "") << ',' << (run.iterations ? 1 : 0) << ','
          << run.steps_run << ',' << run.final_average << '\n';
    }
  }
  return out.str();
}

std::string report_table(const std::vector<ConvergenceReport>& reports) {
  std::ostringstream out;
  for (const auto& r : reports) {
    out << to_string(r.variant) << " (threshold " << r.threshold_ratio << " x initial loss)\n";
    out << "  " << std::setw(20) << std::left << "seed" << std::setw(14) << "initial" << std::setw(14) << "threshold"
        << "iterations\n";
    for (const auto& run : r.runs) {
      out << "  " << std::setw(20) << run.seed << std::setw(14) << std::setprecision(5) << run.initial_loss
          << std::setw(14) << run.threshold << (run.iterations ? std::to_string(*run.iterations) : "not converged")
          << '\n';
    }
    out << "  median: " << (r.median_iters ? std::to_string(*r.median_iters) : "not converged") << "\n";
  }
  return out.str();
}

}  // namespace artbank

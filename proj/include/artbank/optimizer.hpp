#pragma once

#include <cstdint>
#include <vector>

#include "artbank/autograd.hpp"

namespace artbank {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adam over a fixed ParameterSet. Moment buffers are keyed by parameter position
// and checked against the names seen on the first step.
class Adam {
 public:
  explicit Adam(AdamConfig config = {}) : config_(config) {}

  // Throws ContractError naming any parameter without a populated gradient.
  void step(const ParameterSet& params);
  std::int64_t steps_taken() const noexcept { return t_; }
  const AdamConfig& config() const noexcept { return config_; }

 private:
  AdamConfig config_;
  std::int64_t t_ = 0;
  std::vector<std::string> names_;
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
};

}  // namespace artbank

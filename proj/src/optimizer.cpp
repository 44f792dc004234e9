#include "artbank/optimizer.hpp"

#include <cmath>

#include "artbank/errors.hpp"

namespace artbank {

void Adam::step(const ParameterSet& params) {
  for (const auto& p : params) {
    if (!p.value.has_grad()) throw ContractError("optimizer step: parameter '" + p.name + "' has no gradient");
  }
  if (t_ == 0) {
    for (const auto& p : params) {
      names_.push_back(p.name);
      m_.emplace_back(p.value.shape(), 0.0);
      v_.emplace_back(p.value.shape(), 0.0);
    }
  } else if (params.size() != names_.size()) {
    throw ContractError("optimizer step: parameter set changed between steps");
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
  std::size_t k = 0;
  for (const auto& p : params) {
    if (p.name != names_[k]) throw ContractError("optimizer step: expected parameter '" + names_[k] + "'");
    Var handle = p.value;
    Tensor& value = handle.mutable_value();
    const Tensor& g = handle.grad();
    Tensor& m = m_[k];
    Tensor& v = v_[k];
    for (std::size_t i = 0; i < value.size(); ++i) {
      m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * g[i];
      v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * g[i] * g[i];
      const double m_hat = m[i] / bc1;
      const double v_hat = v[i] / bc2;
      value[i] -= config_.lr * m_hat / (std::sqrt(v_hat) + config_.eps);
    }
    ++k;
  }
}

}  // namespace artbank

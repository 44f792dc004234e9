#include "artbank/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "artbank/errors.hpp"

namespace artbank {

GradCheckResult grad_check(const std::function<Var()>& f, const ParameterSet& params, double h) {
  params.zero_grad();
  const Var root = f();
  if (root.value().size() != 1) throw DimensionError("grad_check: f must return a scalar");
  root.backward();

  std::vector<Tensor> analytic;
  for (const auto& p : params) {
    if (!p.value.requires_grad()) throw ContractError("grad_check: parameter '" + p.name + "' is frozen");
    analytic.push_back(p.value.has_grad() ? p.value.grad() : Tensor(p.value.shape(), 0.0));
  }

  GradCheckResult result;
  std::size_t k = 0;
  for (const auto& p : params) {
    Var handle = p.value;
    Tensor& value = handle.mutable_value();
    for (std::size_t i = 0; i < value.size(); ++i) {
      const double saved = value[i];
      double plus = 0.0, minus = 0.0;
      try {
        value[i] = saved + h;
        plus = f().value()[0];
        value[i] = saved - h;
        minus = f().value()[0];
      } catch (const NumericError& e) {
        value[i] = saved;
        throw GradCheckError(p.name, e.what());
      }
      value[i] = saved;
      const double numeric = (plus - minus) / (2.0 * h);
      const double a = analytic[k][i];
      if (!std::isfinite(numeric) || !std::isfinite(a)) throw GradCheckError(p.name, "non-finite gradient");
      const double err = std::abs(a - numeric) / std::max({1.0, std::abs(a), std::abs(numeric)});
      if (result.elements_checked == 0 || err > result.max_rel_error) {
        result.max_rel_error = err;
        result.worst_parameter = p.name;
        result.worst_index = i;
      }
      ++result.elements_checked;
    }
    ++k;
  }
  params.zero_grad();
  return result;
}

}  // namespace artbank

#pragma once

#include <functional>
#include <string>

#include "artbank/autograd.hpp"

namespace artbank {

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_parameter;
  std::size_t worst_index = 0;
  std::size_t elements_checked = 0;
};

// Compares reverse-mode gradients of the scalar `f` against central differences
// for every element of every parameter. Error per element is
// |analytic - numeric| / max(1, |analytic|, |numeric|).
GradCheckResult grad_check(const std::function<Var()>& f, const ParameterSet& params, double h = 1e-5);

}  // namespace artbank

#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace bark {

// |a - n| / max(1e-12, |a| + |n|)
double relative_error(double analytic, double numeric);

// (f(p + h) - f(p - h)) / (2h), restoring p afterwards. `loss` must read the
// current value of `param`.
double central_difference(const std::function<double()>& loss, double& param, double h);

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t checked = 0;
};

// Compares `analytic[i]` with the central difference of `loss` with respect to
// `params[i]` for every i.
GradCheckResult grad_check(const std::function<double()>& loss, std::span<double> params,
                           std::span<const double> analytic, double h);

}  // namespace bark

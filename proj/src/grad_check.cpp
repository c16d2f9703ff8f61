#include "bark/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "bark/error.hpp"

namespace bark {

double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) /
         std::max(1e-12, std::abs(analytic) + std::abs(numeric));
}

double central_difference(const std::function<double()>& loss, double& param, double h) {
  const double saved = param;
  param = saved + h;
  const double plus = loss();
  param = saved - h;
  const double minus = loss();
  param = saved;
  return (plus - minus) / (2.0 * h);
}

GradCheckResult grad_check(const std::function<double()>& loss, std::span<double> params,
                           std::span<const double> analytic, double h) {
  if (params.size() != analytic.size()) {
    throw Error(ErrorCode::kShapeMismatch, "grad_check: parameter/gradient count differs");
  }
  if (!(h > 0.0)) throw Error(ErrorCode::kBadConfig, "grad_check: h must be positive");

  GradCheckResult result;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double numeric = central_difference(loss, params[i], h);
    const double err = relative_error(analytic[i], numeric);
    if (err > result.max_relative_error || result.checked == 0) {
      result.max_relative_error = err;
      result.worst_index = i;
      result.worst_analytic = analytic[i];
      result.worst_numeric = numeric;
    }
    ++result.checked;
  }
  return result;
}

}  // namespace bark

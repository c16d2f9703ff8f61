#include "bark/optim.hpp"

#include <cmath>
#include <string>

#include "bark/error.hpp"

namespace bark {
namespace {

void check_pairs(std::span<Tensor* const> params, std::span<const Tensor* const> grads) {
  if (params.size() != grads.size()) {
    throw Error(ErrorCode::kShapeMismatch,
                std::to_string(params.size()) + " parameters but " +
                    std::to_string(grads.size()) + " gradients");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params[i]->same_shape(*grads[i])) {
      throw Error(ErrorCode::kShapeMismatch,
                  "parameter " + std::to_string(i) + " is " +
                      shape_string(params[i]->shape()) + ", gradient is " +
                      shape_string(grads[i]->shape()));
    }
  }
}

}  // namespace

void sgd_step(std::span<Tensor* const> params, std::span<const Tensor* const> grads,
              double lr) {
  check_pairs(params, grads);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto p = params[i]->values();
    auto g = grads[i]->values();
    for (std::size_t j = 0; j < p.size(); ++j) p[j] -= lr * g[j];
  }
}

void adam_step(AdamState& state, std::span<Tensor* const> params,
               std::span<const Tensor* const> grads) {
  check_pairs(params, grads);
  if (state.first_moment.empty()) {
    for (const Tensor* p : params) {
      state.first_moment.emplace_back(p->shape());
      state.second_moment.emplace_back(p->shape());
    }
  }
  if (state.first_moment.size() != params.size()) {
    throw Error(ErrorCode::kShapeMismatch, "adam state tracks a different parameter set");
  }

  const auto& cfg = state.config;
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(cfg.beta1, t);
  const double correction2 = 1.0 - std::pow(cfg.beta2, t);

  for (std::size_t i = 0; i < params.size(); ++i) {
    auto p = params[i]->values();
    auto g = grads[i]->values();
    auto m = state.first_moment[i].values();
    auto v = state.second_moment[i].values();
    if (m.size() != p.size()) {
      throw Error(ErrorCode::kShapeMismatch, "adam moment shape differs from parameter");
    }
    for (std::size_t j = 0; j < p.size(); ++j) {
      m[j] = cfg.beta1 * m[j] + (1.0 - cfg.beta1) * g[j];
      v[j] = cfg.beta2 * v[j] + (1.0 - cfg.beta2) * g[j] * g[j];
      const double m_hat = m[j] / correction1;
      const double v_hat = v[j] / correction2;
      p[j] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
    }
  }
}

}  // namespace bark

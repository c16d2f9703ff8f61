#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "bark/tensor.hpp"

namespace bark {

// p <- p - lr * g for every (param, grad) pair.
// Throws Error{kShapeMismatch}.
void sgd_step(std::span<Tensor* const> params, std::span<const Tensor* const> grads,
              double lr);

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  AdamConfig config;
  std::vector<Tensor> first_moment;
  std::vector<Tensor> second_moment;
  std::uint64_t step = 0;

  explicit AdamState(AdamConfig cfg = {}) : config(cfg) {}
};

// Bias-corrected Adam update. Moments are allocated on the first call and must
// keep matching the parameter shapes afterwards.
void adam_step(AdamState& state, std::span<Tensor* const> params,
               std::span<const Tensor* const> grads);

}  // namespace bark

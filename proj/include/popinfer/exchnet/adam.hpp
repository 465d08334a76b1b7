#pragma once

#include <cstdint>
#include <vector>

#include "popinfer/exchnet/tensor.hpp"

namespace popinfer::exchnet {

struct AdamConfig {
  double base_lr = 1e-3;
  double decay = 0.9;
  double decay_steps = 10000.0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  std::vector<Tensor> m;
  std::vector<Tensor> v;
  std::uint64_t step = 0;  // batch counter b
};

// base_lr * decay^(b / decay_steps).
double learning_rate(const AdamConfig& cfg, std::uint64_t b);

// One bias-corrected Adam update at batch counter state.step, which is then
// incremented. Throws std::domain_error on non-finite gradients.
void adam_step(std::vector<Tensor>& params, const std::vector<Tensor>& grads, AdamState& state,
               const AdamConfig& cfg = {});

}  // namespace popinfer::exchnet

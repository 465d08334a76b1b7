#include "popinfer/exchnet/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace popinfer::exchnet {

double learning_rate(const AdamConfig& cfg, std::uint64_t b) {
  return cfg.base_lr * std::pow(cfg.decay, static_cast<double>(b) / cfg.decay_steps);
}

void adam_step(std::vector<Tensor>& params, const std::vector<Tensor>& grads, AdamState& state,
               const AdamConfig& cfg) {
  if (grads.size() != params.size()) throw std::invalid_argument("gradient/parameter count mismatch");
  for (std::size_t i = 0; i < grads.size(); ++i) {
    if (grads[i].size() != params[i].size()) throw std::invalid_argument("gradient shape mismatch");
    for (double g : grads[i].values)
      if (!std::isfinite(g)) throw std::domain_error("non-finite gradient");
  }
  if (state.m.size() != params.size()) {
    state.m = zeros_like(params);
    state.v = zeros_like(params);
  }
  const double lr = learning_rate(cfg, state.step);
  const double t = static_cast<double>(state.step + 1);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params[i].values;
    auto& m = state.m[i].values;
    auto& v = state.v[i].values;
    const auto& g = grads[i].values;
    for (std::size_t k = 0; k < p.size(); ++k) {
      m[k] = cfg.beta1 * m[k] + (1.0 - cfg.beta1) * g[k];
      v[k] = cfg.beta2 * v[k] + (1.0 - cfg.beta2) * g[k] * g[k];
      const double m_hat = m[k] / c1;
      const double v_hat = v[k] / c2;
      p[k] -= lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
    }
  }
  ++state.step;
}

}  // namespace popinfer::exchnet

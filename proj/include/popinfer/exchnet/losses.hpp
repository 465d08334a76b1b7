#pragma once

#include <span>
#include <vector>

#include "popinfer/exchnet/architecture.hpp"
#include "popinfer/exchnet/posterior.hpp"

namespace popinfer::exchnet {

inline constexpr double kProbFloor = 1e-30;

// -log p[label].
double loss_xent(const DiscreteProbs& post, int label);

// -(log tau)/2 + tau (y - mu)^2 / 2 with the constant dropped.
double loss_gaussian_nll(double mu, double tau, double y);

// -log sum_j w_j N(y; mu_j, 1/tau_j), including the Gaussian constant.
double loss_mixture_nll(const MixturePosterior& mix, double y);

// Head-space value of a continuous target (log k for log-space heads).
double head_target(const Architecture& arch, double label);

struct LossGrad {
  double loss = 0.0;
  std::vector<double> grad;  // d loss / d head outputs
};

// Loss of one head output vector against its label (class index or k) and
// its gradient with respect to the raw head outputs.
LossGrad head_loss(const Architecture& arch, std::span<const double> head, double label);

}  // namespace popinfer::exchnet

#pragma once

#include <span>
#include <variant>
#include <vector>

#include "popinfer/exchnet/architecture.hpp"

namespace popinfer::exchnet {

struct DiscreteProbs {
  std::vector<double> p;
};

// Normal with mean mu and precision tau; with log_space the normal describes
// log(k), i.e. a log-normal posterior on k.
struct GaussianPosterior {
  double mu = 0.0;
  double tau = 1.0;
  bool log_space = false;
};

struct MixtureComponent {
  double weight;
  double mu;
  double tau;
};

struct MixturePosterior {
  std::vector<MixtureComponent> components;
  bool log_space = false;
};

using Posterior = std::variant<DiscreteProbs, GaussianPosterior, MixturePosterior>;

inline constexpr double kTauFloor = 1e-6;

double softplus(double z) noexcept;
double sigmoid(double z) noexcept;
double inverse_softplus(double y) noexcept;

// Maps one head output vector to the posterior family of `arch`.
Posterior make_posterior(const Architecture& arch, std::span<const double> head);

}  // namespace popinfer::exchnet

#include "popinfer/exchnet/losses.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace popinfer::exchnet {

namespace {
constexpr double kHalfLog2Pi = 0.91893853320467274178;
}

double loss_xent(const DiscreteProbs& post, int label) {
  if (label < 0 || static_cast<std::size_t>(label) >= post.p.size())
    throw std::out_of_range("class label out of range");
  return -std::log(std::max(post.p[label], kProbFloor));
}

double loss_gaussian_nll(double mu, double tau, double y) {
  if (!(tau > 0.0)) throw std::domain_error("precision must be positive");
  const double r = y - mu;
  return -0.5 * std::log(tau) + 0.5 * tau * r * r;
}

double loss_mixture_nll(const MixturePosterior& mix, double y) {
  double top = -std::numeric_limits<double>::infinity();
  std::vector<double> a;
  a.reserve(mix.components.size());
  for (const auto& c : mix.components) {
    if (!(c.tau > 0.0)) throw std::domain_error("precision must be positive");
    const double r = y - c.mu;
    const double v = c.weight > 0.0
                         ? std::log(c.weight) + 0.5 * std::log(c.tau) - kHalfLog2Pi - 0.5 * c.tau * r * r
                         : -std::numeric_limits<double>::infinity();
    a.push_back(v);
    top = std::max(top, v);
  }
  if (!std::isfinite(top)) throw std::domain_error("mixture has no component with positive weight");
  double sum = 0.0;
  for (double v : a) sum += std::exp(v - top);
  return -(top + std::log(sum));
}

double head_target(const Architecture& arch, double label) {
  if (!arch.log_space) return label;
  if (!(label > 0.0)) throw std::domain_error("log-space heads need positive targets");
  return std::log(label);
}

LossGrad head_loss(const Architecture& arch, std::span<const double> head, double label) {
  LossGrad out;
  out.grad.assign(head.size(), 0.0);
  switch (arch.head) {
    case HeadKind::Softmax: {
      const auto post = std::get<DiscreteProbs>(make_posterior(arch, head));
      const int cls = static_cast<int>(label);
      out.loss = loss_xent(post, cls);
      for (std::size_t i = 0; i < head.size(); ++i) out.grad[i] = post.p[i] - (static_cast<int>(i) == cls ? 1.0 : 0.0);
      break;
    }
    case HeadKind::Gaussian: {
      const double y = head_target(arch, label);
      const double mu = head[0];
      const double tau = softplus(head[1]) + kTauFloor;
      const double r = y - mu;
      out.loss = loss_gaussian_nll(mu, tau, y);
      out.grad[0] = -tau * r;
      out.grad[1] = (-0.5 / tau + 0.5 * r * r) * sigmoid(head[1]);
      break;
    }
    case HeadKind::Mixture: {
      const double y = head_target(arch, label);
      const auto mix = std::get<MixturePosterior>(make_posterior(arch, head));
      const auto k = mix.components.size();
      out.loss = loss_mixture_nll(mix, y);
      // Responsibilities gamma_j = w_j N_j / sum.
      std::vector<double> gamma(k);
      for (std::size_t j = 0; j < k; ++j) {
        const auto& c = mix.components[j];
        const double r = y - c.mu;
        const double log_term = std::log(std::max(c.weight, kProbFloor)) + 0.5 * std::log(c.tau) - kHalfLog2Pi -
                                0.5 * c.tau * r * r;
        gamma[j] = std::exp(log_term + out.loss);
      }
      for (std::size_t j = 0; j < k; ++j) {
        const auto& c = mix.components[j];
        const double r = y - c.mu;
        out.grad[j] = c.weight - gamma[j];
        out.grad[k + j] = -gamma[j] * c.tau * r;
        out.grad[2 * k + j] = -gamma[j] * (0.5 / c.tau - 0.5 * r * r) * sigmoid(head[2 * k + j]);
      }
      break;
    }
  }
  return out;
}

}  // namespace popinfer::exchnet

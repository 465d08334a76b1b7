#include "popinfer/exchnet/posterior.hpp"

#include <algorithm>
#include <cmath>

namespace popinfer::exchnet {

double softplus(double z) noexcept { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sigmoid(double z) noexcept {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double inverse_softplus(double y) noexcept { return y > 30.0 ? y : std::log(std::expm1(y)); }

namespace {

std::vector<double> softmax(std::span<const double> z) {
  const double top = *std::max_element(z.begin(), z.end());
  std::vector<double> p(z.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    p[i] = std::exp(z[i] - top);
    sum += p[i];
  }
  for (auto& v : p) v /= sum;
  return p;
}

}  // namespace

Posterior make_posterior(const Architecture& arch, std::span<const double> head) {
  switch (arch.head) {
    case HeadKind::Softmax:
      return DiscreteProbs{softmax(head)};
    case HeadKind::Gaussian:
      return GaussianPosterior{head[0], softplus(head[1]) + kTauFloor, arch.log_space};
    case HeadKind::Mixture: {
      const auto k = static_cast<std::size_t>(arch.mixture_components);
      const auto w = softmax(head.subspan(0, k));
      MixturePosterior mix;
      mix.log_space = arch.log_space;
      mix.components.reserve(k);
      for (std::size_t j = 0; j < k; ++j)
        mix.components.push_back({w[j], head[k + j], softplus(head[2 * k + j]) + kTauFloor});
      return mix;
    }
  }
  return DiscreteProbs{};
}

}  // namespace popinfer::exchnet

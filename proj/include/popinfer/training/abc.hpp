#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "popinfer/coalescent/snp_matrix.hpp"
#include "popinfer/common/parallel.hpp"
#include "popinfer/common/rng.hpp"
#include "popinfer/hotspot/window.hpp"

namespace popinfer::training {

struct EmptyPosterior : std::runtime_error {
  explicit EmptyPosterior(double epsilon)
      : std::runtime_error("no draws accepted at epsilon " + std::to_string(epsilon) + "; widen epsilon") {}
};

template <typename Theta>
struct AbcResult {
  std::vector<Theta> accepted;
  std::vector<Theta> drawn;
  std::vector<double> distances;  // per draw, aligned with `drawn`
  double epsilon = 0.0;
  double acceptance_rate = 0.0;
};

using Stats = std::vector<double>;

// Rejection ABC. Draw i uses the RNG derived from (seed, Stream::Abc, i) for
// both the prior and the simulator, so results do not depend on the worker
// count and different epsilons see the same draws.
//   prior(rng) -> Theta, simulate(theta, rng) -> X, summary(X) -> Stats,
//   distance(Stats, Stats) -> double.
template <typename Theta, typename Prior, typename Sim, typename Summary, typename Distance>
AbcResult<Theta> abc_rejection(Prior&& prior, Sim&& simulate, Summary&& summary, Distance&& distance,
                               double epsilon, std::size_t draws, const Stats& observed, std::uint64_t seed,
                               int workers = 1) {
  if (!(epsilon >= 0.0)) throw std::invalid_argument("epsilon must be >= 0");
  if (draws == 0) throw std::invalid_argument("need at least one ABC draw");
  AbcResult<Theta> out;
  out.epsilon = epsilon;
  out.drawn.resize(draws);
  out.distances.resize(draws);
  parallel_for(draws, workers, [&](std::size_t i) {
    Rng rng = make_rng(seed, Stream::Abc, i);
    Theta theta = prior(rng);
    const auto x = simulate(theta, rng);
    out.distances[i] = distance(summary(x), observed);
    out.drawn[i] = std::move(theta);
  });
  for (std::size_t i = 0; i < draws; ++i)
    if (out.distances[i] <= epsilon) out.accepted.push_back(out.drawn[i]);
  if (out.accepted.empty()) throw EmptyPosterior{epsilon};
  out.acceptance_rate = static_cast<double>(out.accepted.size()) / static_cast<double>(draws);
  return out;
}

// Re-thresholds an earlier run at a new epsilon without re-simulating.
template <typename Theta>
AbcResult<Theta> rethreshold(const AbcResult<Theta>& run, double epsilon) {
  if (!(epsilon >= 0.0)) throw std::invalid_argument("epsilon must be >= 0");
  AbcResult<Theta> out;
  out.epsilon = epsilon;
  for (std::size_t i = 0; i < run.drawn.size(); ++i)
    if (run.distances[i] <= epsilon) out.accepted.push_back(run.drawn[i]);
  if (out.accepted.empty()) throw EmptyPosterior{epsilon};
  out.acceptance_rate = static_cast<double>(out.accepted.size()) / static_cast<double>(run.drawn.size());
  return out;
}

// (raw SNP count, mean pairwise difference, folded SFS bins 1..3). The matrix
// is the uncropped window; raw_snps overrides the SNP count when the matrix
// has already been cropped.
Stats default_summaries(const coalescent::SnpMatrix& m, int raw_snps = -1);
// Same statistics from an encoded window (allele channel only).
Stats window_summaries(const hotspot::LabeledWindow& w);

// Euclidean distance after dividing each coordinate by a per-statistic scale.
struct StandardizedDistance {
  std::vector<double> scale;
  double operator()(const Stats& a, const Stats& b) const;
};

// Scales are the sample standard deviations of the pilot statistics; a
// constant statistic gets scale 1.
StandardizedDistance fit_standardized_distance(const std::vector<Stats>& pilot);

}  // namespace popinfer::training

#include "popinfer/training/source.hpp"

#include <stdexcept>

#include "popinfer/common/parallel.hpp"

namespace popinfer::training {

WindowSource prior_source(coalescent::SimConfig sim, hotspot::PriorConfig prior, std::uint64_t seed, Stream stream) {
  sim.validate();
  prior.validate();
  return [sim = std::move(sim), prior = std::move(prior), seed, stream](std::uint64_t index) {
    Rng rng = make_rng(seed, stream, index);
    const auto draw = hotspot::sample_prior(prior, sim.length, rng);
    return coalescent::simulate_window(draw, sim, rng);
  };
}

std::vector<LabeledWindow> simulate_set(const WindowSource& source, std::uint64_t first, std::size_t count,
                                        int workers) {
  std::vector<LabeledWindow> out(count);
  parallel_for(count, workers, [&](std::size_t i) { out[i] = source(first + i); });
  return out;
}

std::vector<double> stack_tensors(std::span<const LabeledWindow* const> windows) {
  if (windows.empty()) return {};
  const auto& first = *windows.front();
  std::vector<double> out;
  out.reserve(first.tensor.size() * windows.size());
  for (const auto* w : windows) {
    if (w->rows != first.rows || w->positions != first.positions || w->tensor.size() != first.tensor.size())
      throw std::invalid_argument("windows in one batch must share n and d");
    out.insert(out.end(), w->tensor.begin(), w->tensor.end());
  }
  return out;
}

}  // namespace popinfer::training

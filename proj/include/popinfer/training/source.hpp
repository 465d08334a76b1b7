#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "popinfer/coalescent/window.hpp"
#include "popinfer/common/rng.hpp"
#include "popinfer/hotspot/prior.hpp"
#include "popinfer/hotspot/window.hpp"

namespace popinfer::training {

using hotspot::LabeledWindow;

// Deterministic function of the index; must be safe to call concurrently.
using WindowSource = std::function<LabeledWindow(std::uint64_t index)>;

// Window i draws (h, map, k) from the prior and simulates with the RNG
// derived from (seed, stream, i).
WindowSource prior_source(coalescent::SimConfig sim, hotspot::PriorConfig prior, std::uint64_t seed, Stream stream);

// Windows first .. first + count - 1 of `source`, in index order.
std::vector<LabeledWindow> simulate_set(const WindowSource& source, std::uint64_t first, std::size_t count,
                                        int workers);

// Copies windows into one contiguous n x d x 2 batch buffer; every window must
// share the same shape.
std::vector<double> stack_tensors(std::span<const LabeledWindow* const> windows);

}  // namespace popinfer::training

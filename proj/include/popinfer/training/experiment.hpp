#pragma once

#include <cstdint>
#include <vector>

#include "popinfer/coalescent/window.hpp"
#include "popinfer/exchnet/network.hpp"
#include "popinfer/hotspot/prior.hpp"
#include "popinfer/training/trainer.hpp"

namespace popinfer::training {

// One matched pair of runs: both start from the same weights and are scored
// on the same held-out set. The fixed dataset is the first dataset_size
// windows of the stream the on-the-fly run consumes.
struct MatchedRuns {
  std::uint64_t seed = 0;
  exchnet::ExchNet on_the_fly;
  exchnet::ExchNet fixed;
  TrainTrace on_the_fly_trace;
  TrainTrace fixed_trace;
};

struct ExperimentSetup {
  coalescent::SimConfig sim;
  hotspot::PriorConfig prior;
  exchnet::Architecture arch;
  TrainConfig train;  // mode and seed are overridden per run
  std::size_t dataset_size = 2000;
  std::size_t heldout_size = 1000;
};

std::vector<LabeledWindow> heldout_set(const ExperimentSetup& setup, std::uint64_t seed);

exchnet::ExchNet run_on_the_fly(const ExperimentSetup& setup, std::uint64_t seed,
                                std::span<const LabeledWindow> heldout, TrainTrace& trace);
exchnet::ExchNet run_fixed(const ExperimentSetup& setup, std::uint64_t seed, std::span<const LabeledWindow> heldout,
                           TrainTrace& trace);

MatchedRuns run_matched(const ExperimentSetup& setup, std::uint64_t seed);

// Final held-out loss of each trace.
double final_heldout_loss(const TrainTrace& trace);

}  // namespace popinfer::training

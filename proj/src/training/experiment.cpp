#include "popinfer/training/experiment.hpp"

#include <stdexcept>

namespace popinfer::training {

std::vector<LabeledWindow> heldout_set(const ExperimentSetup& setup, std::uint64_t seed) {
  return simulate_set(prior_source(setup.sim, setup.prior, seed, Stream::Heldout), 0, setup.heldout_size,
                      setup.train.workers);
}

exchnet::ExchNet run_on_the_fly(const ExperimentSetup& setup, std::uint64_t seed,
                                std::span<const LabeledWindow> heldout, TrainTrace& trace) {
  auto cfg = setup.train;
  cfg.mode = TrainMode::OnTheFly;
  cfg.seed = seed;
  auto net = initial_network(setup.arch, seed);
  trace = train_on_the_fly(net, prior_source(setup.sim, setup.prior, seed, Stream::Train), cfg, heldout);
  return net;
}

exchnet::ExchNet run_fixed(const ExperimentSetup& setup, std::uint64_t seed, std::span<const LabeledWindow> heldout,
                           TrainTrace& trace) {
  auto cfg = setup.train;
  cfg.mode = TrainMode::Fixed;
  cfg.dataset_size = setup.dataset_size;
  cfg.seed = seed;
  const auto dataset = simulate_set(prior_source(setup.sim, setup.prior, seed, Stream::Train), 0,
                                    setup.dataset_size, cfg.workers);
  auto net = initial_network(setup.arch, seed);
  trace = train_fixed(net, dataset, cfg, heldout);
  return net;
}

MatchedRuns run_matched(const ExperimentSetup& setup, std::uint64_t seed) {
  const auto heldout = heldout_set(setup, seed);
  TrainTrace fly_trace;
  TrainTrace fixed_trace;
  auto fly = run_on_the_fly(setup, seed, heldout, fly_trace);
  auto fixed = run_fixed(setup, seed, heldout, fixed_trace);
  return {seed, std::move(fly), std::move(fixed), std::move(fly_trace), std::move(fixed_trace)};
}

double final_heldout_loss(const TrainTrace& trace) {
  if (trace.records.empty()) throw std::invalid_argument("empty training trace");
  return trace.records.back().heldout_loss;
}

}  // namespace popinfer::training

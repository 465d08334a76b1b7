#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "popinfer/exchnet/network.hpp"
#include "popinfer/training/source.hpp"

namespace popinfer::training {

enum class TrainMode { OnTheFly, Fixed };

struct TrainConfig {
  std::uint64_t steps = 4000;
  int batch_size = 50;
  TrainMode mode = TrainMode::OnTheFly;
  std::size_t dataset_size = 0;  // fixed mode only
  // Fixed mode normally samples batches uniformly with replacement. With this
  // flag it walks the dataset in index order instead (reshuffling once it has
  // been used up), which reproduces on-the-fly training exactly when the
  // dataset holds the first steps * batch_size windows of the same source.
  bool without_replacement = false;
  std::uint64_t eval_every = 500;
  std::uint64_t seed = 1;
  int workers = 0;
  // Off by default so traces are byte-reproducible.
  bool record_wall_clock = false;
  exchnet::AdamConfig adam;

  void validate() const;
};

struct TraceRecord {
  std::uint64_t batch = 0;
  double train_loss = 0.0;  // mean over batches since the previous record
  double heldout_loss = 0.0;
  double heldout_accuracy = 0.0;  // NaN for continuous heads
  double seconds = 0.0;
};

struct TrainTrace {
  std::vector<TraceRecord> records;

  // Columns batch,train_loss,heldout_loss,heldout_accuracy,seconds.
  void write_csv(std::ostream& out) const;
  std::string csv() const;
};

struct TrainingDiverged : std::runtime_error {
  explicit TrainingDiverged(std::uint64_t batch)
      : std::runtime_error("non-finite training loss at batch " + std::to_string(batch)) {}
};

// Called after every completed batch with the batch counter.
using BatchHook = std::function<void(std::uint64_t batch, const exchnet::ExchNet& net)>;

// Weights drawn from the run's initialization stream, so matched seeds give
// matched starting points across training modes.
exchnet::ExchNet initial_network(const exchnet::Architecture& arch, std::uint64_t seed);

// Batch b uses windows b * batch_size .. (b + 1) * batch_size - 1 of `source`;
// nothing is drawn twice.
TrainTrace train_on_the_fly(exchnet::ExchNet& net, const WindowSource& source, const TrainConfig& cfg,
                            std::span<const LabeledWindow> heldout, const BatchHook& hook = {});

TrainTrace train_fixed(exchnet::ExchNet& net, std::span<const LabeledWindow> dataset, const TrainConfig& cfg,
                       std::span<const LabeledWindow> heldout, const BatchHook& hook = {});

// One optimizer step on the given windows; returns the mean batch loss.
double train_step(exchnet::ExchNet& net, std::span<const LabeledWindow* const> batch, Rng* dropout_rng,
                  const exchnet::AdamConfig& adam);

struct HeldoutMetrics {
  double loss = 0.0;
  double accuracy = 0.0;  // NaN for continuous heads
};

// Posteriors for each window; windows may differ in row count.
std::vector<exchnet::Posterior> predict(const exchnet::ExchNet& net, std::span<const LabeledWindow> windows);
HeldoutMetrics evaluate(const exchnet::ExchNet& net, std::span<const LabeledWindow> windows);

// Probability of class 1 under a discrete posterior.
double positive_probability(const exchnet::Posterior& post);

}  // namespace popinfer::training

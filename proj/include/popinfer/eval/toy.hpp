#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "popinfer/coalescent/window.hpp"
#include "popinfer/exchnet/network.hpp"
#include "popinfer/training/source.hpp"

namespace popinfer::eval {

// Two-hypothesis problem small enough to enumerate: theta = 0 is a region
// without recombination, theta = 1 a region with a strong central hotspot.
// Windows keep only the allele channel (distances are zeroed), so a window is
// one of finitely many n x d binary matrices, and because the model is
// exchangeable its posterior depends only on the multiset of rows.
struct ToyConfig {
  int n = 4;
  int d = 4;
  double length = 10000.0;
  double flank = 4000.0;
  double hotspot_width = 2000.0;
  double hot_background = 5e-4;
  double hot_intensity = 100.0;
  std::uint64_t draws_per_theta = 1'000'000;
  int groups = 10;  // jackknife groups for the oracle standard error

  coalescent::SimConfig sim_config() const;
  hotspot::PriorDraw draw(int theta) const;
  // Identifies the generative model in oracle cache files.
  std::string fingerprint() const;
  void validate() const;
};

inline constexpr int kToyMaxCells = 20;

struct ToyTooLarge : std::invalid_argument {
  ToyTooLarge() : std::invalid_argument("toy problem exceeds the enumeration cap of 20 matrix cells") {}
};

// Rows sorted and packed into one integer, row-major, bit j of row i at
// position i * d + j.
std::uint64_t toy_key(const hotspot::LabeledWindow& w);
hotspot::LabeledWindow window_from_key(std::uint64_t key, int n, int d);

// Prior 1/2 on each theta; window i comes from (seed, stream, i).
training::WindowSource toy_source(const ToyConfig& cfg, std::uint64_t seed, Stream stream);

// Monte Carlo frequency table of every reachable key under each theta,
// split into jackknife groups.
struct ToyOracle {
  ToyConfig config;
  // key -> counts[group * 2 + theta]
  std::map<std::uint64_t, std::vector<std::uint64_t>> counts;

  std::uint64_t draws(int theta, int leave_out = -1) const;
  // P(theta = 1 | key); all groups except leave_out.
  double posterior(std::uint64_t key, int leave_out = -1) const;
};

ToyOracle build_toy_oracle(const ToyConfig& cfg, std::uint64_t seed, int workers);

// Reads the oracle from `path` if it was built from the same config and seed,
// otherwise builds it and writes it there.
ToyOracle cached_toy_oracle(const ToyConfig& cfg, std::uint64_t seed, int workers, const std::filesystem::path& path);

struct KlEstimate {
  double value = 0.0;
  double standard_error = 0.0;  // jackknife over oracle groups
};

// P(theta = 1 | window) from some predictor.
using ToyPredictor = std::function<double(const hotspot::LabeledWindow&)>;

// E_x[KL(oracle posterior || predicted posterior)] in nats, x weighted by the
// oracle's marginal frequency.
KlEstimate kl_to_oracle(const ToyOracle& oracle, const ToyPredictor& predict);
KlEstimate kl_to_oracle(const ToyOracle& oracle, const exchnet::ExchNet& net);
// I(theta; x), which equals the KL of a predictor that always returns the prior.
KlEstimate mutual_information(const ToyOracle& oracle);

}  // namespace popinfer::eval

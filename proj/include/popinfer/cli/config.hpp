#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "popinfer/coalescent/window.hpp"
#include "popinfer/exchnet/architecture.hpp"
#include "popinfer/hotspot/prior.hpp"
#include "popinfer/training/trainer.hpp"

namespace popinfer::cli {

inline constexpr int kConfigSchemaVersion = 1;

// Invalid config; the message names the line/column or field path.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EvalConfig {
  std::size_t test_size = 2000;
  std::optional<int> rows;  // test-time sample size; defaults to the training n
  std::vector<std::string> metrics;  // empty = every metric that fits the head
  int calibration_bins = 10;
  double level = 0.95;
};

struct ExperimentConfig {
  int replicates = 10;
  std::size_t dataset_size = 2000;
};

struct RunConfig {
  std::uint64_t seed = 1;
  int workers = 0;
  std::string out_dir = "run";
  coalescent::SimConfig sim;
  hotspot::PriorConfig prior;
  exchnet::Architecture network;
  training::TrainConfig train;
  std::string dataset_path;  // fixed-mode training data (EXGW)
  std::size_t heldout_size = 1000;
  EvalConfig eval;
  ExperimentConfig experiment;

  // Full config as JSON, every field present.
  nlohmann::ordered_json to_json() const;
  // FNV-1a of the canonical dump, hex.
  std::string hash() const;
  // Hash of the sections that determine simulated data (sim and prior).
  std::string data_hash() const;
  void validate() const;
};

// Missing keys keep their defaults; unknown keys are rejected.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

std::string fnv1a_hex(std::string_view bytes);

}  // namespace popinfer::cli

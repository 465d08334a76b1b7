#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "popinfer/cli/config.hpp"
#include "popinfer/hotspot/window.hpp"

namespace popinfer::cli {

namespace fs = std::filesystem;

// Fixed artifact names inside a run directory.
inline constexpr const char* kModelFile = "model.exnn";
inline constexpr const char* kTraceFile = "trace.csv";
inline constexpr const char* kMetricsFile = "metrics.csv";
inline constexpr const char* kManifestFile = "manifest.json";
inline constexpr const char* kWindowsFile = "windows.exgw";

// Which RNG stream a simulated dataset comes from. "train" datasets are the
// windows an on-the-fly run with the same seed would see first.
enum class Split { Train, Heldout, Test };
Split parse_split(const std::string& name);

void cmd_simulate(const RunConfig& cfg, std::size_t count, Split split, const fs::path& out_dir);
void cmd_train(const RunConfig& cfg, const fs::path& out_dir);
void cmd_eval(const RunConfig& cfg, const fs::path& model, const std::optional<fs::path>& data,
              const fs::path& out_dir);
// Posterior JSON for every window in the file (an object for a single window).
std::string cmd_infer(const fs::path& model, const fs::path& windows, double level = 0.95);
void cmd_experiment_fixed_vs_fly(const RunConfig& cfg, const fs::path& out_dir);

// Reads an EXGW dataset; warns on stderr when its sidecar records a different
// simulation config than `cfg`.
std::vector<hotspot::LabeledWindow> load_dataset(const fs::path& path, const RunConfig& cfg);
// Warning text when the sidecar next to `dataset` disagrees with `expected_hash`.
std::optional<std::string> sidecar_mismatch(const fs::path& dataset, const std::string& expected_hash);

// SHA-1 of the code version string, hashed the way git hashes a blob.
std::string code_version_hash();
std::string code_version();

// Entry point of the popinfer executable; returns the process exit code
// (0 ok, 1 usage or config error, 2 runtime failure).
int run(int argc, const char* const* argv);

}  // namespace popinfer::cli

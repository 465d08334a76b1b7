#pragma once

#include <optional>
#include <stdexcept>

#include "popinfer/common/rng.hpp"
#include "popinfer/hotspot/recomb_map.hpp"

namespace popinfer::hotspot {

enum class TaskKind { Discrete, Continuous };

struct Interval {
  double left;
  double right;
  double width() const noexcept { return right - left; }
};

// Three adjacent subwindows (flank, candidate hotspot, flank).
struct WindowSpec {
  double start = 0.0;
  double alpha_l = 13000.0;
  double alpha_h = 2000.0;
  double alpha_r = 13000.0;

  Interval w_l() const noexcept { return {start, start + alpha_l}; }
  Interval w_h() const noexcept { return {start + alpha_l, start + alpha_l + alpha_h}; }
  Interval w_r() const noexcept {
    return {start + alpha_l + alpha_h, start + alpha_l + alpha_h + alpha_r};
  }
  double total() const noexcept { return alpha_l + alpha_h + alpha_r; }
  double center() const noexcept { return start + alpha_l + 0.5 * alpha_h; }
  void validate() const;
};

struct Range {
  double low;
  double high;
};

enum class BackgroundPrior { Fixed, LogUniform };

struct PriorConfig {
  TaskKind task = TaskKind::Discrete;
  double alpha_l = 13000.0;
  double alpha_h = 2000.0;
  double alpha_r = 13000.0;
  double k_def = 10.0;
  // Genome-wide median per-bp rate used by the hotspot definition.
  double median_rate = 5e-4;

  BackgroundPrior background = BackgroundPrior::LogUniform;
  double background_value = 5e-4;
  Range background_range{1e-4, 3.1622776601683795e-3};

  double hot_probability = 0.5;
  Range hot_range{10.0, 100.0};
  Range null_range{1.0, 10.0};
  // When false, null windows are flat (k = 1).
  bool null_elevation = true;

  Range continuous_range{1.0, 100.0};
  double continuous_background = 5e-4;

  std::optional<int> force_label;
  int max_rejections = 10000;

  void validate() const;
};

struct PriorDraw {
  TaskKind task = TaskKind::Discrete;
  int h = 0;
  double k = 1.0;
  double background = 0.0;
  RecombMap map;
  WindowSpec window;
};

struct InvalidPrior : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct WindowOutsideMap : std::out_of_range {
  using std::out_of_range::out_of_range;
};

// Flat background with the center subwindow multiplied by k; the window is
// centered in [0, region_length).
RecombMap hotspot_map(double background, double k, const WindowSpec& window,
                      double region_length);

WindowSpec centered_window(const PriorConfig& cfg, double region_length);

// Draws (h, k, map). Discrete draws are resampled until the map's label under
// classify_window agrees with h.
PriorDraw sample_prior(const PriorConfig& cfg, double region_length, Rng& rng);

// Hotspot test on the mean-rate map: R(w_h) > k max(R(w_l), R(w_r)) and
// R(w_h) > k r_tilde.
bool classify_window(const RecombMap& map, const WindowSpec& w, double k, double r_tilde);

}  // namespace popinfer::hotspot

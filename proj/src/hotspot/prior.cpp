#include "popinfer/hotspot/prior.hpp"

#include <cmath>
#include <string>

namespace popinfer::hotspot {

namespace {

void check_range(const Range& r, const char* name) {
  if (!(r.low > 0.0) || !(r.high >= r.low) || !std::isfinite(r.high))
    throw InvalidPrior(std::string{"invalid range for "} + name);
}

double draw_in(const Range& r, Rng& rng) {
  if (r.high == r.low) return r.low;
  return std::uniform_real_distribution<double>{r.low, r.high}(rng);
}

}  // namespace

void WindowSpec::validate() const {
  if (!(alpha_l > 0.0 && alpha_h > 0.0 && alpha_r > 0.0))
    throw InvalidPrior("subwindow widths must be positive");
  if (!(start >= 0.0)) throw InvalidPrior("window start must be >= 0");
}

void PriorConfig::validate() const {
  WindowSpec{0.0, alpha_l, alpha_h, alpha_r}.validate();
  if (!(k_def > 1.0)) throw InvalidPrior("k_def must exceed 1");
  if (!(median_rate > 0.0)) throw InvalidPrior("median_rate must be positive");
  if (!(hot_probability >= 0.0 && hot_probability <= 1.0))
    throw InvalidPrior("hot_probability must lie in [0, 1]");
  if (background == BackgroundPrior::Fixed) {
    if (!(background_value > 0.0)) throw InvalidPrior("background rate must be positive");
  } else {
    check_range(background_range, "background_range");
  }
  check_range(hot_range, "hot_range");
  check_range(null_range, "null_range");
  check_range(continuous_range, "continuous_range");
  if (null_range.low < 1.0 || hot_range.low < 1.0 || continuous_range.low < 1.0)
    throw InvalidPrior("relative intensities must be >= 1");
  if (!(continuous_background > 0.0)) throw InvalidPrior("continuous background must be positive");
  if (force_label && *force_label != 0 && *force_label != 1)
    throw InvalidPrior("forced label must be 0 or 1");
  if (max_rejections < 1) throw InvalidPrior("max_rejections must be >= 1");
}

WindowSpec centered_window(const PriorConfig& cfg, double region_length) {
  WindowSpec w{0.0, cfg.alpha_l, cfg.alpha_h, cfg.alpha_r};
  if (w.total() > region_length) throw InvalidPrior("window wider than simulated region");
  w.start = 0.5 * (region_length - w.total());
  return w;
}

RecombMap hotspot_map(double background, double k, const WindowSpec& window, double region_length) {
  const auto hot = window.w_h();
  std::vector<RecombMap::Piece> pieces{{0.0, background}, {hot.left, background * k}};
  if (hot.right < region_length) pieces.push_back({hot.right, background});
  if (hot.left == 0.0) pieces.erase(pieces.begin());
  return RecombMap{std::move(pieces), region_length};
}

bool classify_window(const RecombMap& map, const WindowSpec& w, double k, double r_tilde) {
  if (!(k > 1.0)) throw std::invalid_argument("hotspot intensity threshold must exceed 1");
  if (!(r_tilde > 0.0)) throw std::invalid_argument("median rate must be positive");
  if (map.empty() || w.w_l().left < 0.0 || w.w_r().right > map.length())
    throw WindowOutsideMap("window outside recombination map domain");
  const double left = map.mean_rate(w.w_l().left, w.w_l().right);
  const double center = map.mean_rate(w.w_h().left, w.w_h().right);
  const double right = map.mean_rate(w.w_r().left, w.w_r().right);
  return center > k * std::max(left, right) && center > k * r_tilde;
}

PriorDraw sample_prior(const PriorConfig& cfg, double region_length, Rng& rng) {
  cfg.validate();
  PriorDraw draw;
  draw.task = cfg.task;
  draw.window = centered_window(cfg, region_length);

  if (cfg.task == TaskKind::Continuous) {
    draw.background = cfg.continuous_background;
    draw.k = draw_in(cfg.continuous_range, rng);
    draw.map = hotspot_map(draw.background, draw.k, draw.window, region_length);
    draw.h = (draw.k > 1.0 && classify_window(draw.map, draw.window, cfg.k_def, cfg.median_rate)) ? 1 : 0;
    return draw;
  }

  draw.h = cfg.force_label ? *cfg.force_label
                           : (uniform01(rng) < cfg.hot_probability ? 1 : 0);
  for (int attempt = 0; attempt < cfg.max_rejections; ++attempt) {
    if (cfg.background == BackgroundPrior::Fixed) {
      draw.background = cfg.background_value;
    } else {
      const double lo = std::log(cfg.background_range.low);
      const double hi = std::log(cfg.background_range.high);
      draw.background = std::exp(lo == hi ? lo : std::uniform_real_distribution<double>{lo, hi}(rng));
    }
    if (draw.h == 1) {
      draw.k = draw_in(cfg.hot_range, rng);
    } else {
      draw.k = cfg.null_elevation ? draw_in(cfg.null_range, rng) : 1.0;
    }
    draw.map = hotspot_map(draw.background, draw.k, draw.window, region_length);
    const bool hot = classify_window(draw.map, draw.window, cfg.k_def, cfg.median_rate);
    if (hot == (draw.h == 1)) return draw;
  }
  throw InvalidPrior("prior rejection cap reached: ranges cannot produce the requested label");
}

}  // namespace popinfer::hotspot

#include "popinfer/coalescent/window.hpp"

#include <cmath>
#include <limits>

#include "popinfer/coalescent/simulate.hpp"

namespace popinfer::coalescent {

void SimConfig::validate() const {
  if (n < 2) throw std::invalid_argument("sim.n must be >= 2");
  if (!(length > 0.0)) throw std::invalid_argument("sim.length must be positive");
  if (!(mu > 0.0)) throw std::invalid_argument("sim.mu must be positive");
  if (!(ne > 0.0)) throw std::invalid_argument("sim.ne must be positive");
  if (d < 2) throw std::invalid_argument("sim.d must be >= 2");
  if (retry_cap < 1) throw std::invalid_argument("sim.retry_cap must be >= 1");
  if (unphased && n % 2 != 0) throw std::invalid_argument("sim.n must be even for unphased data");
}

int crop_start(const SnpMatrix& m, int d, double center) {
  if (m.cols < d) throw std::invalid_argument("crop_start: fewer columns than requested");
  int best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (int s = 0; s + d <= m.cols; ++s) {
    const double med = d % 2 == 1 ? m.positions[s + d / 2]
                                  : 0.5 * (m.positions[s + d / 2 - 1] + m.positions[s + d / 2]);
    const double dist = std::abs(med - center);
    if (dist < best_dist) {
      best_dist = dist;
      best = s;
    }
  }
  return best;
}

hotspot::LabeledWindow simulate_window(const hotspot::PriorDraw& draw, const SimConfig& cfg, Rng& rng) {
  cfg.validate();
  const double theta = cfg.theta_per_bp();
  for (int attempt = 0; attempt < cfg.retry_cap; ++attempt) {
    auto trees = simulate_trees(cfg.n, cfg.length, draw.map, cfg.eta, rng);
    auto snps = drop_mutations(trees, theta, rng);
    if (cfg.minor_allele_recode) recode_minor_allele(snps);
    if (cfg.unphased) snps = pair_to_diploid(snps, rng);
    if (snps.cols < cfg.d) continue;

    const int start = crop_start(snps, cfg.d, draw.window.center());
    const auto cropped = snps.columns(start, cfg.d);

    hotspot::LabeledWindow w;
    w.rows = snps.rows;
    w.positions = cfg.d;
    w.tensor = hotspot::encode_window(cropped, cfg.length, snps.rows, cfg.d);
    w.label = draw.task == hotspot::TaskKind::Discrete ? static_cast<double>(draw.h) : draw.k;
    w.draw = draw;
    w.raw_snps = snps.cols;
    return w;
  }
  throw RetryExhausted{cfg.retry_cap};
}

}  // namespace popinfer::coalescent

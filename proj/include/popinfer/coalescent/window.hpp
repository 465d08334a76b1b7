#pragma once

#include <stdexcept>

#include "popinfer/coalescent/pop_size.hpp"
#include "popinfer/common/rng.hpp"
#include "popinfer/hotspot/prior.hpp"
#include "popinfer/hotspot/window.hpp"

namespace popinfer::coalescent {

struct SimConfig {
  int n = 32;                  // haplotypes simulated
  double length = 28000.0;     // region length in bp
  double mu = 1.1e-8;          // per generation per bp
  double ne = 10000.0;         // diploid effective size
  int d = 24;                  // SNPs per window
  int retry_cap = 100;
  bool minor_allele_recode = true;
  bool unphased = false;       // pair haplotypes into n/2 genotype rows
  PopSizeHistory eta;

  double theta_per_bp() const noexcept { return 4.0 * ne * mu; }
  int rows() const noexcept { return unphased ? n / 2 : n; }
  void validate() const;
};

struct RetryExhausted : std::runtime_error {
  explicit RetryExhausted(int attempts)
      : std::runtime_error("window simulation produced too few SNPs after " +
                           std::to_string(attempts) + " attempts") {}
};

// Index of the first column of the d-column block whose median position is
// closest to `center` (ties go to the leftmost block).
int crop_start(const SnpMatrix& m, int d, double center);

hotspot::LabeledWindow simulate_window(const hotspot::PriorDraw& draw, const SimConfig& cfg, Rng& rng);

}  // namespace popinfer::coalescent

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "popinfer/coalescent/snp_matrix.hpp"
#include "popinfer/hotspot/prior.hpp"

namespace popinfer::hotspot {

inline constexpr int kChannels = 2;

// One datum: n x d x 2 tensor (row-major, channel fastest) with its generating
// draw. label holds h for the discrete task and k for the continuous task.
struct LabeledWindow {
  int rows = 0;
  int positions = 0;
  std::vector<double> tensor;
  double label = 0.0;
  PriorDraw draw;
  int raw_snps = 0;

  double bit(int i, int j) const { return tensor[(static_cast<std::size_t>(i) * positions + j) * kChannels]; }
  double distance(int i, int j) const {
    return tensor[(static_cast<std::size_t>(i) * positions + j) * kChannels + 1];
  }
};

// Channel 0 holds the allele values; channel 1 holds the gap to the next SNP
// divided by window_length, identical in every row, 0 in the last column.
std::vector<double> encode_window(const coalescent::SnpMatrix& m, double window_length, int n, int d);

}  // namespace popinfer::hotspot

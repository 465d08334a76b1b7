#pragma once

#include <cstdint>
#include <vector>

namespace popinfer::coalescent {

// n x d allele matrix (row-major) with one base-pair coordinate per column.
// Haplotype matrices hold 0/1; diploid genotype matrices hold 0/1/2.
struct SnpMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<std::uint8_t> values;
  std::vector<double> positions;

  SnpMatrix() = default;
  SnpMatrix(int n, int d) : rows{n}, cols{d}, values(static_cast<std::size_t>(n) * d), positions(d) {}

  std::uint8_t& at(int i, int j) { return values[static_cast<std::size_t>(i) * cols + j]; }
  std::uint8_t at(int i, int j) const { return values[static_cast<std::size_t>(i) * cols + j]; }
  int column_sum(int j) const;

  SnpMatrix columns(int first, int count) const;
};

}  // namespace popinfer::coalescent

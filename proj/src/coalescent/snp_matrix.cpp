#include "popinfer/coalescent/snp_matrix.hpp"

#include <stdexcept>

#include "popinfer/coalescent/tree_sequence.hpp"

namespace popinfer::coalescent {

int SnpMatrix::column_sum(int j) const {
  int s = 0;
  for (int i = 0; i < rows; ++i) s += at(i, j);
  return s;
}

SnpMatrix SnpMatrix::columns(int first, int count) const {
  if (first < 0 || count < 0 || first + count > cols) throw std::out_of_range("column slice out of range");
  SnpMatrix out{rows, count};
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < count; ++j) out.at(i, j) = at(i, first + j);
  for (int j = 0; j < count; ++j) out.positions[j] = positions[first + j];
  return out;
}

double MarginalTree::total_branch_length() const noexcept {
  double total = 0.0;
  for (std::size_t v = 0; v < parent.size(); ++v) total += branch_length(static_cast<int>(v));
  return total;
}

void MarginalTree::leaves_below(int node, std::vector<unsigned char>& out) const {
  const int n = num_leaves();
  out.assign(static_cast<std::size_t>(n), 0);
  for (int leaf = 0; leaf < n; ++leaf) {
    for (int v = leaf; v >= 0 && time[v] <= time[node]; v = parent[v]) {
      if (v == node) {
        out[leaf] = 1;
        break;
      }
    }
  }
}

}  // namespace popinfer::coalescent

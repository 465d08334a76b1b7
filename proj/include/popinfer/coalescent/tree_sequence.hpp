#pragma once

#include <vector>

namespace popinfer::coalescent {

// Rooted binary tree over leaves 0..n-1; internal nodes are n..2n-2.
struct MarginalTree {
  double left = 0.0;
  double right = 0.0;
  std::vector<int> parent;  // -1 at the root
  std::vector<double> time;
  int root = -1;

  int num_leaves() const noexcept { return static_cast<int>(parent.size() + 1) / 2; }
  double branch_length(int node) const noexcept {
    return parent[node] < 0 ? 0.0 : time[parent[node]] - time[node];
  }
  double total_branch_length() const noexcept;
  double height() const noexcept { return time[root]; }
  // Leaf membership of the subtree rooted at `node`, as 0/1 per leaf.
  void leaves_below(int node, std::vector<unsigned char>& out) const;
};

struct MarginalTreeSequence {
  int num_samples = 0;
  double length = 0.0;
  std::vector<MarginalTree> trees;  // ordered, partitioning [0, length)
  long recombination_events = 0;    // all events, including in non-ancestral gaps
};

}  // namespace popinfer::coalescent

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

#include "popinfer/coalescent/simulate.hpp"

namespace popinfer::coalescent {

namespace {

struct Segment {
  double left;
  double right;
  int node;
};

using Lineage = std::vector<Segment>;

struct Edge {
  double left;
  double right;
  int parent;
  int child;
};

void squash(Lineage& lin) {
  std::size_t w = 0;
  for (std::size_t r = 0; r < lin.size(); ++r) {
    if (w > 0 && lin[w - 1].node == lin[r].node && lin[w - 1].right == lin[r].left) {
      lin[w - 1].right = lin[r].right;
    } else {
      lin[w++] = lin[r];
    }
  }
  lin.resize(w);
}

class HudsonSimulator {
 public:
  HudsonSimulator(int n, double length, const hotspot::RecombMap& map, const PopSizeHistory& eta,
                  Rng& rng)
      : n_{n}, length_{length}, map_{map}, eta_{eta}, rng_{rng} {
    lineages_.reserve(static_cast<std::size_t>(2 * n));
    for (int i = 0; i < n; ++i) {
      lineages_.push_back({{0.0, length, i}});
      masses_.push_back(mass(lineages_.back()));
    }
    node_time_.assign(static_cast<std::size_t>(n), 0.0);
    overlap_.emplace(0.0, n);
    overlap_.emplace(length, 0);
  }

  MarginalTreeSequence run() {
    std::exponential_distribution<double> exp1{1.0};
    double t = 0.0;
    while (!lineages_.empty()) {
      const auto k = static_cast<double>(lineages_.size());
      if (k < 2) throw std::logic_error("lineage left with unresolved ancestral material");
      const double recomb = std::accumulate(masses_.begin(), masses_.end(), 0.0);
      const double pairs = 0.5 * k * (k - 1.0);
      t += eta_.waiting_time(t, recomb, pairs, exp1(rng_));
      const double coal = pairs / eta_.size_at(t);
      if (uniform01(rng_) * (recomb + coal) < recomb) {
        recombine(recomb);
      } else {
        coalesce(t);
      }
    }
    return build_trees();
  }

 private:
  double mass(const Lineage& lin) const {
    return 0.5 * (map_.cumulative(lin.back().right) - map_.cumulative(lin.front().left));
  }

  void recombine(double total) {
    ++recombination_events_;
    double u = uniform01(rng_) * total;
    std::size_t i = 0;
    for (; i + 1 < masses_.size(); ++i) {
      if (u < masses_[i]) break;
      u -= masses_[i];
    }
    Lineage& lin = lineages_[i];
    const double m0 = map_.cumulative(lin.front().left);
    const double m1 = map_.cumulative(lin.back().right);
    const double x = map_.inverse_cumulative(m0 + uniform01(rng_) * (m1 - m0));
    if (!(x > lin.front().left && x < lin.back().right)) return;

    std::size_t j = 0;
    while (lin[j].right <= x) ++j;
    Lineage right;
    right.reserve(lin.size() - j + 1);
    if (lin[j].left < x) {
      right.push_back({x, lin[j].right, lin[j].node});
      right.insert(right.end(), lin.begin() + static_cast<std::ptrdiff_t>(j) + 1, lin.end());
      lin[j].right = x;
      lin.resize(j + 1);
      breakpoints_.push_back(x);
    } else {
      right.assign(lin.begin() + static_cast<std::ptrdiff_t>(j), lin.end());
      lin.resize(j);
    }
    masses_[i] = mass(lin);
    masses_.push_back(mass(right));
    lineages_.push_back(std::move(right));
  }

  std::map<double, int>::iterator split_overlap(double x) {
    auto it = overlap_.lower_bound(x);
    if (it != overlap_.end() && it->first == x) return it;
    return overlap_.emplace_hint(it, x, std::prev(it)->second);
  }

  void coalesce(double t) {
    const auto k = lineages_.size();
    auto a = std::uniform_int_distribution<std::size_t>{0, k - 1}(rng_);
    auto b = std::uniform_int_distribution<std::size_t>{0, k - 2}(rng_);
    if (b >= a) ++b;

    Lineage merged = merge(lineages_[a], lineages_[b], t);
    // Remove the higher index first so the lower stays valid.
    for (auto idx : {std::max(a, b), std::min(a, b)}) {
      lineages_[idx] = std::move(lineages_.back());
      masses_[idx] = masses_.back();
      lineages_.pop_back();
      masses_.pop_back();
    }
    if (!merged.empty()) {
      masses_.push_back(mass(merged));
      lineages_.push_back(std::move(merged));
    }
  }

  Lineage merge(const Lineage& A, const Lineage& B, double t) {
    Lineage out;
    out.reserve(A.size() + B.size());
    int parent = -1;
    std::size_t ia = 0;
    std::size_t ib = 0;
    Segment x{};
    Segment y{};
    if (ia < A.size()) x = A[ia];
    if (ib < B.size()) y = B[ib];
    auto next_x = [&] { if (++ia < A.size()) x = A[ia]; };
    auto next_y = [&] { if (++ib < B.size()) y = B[ib]; };

    while (ia < A.size() || ib < B.size()) {
      if (ib >= B.size() || (ia < A.size() && x.right <= y.left)) {
        out.push_back(x);
        next_x();
        continue;
      }
      if (ia >= A.size() || y.right <= x.left) {
        out.push_back(y);
        next_y();
        continue;
      }
      if (x.left < y.left) {
        out.push_back({x.left, y.left, x.node});
        x.left = y.left;
      } else if (y.left < x.left) {
        out.push_back({y.left, x.left, y.node});
        y.left = x.left;
      }
      const double l = x.left;
      const double r = std::min(x.right, y.right);
      if (parent < 0) {
        parent = static_cast<int>(node_time_.size());
        node_time_.push_back(t);
      }
      edges_.push_back({l, r, parent, x.node});
      edges_.push_back({l, r, parent, y.node});
      auto it = split_overlap(l);
      split_overlap(r);
      for (; it->first < r; ++it) {
        if (it->second == 2) {
          it->second = 0;  // all samples share an ancestor here
        } else {
          --it->second;
          out.push_back({it->first, std::next(it)->first, parent});
        }
      }
      x.left = r;
      y.left = r;
      if (x.right == r) next_x();
      if (y.right == r) next_y();
    }
    squash(out);
    return out;
  }

  MarginalTreeSequence build_trees() {
    std::sort(breakpoints_.begin(), breakpoints_.end());
    breakpoints_.erase(std::unique(breakpoints_.begin(), breakpoints_.end()), breakpoints_.end());
    std::vector<double> bounds;
    bounds.reserve(breakpoints_.size() + 2);
    bounds.push_back(0.0);
    bounds.insert(bounds.end(), breakpoints_.begin(), breakpoints_.end());
    bounds.push_back(length_);

    std::vector<std::size_t> by_left(edges_.size());
    std::iota(by_left.begin(), by_left.end(), 0);
    auto by_right = by_left;
    std::stable_sort(by_left.begin(), by_left.end(),
                     [&](auto i, auto j) { return edges_[i].left < edges_[j].left; });
    std::stable_sort(by_right.begin(), by_right.end(),
                     [&](auto i, auto j) { return edges_[i].right < edges_[j].right; });

    const auto num_nodes = node_time_.size();
    std::vector<int> parent(num_nodes, -1);
    std::vector<int> local(num_nodes, -1);
    std::vector<int> touched;

    MarginalTreeSequence seq;
    seq.num_samples = n_;
    seq.length = length_;
    seq.recombination_events = recombination_events_;
    seq.trees.reserve(bounds.size() - 1);

    const int size = 2 * n_ - 1;
    std::size_t ins = 0;
    std::size_t rem = 0;
    for (std::size_t iv = 0; iv + 1 < bounds.size(); ++iv) {
      const double a = bounds[iv];
      while (rem < edges_.size() && edges_[by_right[rem]].right <= a) {
        parent[edges_[by_right[rem]].child] = -1;
        ++rem;
      }
      while (ins < edges_.size() && edges_[by_left[ins]].left <= a) {
        const auto& e = edges_[by_left[ins]];
        if (e.right > a) parent[e.child] = e.parent;
        ++ins;
      }

      MarginalTree tree;
      tree.left = a;
      tree.right = bounds[iv + 1];
      tree.parent.assign(static_cast<std::size_t>(size), -1);
      tree.time.assign(static_cast<std::size_t>(size), 0.0);
      int next = n_;
      for (int leaf = 0; leaf < n_; ++leaf) {
        int v = leaf;
        int lv = leaf;
        for (;;) {
          const int u = parent[v];
          if (u < 0) break;
          const bool fresh = local[u] < 0;
          if (fresh) {
            if (next >= size) throw std::logic_error("marginal tree is not binary");
            local[u] = next++;
            touched.push_back(u);
            tree.time[local[u]] = node_time_[u];
          }
          tree.parent[lv] = local[u];
          if (!fresh) break;
          v = u;
          lv = local[u];
        }
      }
      if (next != size) throw std::logic_error("marginal tree is not binary");
      for (int v = n_; v < size; ++v) {
        if (tree.parent[v] < 0) tree.root = v;
      }
      for (int u : touched) local[u] = -1;
      touched.clear();
      seq.trees.push_back(std::move(tree));
    }
    return seq;
  }

  int n_;
  double length_;
  const hotspot::RecombMap& map_;
  const PopSizeHistory& eta_;
  Rng& rng_;

  std::vector<Lineage> lineages_;
  std::vector<double> masses_;
  std::map<double, int> overlap_;  // #lineages carrying [key, next key)
  std::vector<double> node_time_;
  std::vector<Edge> edges_;
  std::vector<double> breakpoints_;
  long recombination_events_ = 0;
};

}  // namespace

MarginalTreeSequence simulate_trees(int n, double length, const hotspot::RecombMap& map,
                                    const PopSizeHistory& eta, Rng& rng) {
  if (n < 2) throw std::invalid_argument("simulate_trees needs at least 2 samples");
  if (map.empty()) throw std::invalid_argument("simulate_trees needs a non-empty recombination map");
  if (!(length > 0.0) || length > map.length())
    throw std::invalid_argument("recombination map does not cover the simulated region");
  HudsonSimulator sim{n, length, map, eta, rng};
  return sim.run();
}

SnpMatrix drop_mutations(const MarginalTreeSequence& trees, double theta_per_bp, Rng& rng) {
  if (!(theta_per_bp >= 0.0)) throw std::invalid_argument("mutation rate must be >= 0");
  const int n = trees.num_samples;
  std::vector<std::pair<double, std::vector<unsigned char>>> sites;
  std::vector<double> cum;
  for (const auto& tree : trees.trees) {
    if (theta_per_bp == 0.0) break;
    const double total = tree.total_branch_length();
    const double lambda = 0.5 * theta_per_bp * (tree.right - tree.left) * total;
    const int count = std::poisson_distribution<int>{lambda}(rng);
    if (count == 0) continue;
    cum.resize(tree.parent.size());
    double acc = 0.0;
    for (std::size_t v = 0; v < tree.parent.size(); ++v) {
      acc += tree.branch_length(static_cast<int>(v));
      cum[v] = acc;
    }
    for (int m = 0; m < count; ++m) {
      const double pos = tree.left + uniform01(rng) * (tree.right - tree.left);
      const double u = uniform01(rng) * acc;
      auto node = static_cast<int>(std::upper_bound(cum.begin(), cum.end(), u) - cum.begin());
      node = std::min(node, static_cast<int>(cum.size()) - 1);
      while (tree.branch_length(node) <= 0.0) --node;  // u landed on a boundary
      std::vector<unsigned char> bits;
      tree.leaves_below(node, bits);
      sites.emplace_back(pos, std::move(bits));
    }
  }
  std::sort(sites.begin(), sites.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  SnpMatrix out{n, static_cast<int>(sites.size())};
  for (int j = 0; j < out.cols; ++j) {
    out.positions[j] = sites[j].first;
    for (int i = 0; i < n; ++i) out.at(i, j) = sites[j].second[i];
  }
  return out;
}

void recode_minor_allele(SnpMatrix& m) {
  for (int j = 0; j < m.cols; ++j) {
    if (2 * m.column_sum(j) > m.rows) {
      for (int i = 0; i < m.rows; ++i) m.at(i, j) = static_cast<std::uint8_t>(1 - m.at(i, j));
    }
  }
}

SnpMatrix pair_to_diploid(const SnpMatrix& m, Rng& rng) {
  if (m.rows % 2 != 0) throw OddSampleCount{};
  std::vector<int> order(static_cast<std::size_t>(m.rows));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  SnpMatrix out{m.rows / 2, m.cols};
  out.positions = m.positions;
  for (int r = 0; r < out.rows; ++r) {
    for (int j = 0; j < m.cols; ++j) {
      out.at(r, j) = static_cast<std::uint8_t>(m.at(order[2 * r], j) + m.at(order[2 * r + 1], j));
    }
  }
  return out;
}

}  // namespace popinfer::coalescent

#include "popinfer/training/abc.hpp"

#include <algorithm>
#include <cmath>

namespace popinfer::training {

namespace {

// Statistics from per-column derived-allele counts of `rows` sequences with
// `ploidy` alleles each.
Stats from_columns(const std::vector<std::vector<int>>& cols, int rows, int raw_snps) {
  Stats s(5, 0.0);
  s[0] = raw_snps;
  if (rows < 2) return s;
  const double pairs = 0.5 * rows * (rows - 1);
  int ploidy = 1;
  for (const auto& c : cols)
    for (int v : c) ploidy = std::max(ploidy, v);
  const int alleles = rows * ploidy;
  double diff = 0.0;
  for (const auto& c : cols) {
    for (int i = 0; i < rows; ++i)
      for (int j = i + 1; j < rows; ++j) diff += std::abs(c[i] - c[j]);
    int count = 0;
    for (int v : c) count += v;
    const int minor = std::min(count, alleles - count);
    if (minor >= 1 && minor <= 3) s[1 + minor] += 1.0;
  }
  s[1] = diff / pairs;
  return s;
}

}  // namespace

Stats default_summaries(const coalescent::SnpMatrix& m, int raw_snps) {
  std::vector<std::vector<int>> cols(static_cast<std::size_t>(m.cols), std::vector<int>(m.rows));
  for (int j = 0; j < m.cols; ++j)
    for (int i = 0; i < m.rows; ++i) cols[j][i] = m.at(i, j);
  return from_columns(cols, m.rows, raw_snps >= 0 ? raw_snps : m.cols);
}

Stats window_summaries(const hotspot::LabeledWindow& w) {
  std::vector<std::vector<int>> cols(static_cast<std::size_t>(w.positions), std::vector<int>(w.rows));
  for (int j = 0; j < w.positions; ++j)
    for (int i = 0; i < w.rows; ++i) cols[j][i] = static_cast<int>(std::lround(w.bit(i, j)));
  return from_columns(cols, w.rows, w.raw_snps);
}

double StandardizedDistance::operator()(const Stats& a, const Stats& b) const {
  if (a.size() != b.size() || a.size() != scale.size()) throw std::invalid_argument("statistic length mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double z = (a[i] - b[i]) / scale[i];
    sum += z * z;
  }
  return std::sqrt(sum);
}

StandardizedDistance fit_standardized_distance(const std::vector<Stats>& pilot) {
  if (pilot.size() < 2) throw std::invalid_argument("need at least two pilot simulations");
  const auto dim = pilot.front().size();
  StandardizedDistance dist;
  dist.scale.assign(dim, 1.0);
  for (std::size_t k = 0; k < dim; ++k) {
    double mean = 0.0;
    for (const auto& s : pilot) mean += s.at(k);
    mean /= static_cast<double>(pilot.size());
    double var = 0.0;
    for (const auto& s : pilot) var += (s[k] - mean) * (s[k] - mean);
    var /= static_cast<double>(pilot.size() - 1);
    if (var > 0.0) dist.scale[k] = std::sqrt(var);
  }
  return dist;
}

}  // namespace popinfer::training

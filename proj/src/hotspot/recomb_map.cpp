#include "popinfer/hotspot/recomb_map.hpp"

#include <algorithm>
#include <stdexcept>

namespace popinfer::hotspot {

RecombMap::RecombMap(std::vector<Piece> pieces, double length)
    : pieces_{std::move(pieces)}, length_{length} {
  if (pieces_.empty()) throw std::invalid_argument("recombination map has no pieces");
  if (!(length_ > 0.0)) throw std::invalid_argument("recombination map length must be positive");
  if (pieces_.front().start != 0.0) throw std::invalid_argument("first piece must start at 0");
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    if (!(pieces_[i].rate >= 0.0)) throw std::invalid_argument("recombination rates must be >= 0");
    if (i > 0 && !(pieces_[i].start > pieces_[i - 1].start))
      throw std::invalid_argument("piece starts must increase strictly");
  }
  if (!(pieces_.back().start < length_)) throw std::invalid_argument("piece starts beyond map length");
  cum_.resize(pieces_.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    cum_[i] = acc;
    acc += pieces_[i].rate * (piece_end(i) - pieces_[i].start);
  }
}

RecombMap RecombMap::flat(double rate, double length) { return RecombMap{{{0.0, rate}}, length}; }

double RecombMap::rate_at(double x) const {
  if (empty() || x < 0.0 || x >= length_) throw std::out_of_range("position outside recombination map");
  auto it = std::upper_bound(pieces_.begin(), pieces_.end(), x,
                             [](double v, const Piece& p) { return v < p.start; });
  return std::prev(it)->rate;
}

double RecombMap::cumulative(double x) const {
  if (empty()) return 0.0;
  x = std::clamp(x, 0.0, length_);
  auto it = std::upper_bound(pieces_.begin(), pieces_.end(), x,
                             [](double v, const Piece& p) { return v < p.start; });
  const auto i = static_cast<std::size_t>(std::distance(pieces_.begin(), it)) - 1;
  return cum_[i] + pieces_[i].rate * (x - pieces_[i].start);
}

double RecombMap::inverse_cumulative(double mass) const {
  if (empty()) throw std::logic_error("inverse_cumulative on empty map");
  // Last piece whose start mass is < mass, skipping zero-rate pieces.
  std::size_t i = 0;
  for (std::size_t j = 0; j < pieces_.size(); ++j) {
    if (pieces_[j].rate > 0.0 && cum_[j] <= mass) i = j;
  }
  if (pieces_[i].rate <= 0.0) return pieces_[i].start;
  const double x = pieces_[i].start + (mass - cum_[i]) / pieces_[i].rate;
  return std::clamp(x, pieces_[i].start, piece_end(i));
}

double RecombMap::mean_rate(double a, double b) const {
  if (empty() || a < 0.0 || b > length_ || !(b > a))
    throw std::out_of_range("subwindow outside recombination map");
  return (cumulative(b) - cumulative(a)) / (b - a);
}

RecombMap RecombMap::scaled(double factor) const {
  auto pieces = pieces_;
  for (auto& p : pieces) p.rate *= factor;
  return RecombMap{std::move(pieces), length_};
}

double genome_median_rate(std::span<const RecombMap> maps) {
  std::vector<std::pair<double, double>> weighted;  // (rate, bp)
  double total = 0.0;
  for (const auto& map : maps) {
    for (std::size_t i = 0; i < map.pieces().size(); ++i) {
      const double w = map.piece_end(i) - map.pieces()[i].start;
      weighted.emplace_back(map.pieces()[i].rate, w);
      total += w;
    }
  }
  if (weighted.empty()) throw std::invalid_argument("genome_median_rate needs at least one map");
  std::sort(weighted.begin(), weighted.end());
  double acc = 0.0;
  for (const auto& [rate, w] : weighted) {
    acc += w;
    if (acc >= 0.5 * total) return rate;
  }
  return weighted.back().first;
}

}  // namespace popinfer::hotspot

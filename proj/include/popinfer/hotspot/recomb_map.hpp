#pragma once

#include <span>
#include <vector>

namespace popinfer::hotspot {

// Piecewise-constant population-scaled recombination rate (rho = 4 Ne r per
// bp) over [0, length).
class RecombMap {
 public:
  struct Piece {
    double start;
    double rate;
  };

  RecombMap() = default;
  RecombMap(std::vector<Piece> pieces, double length);

  static RecombMap flat(double rate, double length);

  bool empty() const noexcept { return pieces_.empty(); }
  double length() const noexcept { return length_; }
  const std::vector<Piece>& pieces() const noexcept { return pieces_; }

  // End coordinate of piece i.
  double piece_end(std::size_t i) const noexcept {
    return i + 1 < pieces_.size() ? pieces_[i + 1].start : length_;
  }

  double rate_at(double x) const;
  // Width-weighted mean rate over [a, b).
  double mean_rate(double a, double b) const;
  // Integrated rate over [0, x).
  double cumulative(double x) const;
  // Smallest x with cumulative(x) == mass, for mass in [0, total()].
  double inverse_cumulative(double mass) const;
  double total() const { return cumulative(length_); }

  RecombMap scaled(double factor) const;

 private:
  std::vector<Piece> pieces_;
  std::vector<double> cum_;  // cumulative mass at each piece start
  double length_ = 0.0;
};

// Per-bp median rate across a collection of maps; each piece is weighted by
// its width. For an even split the lower central value is returned.
double genome_median_rate(std::span<const RecombMap> maps);

}  // namespace popinfer::hotspot

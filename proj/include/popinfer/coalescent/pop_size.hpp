#pragma once

#include <vector>

namespace popinfer::coalescent {

// Piecewise-constant relative population size eta(t), t in coalescent units.
class PopSizeHistory {
 public:
  struct Epoch {
    double start;
    double relative_size;
  };

  PopSizeHistory() : epochs_{{0.0, 1.0}} {}
  explicit PopSizeHistory(std::vector<Epoch> epochs);

  static PopSizeHistory constant() { return {}; }

  const std::vector<Epoch>& epochs() const noexcept { return epochs_; }
  double size_at(double t) const;

  // Time until the next event of a process whose hazard at time s is
  // fixed_rate + pair_rate / size(s), starting at `now`, given a standard
  // exponential draw. Unused hazard carries over epoch boundaries.
  // Returns +inf when the hazard is zero from `now` onwards.
  double waiting_time(double now, double fixed_rate, double pair_rate,
                      double exp_draw) const;

 private:
  std::vector<Epoch> epochs_;
};

}  // namespace popinfer::coalescent

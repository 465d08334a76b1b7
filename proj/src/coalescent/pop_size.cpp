#include "popinfer/coalescent/pop_size.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace popinfer::coalescent {

PopSizeHistory::PopSizeHistory(std::vector<Epoch> epochs) : epochs_{std::move(epochs)} {
  if (epochs_.empty()) throw std::invalid_argument("population size history needs an epoch");
  if (epochs_.front().start != 0.0) throw std::invalid_argument("first epoch must start at 0");
  for (std::size_t i = 0; i < epochs_.size(); ++i) {
    if (!(epochs_[i].relative_size > 0.0) || !std::isfinite(epochs_[i].relative_size))
      throw std::invalid_argument("relative population sizes must be positive");
    if (i > 0 && !(epochs_[i].start > epochs_[i - 1].start))
      throw std::invalid_argument("epoch start times must increase strictly");
  }
}

double PopSizeHistory::size_at(double t) const {
  double size = epochs_.front().relative_size;
  for (const auto& e : epochs_) {
    if (e.start > t) break;
    size = e.relative_size;
  }
  return size;
}

double PopSizeHistory::waiting_time(double now, double fixed_rate, double pair_rate,
                                    double exp_draw) const {
  std::size_t e = 0;
  while (e + 1 < epochs_.size() && epochs_[e + 1].start <= now) ++e;
  double t = now;
  double remaining = exp_draw;
  for (;; ++e) {
    const double rate = fixed_rate + pair_rate / epochs_[e].relative_size;
    const double end = e + 1 < epochs_.size() ? epochs_[e + 1].start
                                              : std::numeric_limits<double>::infinity();
    if (rate > 0.0) {
      const double span = end - t;
      if (remaining < rate * span) return t + remaining / rate - now;
      remaining -= rate * span;
    } else if (!std::isfinite(end)) {
      return std::numeric_limits<double>::infinity();
    }
    t = end;
  }
}

}  // namespace popinfer::coalescent

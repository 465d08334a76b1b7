#include "popinfer/hotspot/window.hpp"

#include <stdexcept>

namespace popinfer::hotspot {

std::vector<double> encode_window(const coalescent::SnpMatrix& m, double window_length, int n, int d) {
  if (m.rows != n || m.cols != d) throw std::invalid_argument("encode_window: dimension mismatch");
  if (!(window_length > 0.0)) throw std::invalid_argument("encode_window: window length must be positive");
  std::vector<double> gaps(static_cast<std::size_t>(d), 0.0);
  for (int j = 0; j + 1 < d; ++j) gaps[j] = (m.positions[j + 1] - m.positions[j]) / window_length;

  std::vector<double> out(static_cast<std::size_t>(n) * d * kChannels);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) {
      const auto base = (static_cast<std::size_t>(i) * d + j) * kChannels;
      out[base] = m.at(i, j);
      out[base + 1] = gaps[j];
    }
  }
  return out;
}

}  // namespace popinfer::hotspot

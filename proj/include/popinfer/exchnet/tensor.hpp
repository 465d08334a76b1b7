#pragma once

#include <cstddef>
#include <functional>
#include <numeric>
#include <vector>

namespace popinfer::exchnet {

struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> values;

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> dims)
      : shape{std::move(dims)},
        values(std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>{}), 0.0) {}

  std::size_t size() const noexcept { return values.size(); }
  double* data() noexcept { return values.data(); }
  const double* data() const noexcept { return values.data(); }
  bool operator==(const Tensor&) const = default;
};

inline std::vector<Tensor> zeros_like(const std::vector<Tensor>& ts) {
  std::vector<Tensor> out;
  out.reserve(ts.size());
  for (const auto& t : ts) out.emplace_back(t.shape);
  return out;
}

}  // namespace popinfer::exchnet

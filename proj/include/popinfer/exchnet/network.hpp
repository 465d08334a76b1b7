#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "popinfer/common/rng.hpp"
#include "popinfer/exchnet/adam.hpp"
#include "popinfer/exchnet/architecture.hpp"
#include "popinfer/exchnet/posterior.hpp"
#include "popinfer/exchnet/tensor.hpp"

namespace popinfer::exchnet {

// B windows of n x d x channels, row-major with channels fastest.
struct BatchView {
  std::span<const double> data;
  int size = 0;
  int rows = 0;
  int positions = 0;
  int channels = 2;
};

// Activations and pooling selections of one forward pass.
struct ForwardCache {
  std::uint64_t params_version = 0;
  int batch = 0;
  int rows = 0;
  int pool_m = 0;
  std::vector<double> input;
  std::vector<double> conv1;   // post-ReLU, B x n x d x F1
  std::vector<double> conv2;   // post-ReLU, B x n x d x F2
  std::vector<std::int32_t> pool_rows;  // B x d x F2 x m, in reduction order
  std::vector<double> pooled;  // B x d x F2
  std::vector<double> fc1;     // post-ReLU and dropout
  std::vector<double> fc2;
  std::vector<double> fc1_mask;  // dropout scale; empty when dropout is off
  std::vector<double> fc2_mask;
  std::vector<double> head;    // raw head outputs, B x output_size
};

struct ForwardResult {
  std::vector<Posterior> posteriors;
  ForwardCache cache;
};

struct ShapeMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct NonFiniteActivation : std::runtime_error {
  NonFiniteActivation() : std::runtime_error("non-finite network output (training diverged?)") {}
};
struct StaleCache : std::logic_error {
  StaleCache() : std::logic_error("forward cache predates the current parameters") {}
};

// Index of each parameter tensor in ExchNet::params().
enum ParamIndex : std::size_t {
  kConv1W, kConv1B, kConv2W, kConv2B, kFc1W, kFc1B, kFc2W, kFc2B, kHeadW, kHeadB, kNumParams
};

// Row-tied convolutional feature map per row, symmetric pooling across rows,
// then a dense head mapping pooled features to a posterior.
class ExchNet {
 public:
  explicit ExchNet(Architecture arch);

  // He-uniform weights from `seed`, zero biases (continuous heads get their
  // biases spread over the target range).
  static ExchNet initialized(const Architecture& arch, std::uint64_t seed);

  const Architecture& architecture() const noexcept { return arch_; }
  const std::vector<Tensor>& params() const noexcept { return params_; }
  // Mutable access bumps the version so outstanding caches become stale.
  std::vector<Tensor>& mutable_params() noexcept {
    ++version_;
    return params_;
  }
  const AdamState& optimizer() const noexcept { return adam_; }
  AdamState& mutable_optimizer() noexcept { return adam_; }
  std::uint64_t version() const noexcept { return version_; }

  // Pass a dropout RNG only when training; inference never drops units.
  ForwardResult forward(const BatchView& batch, Rng* dropout_rng = nullptr) const;
  std::vector<Tensor> backward(const ForwardCache& cache, std::span<const double> head_grads) const;
  void apply_gradients(const std::vector<Tensor>& grads, const AdamConfig& cfg = {});

 private:
  Architecture arch_;
  std::vector<Tensor> params_;
  AdamState adam_;
  std::uint64_t version_ = 1;
};

// Mean of the top max(1, ceil(n/10)) values in each column of an n x F
// matrix, reduced in descending order.
std::vector<double> top_decile_mean_pool(std::span<const double> features, int n, int f);

// True when both caches took the same ReLU branches and pooling selections.
bool same_activation_pattern(const ForwardCache& a, const ForwardCache& b);

}  // namespace popinfer::exchnet

#pragma once

#include <string>
#include <string_view>

namespace popinfer::exchnet {

enum class Pooling { TopDecileMean, Mean, Max };
enum class HeadKind { Softmax, Gaussian, Mixture };

struct Architecture {
  int positions = 24;  // SNP axis length d
  int input_channels = 2;
  int patch = 5;
  int conv1_filters = 32;
  int conv2_filters = 64;
  int fc1_units = 128;
  int fc2_units = 128;
  Pooling pooling = Pooling::TopDecileMean;
  HeadKind head = HeadKind::Softmax;
  int num_classes = 2;
  int mixture_components = 10;
  // Continuous heads model log(k) instead of k.
  bool log_space = false;
  // Head-space target range used to place the initial continuous-head biases;
  // ignored when low == high.
  double target_low = 0.0;
  double target_high = 0.0;
  // Inverted dropout on the fully connected layers; 0 disables it.
  double dropout = 0.0;

  int output_size() const noexcept;
  int flat_features() const noexcept { return positions * conv2_filters; }
  void validate() const;
  bool operator==(const Architecture&) const = default;
};

// Config names: softmax, gaussian, lognormal, mixture, lognormal_mixture.
std::string head_name(const Architecture& arch);
void set_head(Architecture& arch, std::string_view name);
std::string pooling_name(Pooling p);
Pooling parse_pooling(std::string_view name);

// Number of rows averaged by the top-decile pool: max(1, ceil(n / 10)).
int decile_size(int n) noexcept;

}  // namespace popinfer::exchnet

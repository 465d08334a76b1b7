#include "popinfer/exchnet/architecture.hpp"

#include <stdexcept>

namespace popinfer::exchnet {

int Architecture::output_size() const noexcept {
  switch (head) {
    case HeadKind::Softmax: return num_classes;
    case HeadKind::Gaussian: return 2;
    case HeadKind::Mixture: return 3 * mixture_components;
  }
  return 0;
}

void Architecture::validate() const {
  if (input_channels < 1) throw std::invalid_argument("network needs at least one input channel");
  if (patch < 1) throw std::invalid_argument("patch length must be >= 1");
  if (positions < patch) throw std::invalid_argument("window must have at least `patch` SNPs");
  if (conv1_filters < 1 || conv2_filters < 1 || fc1_units < 1 || fc2_units < 1)
    throw std::invalid_argument("layer widths must be positive");
  if (head == HeadKind::Softmax && num_classes < 2) throw std::invalid_argument("softmax head needs >= 2 classes");
  if (head == HeadKind::Mixture && mixture_components < 1)
    throw std::invalid_argument("mixture head needs >= 1 component");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw std::invalid_argument("dropout must lie in [0, 1)");
  if (target_high < target_low) throw std::invalid_argument("target range is inverted");
}

std::string head_name(const Architecture& arch) {
  switch (arch.head) {
    case HeadKind::Softmax: return "softmax";
    case HeadKind::Gaussian: return arch.log_space ? "lognormal" : "gaussian";
    case HeadKind::Mixture: return arch.log_space ? "lognormal_mixture" : "mixture";
  }
  return "?";
}

void set_head(Architecture& arch, std::string_view name) {
  if (name == "softmax") {
    arch.head = HeadKind::Softmax;
    arch.log_space = false;
  } else if (name == "gaussian" || name == "lognormal") {
    arch.head = HeadKind::Gaussian;
    arch.log_space = name == "lognormal";
  } else if (name == "mixture" || name == "lognormal_mixture") {
    arch.head = HeadKind::Mixture;
    arch.log_space = name == "lognormal_mixture";
  } else {
    throw std::invalid_argument("unknown head kind '" + std::string{name} + "'");
  }
}

std::string pooling_name(Pooling p) {
  switch (p) {
    case Pooling::TopDecileMean: return "top_decile";
    case Pooling::Mean: return "mean";
    case Pooling::Max: return "max";
  }
  return "?";
}

Pooling parse_pooling(std::string_view name) {
  if (name == "top_decile") return Pooling::TopDecileMean;
  if (name == "mean") return Pooling::Mean;
  if (name == "max") return Pooling::Max;
  throw std::invalid_argument("unknown pooling '" + std::string{name} + "'");
}

int decile_size(int n) noexcept { return n <= 10 ? 1 : (n + 9) / 10; }

}  // namespace popinfer::exchnet

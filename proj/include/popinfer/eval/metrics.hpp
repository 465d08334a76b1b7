#pragma once

#include <iosfwd>
#include <span>
#include <stdexcept>
#include <vector>

#include "popinfer/exchnet/posterior.hpp"

namespace popinfer::eval {

struct CalibrationBin {
  double center = 0.0;
  double frequency = 0.0;  // fraction of label-1 data; NaN when empty
  double mean_predicted = 0.0;  // NaN when empty
  std::size_t count = 0;
  bool occupied() const noexcept { return count > 0; }
};

struct CalibrationCurve {
  std::vector<CalibrationBin> bins;

  // Largest |frequency - mean_predicted| over bins holding at least
  // min_count samples; 0 when no bin qualifies.
  double max_deviation(std::size_t min_count) const;
};

// Equal-width bins on [0, 1]; a prediction of exactly 1 falls in the last bin.
CalibrationCurve calibration_curve(std::span<const double> preds, std::span<const int> labels, int n_bins = 10);

struct RocPoint {
  double fpr;
  double tpr;
};

struct RocCurve {
  std::vector<RocPoint> points;  // from (0, 0) to (1, 1)
  double auc = 0.0;
};

struct SingleClass : std::invalid_argument {
  SingleClass() : std::invalid_argument("ROC/calibration metrics need both classes present") {}
};

// Threshold sweep from the highest score down; equal scores enter together.
RocCurve roc_auc(std::span<const double> scores, std::span<const int> labels);

double accuracy(std::span<const double> preds, std::span<const int> labels, double threshold = 0.5);

struct Interval {
  double lower;
  double upper;
};

// Central credible interval of the posterior on the original scale of k
// (log-space posteriors are exponentiated).
Interval credible_interval(const exchnet::Posterior& post, double level = 0.95);

// Posterior mean on the original scale.
double posterior_mean(const exchnet::Posterior& post);

// Fraction of truths inside their central credible interval.
double ci_coverage(std::span<const exchnet::Posterior> posts, std::span<const double> truths, double level = 0.95);

struct ConstantInput : std::invalid_argument {
  ConstantInput() : std::invalid_argument("rank correlation undefined for constant input") {}
};

// Average ranks for ties, 1-based.
std::vector<double> average_ranks(std::span<const double> xs);
double spearman(std::span<const double> xs, std::span<const double> ys);

// Plot data: one x,y pair per row.
void write_calibration_csv(std::ostream& out, const CalibrationCurve& curve);
void write_roc_csv(std::ostream& out, const RocCurve& curve);

}  // namespace popinfer::eval

#include "popinfer/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include <boost/math/distributions/normal.hpp>
#include <fmt/core.h>

namespace popinfer::eval {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_lengths(std::size_t a, std::size_t b) {
  if (a != b) throw std::invalid_argument("inputs have different lengths");
}

void check_level(double level) {
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("credible level must lie in (0, 1)");
}

double normal_quantile(double mu, double tau, double p) {
  return mu + boost::math::quantile(boost::math::normal{}, p) / std::sqrt(tau);
}

double mixture_cdf(const exchnet::MixturePosterior& mix, double x) {
  double c = 0.0;
  for (const auto& comp : mix.components)
    c += comp.weight * boost::math::cdf(boost::math::normal{comp.mu, 1.0 / std::sqrt(comp.tau)}, x);
  return c;
}

// Bisection on the mixture CDF in head space.
double mixture_quantile(const exchnet::MixturePosterior& mix, double p) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& c : mix.components) {
    const double sd = 1.0 / std::sqrt(c.tau);
    lo = std::min(lo, c.mu - 40.0 * sd);
    hi = std::max(hi, c.mu + 40.0 * sd);
  }
  while (hi - lo > 1e-8) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (mixture_cdf(mix, mid) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double CalibrationCurve::max_deviation(std::size_t min_count) const {
  double worst = 0.0;
  for (const auto& b : bins)
    if (b.count > 0 && b.count >= min_count) worst = std::max(worst, std::abs(b.frequency - b.mean_predicted));
  return worst;
}

CalibrationCurve calibration_curve(std::span<const double> preds, std::span<const int> labels, int n_bins) {
  check_lengths(preds.size(), labels.size());
  if (n_bins < 1) throw std::invalid_argument("need at least one calibration bin");
  std::vector<double> pred_sum(n_bins, 0.0);
  std::vector<double> pos(n_bins, 0.0);
  CalibrationCurve curve;
  curve.bins.resize(n_bins);
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const double p = preds[i];
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("predicted probabilities must lie in [0, 1]");
    const int b = std::min(n_bins - 1, static_cast<int>(p * n_bins));
    ++curve.bins[b].count;
    pred_sum[b] += p;
    pos[b] += labels[i] == 1 ? 1.0 : 0.0;
  }
  for (int b = 0; b < n_bins; ++b) {
    auto& bin = curve.bins[b];
    bin.center = (b + 0.5) / n_bins;
    const auto c = static_cast<double>(bin.count);
    bin.frequency = bin.count ? pos[b] / c : kNaN;
    bin.mean_predicted = bin.count ? pred_sum[b] / c : kNaN;
  }
  return curve;
}

RocCurve roc_auc(std::span<const double> scores, std::span<const int> labels) {
  check_lengths(scores.size(), labels.size());
  const auto positives = static_cast<double>(std::count(labels.begin(), labels.end(), 1));
  const auto negatives = static_cast<double>(labels.size()) - positives;
  if (positives == 0 || negatives == 0) throw SingleClass{};
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] > scores[b]; });
  RocCurve roc;
  roc.points.push_back({0.0, 0.0});
  double tp = 0.0;
  double fp = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    const double s = scores[order[i]];
    for (; i < order.size() && scores[order[i]] == s; ++i) (labels[order[i]] == 1 ? tp : fp) += 1.0;
    const RocPoint next{fp / negatives, tp / positives};
    const auto& prev = roc.points.back();
    roc.auc += (next.fpr - prev.fpr) * (next.tpr + prev.tpr) / 2.0;
    roc.points.push_back(next);
  }
  return roc;
}

double accuracy(std::span<const double> preds, std::span<const int> labels, double threshold) {
  check_lengths(preds.size(), labels.size());
  if (preds.empty()) throw std::invalid_argument("accuracy of an empty set");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) correct += (preds[i] > threshold ? 1 : 0) == labels[i];
  return static_cast<double>(correct) / static_cast<double>(preds.size());
}

Interval credible_interval(const exchnet::Posterior& post, double level) {
  check_level(level);
  const double lo_p = (1.0 - level) / 2.0;
  const double hi_p = 1.0 - lo_p;
  if (const auto* g = std::get_if<exchnet::GaussianPosterior>(&post)) {
    Interval iv{normal_quantile(g->mu, g->tau, lo_p), normal_quantile(g->mu, g->tau, hi_p)};
    if (g->log_space) iv = {std::exp(iv.lower), std::exp(iv.upper)};
    return iv;
  }
  if (const auto* m = std::get_if<exchnet::MixturePosterior>(&post)) {
    Interval iv{mixture_quantile(*m, lo_p), mixture_quantile(*m, hi_p)};
    if (m->log_space) iv = {std::exp(iv.lower), std::exp(iv.upper)};
    return iv;
  }
  throw std::invalid_argument("credible intervals need a continuous posterior");
}

double posterior_mean(const exchnet::Posterior& post) {
  if (const auto* g = std::get_if<exchnet::GaussianPosterior>(&post))
    return g->log_space ? std::exp(g->mu + 0.5 / g->tau) : g->mu;
  if (const auto* m = std::get_if<exchnet::MixturePosterior>(&post)) {
    double mean = 0.0;
    for (const auto& c : m->components) mean += c.weight * (m->log_space ? std::exp(c.mu + 0.5 / c.tau) : c.mu);
    return mean;
  }
  throw std::invalid_argument("posterior mean needs a continuous posterior");
}

double ci_coverage(std::span<const exchnet::Posterior> posts, std::span<const double> truths, double level) {
  check_level(level);
  check_lengths(posts.size(), truths.size());
  if (posts.empty()) throw std::invalid_argument("coverage of an empty set");
  std::size_t inside = 0;
  for (std::size_t i = 0; i < posts.size(); ++i) {
    const auto iv = credible_interval(posts[i], level);
    inside += truths[i] >= iv.lower && truths[i] <= iv.upper;
  }
  return static_cast<double>(inside) / static_cast<double>(posts.size());
}

std::vector<double> average_ranks(std::span<const double> xs) {
  std::vector<std::size_t> order(xs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return xs[a] < xs[b]; });
  std::vector<double> ranks(xs.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && xs[order[j]] == xs[order[i]]) ++j;
    const double avg = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (auto k = i; k < j; ++k) ranks[order[k]] = avg;
    i = j;
  }
  return ranks;
}

double spearman(std::span<const double> xs, std::span<const double> ys) {
  check_lengths(xs.size(), ys.size());
  if (xs.size() < 2) throw std::invalid_argument("rank correlation needs at least two points");
  const auto rx = average_ranks(xs);
  const auto ry = average_ranks(ys);
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw ConstantInput{};
  return sxy / std::sqrt(sxx * syy);
}

void write_calibration_csv(std::ostream& out, const CalibrationCurve& curve) {
  out << "x,y,count\n";
  for (const auto& b : curve.bins)
    if (b.occupied()) out << fmt::format("{:.17g},{:.17g},{}\n", b.mean_predicted, b.frequency, b.count);
}

void write_roc_csv(std::ostream& out, const RocCurve& curve) {
  out << "x,y\n";
  for (const auto& p : curve.points) out << fmt::format("{:.17g},{:.17g}\n", p.fpr, p.tpr);
}

}  // namespace popinfer::eval

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <boost/math/distributions/normal.hpp>

#include "popinfer/eval/metrics.hpp"
#include "popinfer/eval/toy.hpp"

using namespace popinfer;
using namespace popinfer::eval;

TEST(Calibration, ConstantHalfOnBalancedLabels) {
  const std::vector<double> preds(1000, 0.5);
  std::vector<int> labels(1000);
  for (int i = 0; i < 1000; ++i) labels[i] = i % 2;
  const auto c = calibration_curve(preds, labels, 10);
  int occupied = 0;
  for (const auto& b : c.bins) occupied += b.occupied();
  EXPECT_EQ(occupied, 1);
  EXPECT_EQ(c.bins[5].count, 1000u);
  EXPECT_DOUBLE_EQ(c.bins[5].frequency, 0.5);
  EXPECT_TRUE(std::isnan(c.bins[0].frequency));
}

TEST(Calibration, SeparablePredictions) {
  const std::vector<double> preds{0, 0, 1, 1};
  const std::vector<int> labels{0, 0, 1, 1};
  const auto c = calibration_curve(preds, labels, 10);
  EXPECT_EQ(c.bins[0].frequency, 0.0);
  EXPECT_EQ(c.bins[9].frequency, 1.0);
  EXPECT_EQ(c.bins[9].count, 2u);
  EXPECT_EQ(c.max_deviation(1), 0.0);
}

TEST(Calibration, CalibratedPredictorStaysInBinomialBands) {
  std::mt19937_64 rng{4};
  std::vector<double> preds(50000);
  std::vector<int> labels(50000);
  for (std::size_t i = 0; i < preds.size(); ++i) {
    preds[i] = std::uniform_real_distribution<double>{}(rng);
    labels[i] = std::bernoulli_distribution{preds[i]}(rng);
  }
  const auto c = calibration_curve(preds, labels, 10);
  std::size_t total = 0;
  for (const auto& b : c.bins) {
    total += b.count;
    const double se = std::sqrt(b.mean_predicted * (1 - b.mean_predicted) / b.count);
    EXPECT_NEAR(b.frequency, b.mean_predicted, 3 * se + 1e-12);
    EXPECT_GT(b.center, 0.0);
    EXPECT_LT(b.center, 1.0);
  }
  EXPECT_EQ(total, preds.size());
}

TEST(Calibration, InputErrors) {
  const std::vector<double> p{0.5, 1.5};
  const std::vector<int> l{0, 1};
  EXPECT_THROW(calibration_curve(p, l), std::invalid_argument);
  EXPECT_THROW(calibration_curve(std::vector<double>{0.1}, l), std::invalid_argument);
}

TEST(Roc, PerfectAndReversed) {
  const std::vector<double> s{0, 0, 1, 1, 1};
  const std::vector<int> l{0, 0, 1, 1, 1};
  EXPECT_DOUBLE_EQ(roc_auc(s, l).auc, 1.0);
  const std::vector<double> r{1, 1, 0, 0, 0};
  EXPECT_DOUBLE_EQ(roc_auc(r, l).auc, 0.0);
}

TEST(Roc, TiesCountHalf) {
  const std::vector<double> s{0.5, 0.5};
  const std::vector<int> l{0, 1};
  EXPECT_DOUBLE_EQ(roc_auc(s, l).auc, 0.5);
}

TEST(Roc, MatchesPairCountingOracle) {
  std::mt19937_64 rng{5};
  std::vector<double> s(400);
  std::vector<int> l(400);
  for (std::size_t i = 0; i < s.size(); ++i) {
    l[i] = std::bernoulli_distribution{0.4}(rng);
    s[i] = std::round(std::normal_distribution<double>{l[i] * 0.8, 1.0}(rng) * 4) / 4;  // induces ties
  }
  double wins = 0, pairs = 0;
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = 0; j < s.size(); ++j)
      if (l[i] == 1 && l[j] == 0) {
        pairs += 1;
        wins += s[i] > s[j] ? 1.0 : s[i] == s[j] ? 0.5 : 0.0;
      }
  const auto roc = roc_auc(s, l);
  EXPECT_NEAR(roc.auc, wins / pairs, 1e-12);
  for (std::size_t k = 1; k < roc.points.size(); ++k) {
    EXPECT_GE(roc.points[k].fpr, roc.points[k - 1].fpr);
    EXPECT_GE(roc.points[k].tpr, roc.points[k - 1].tpr);
  }
  // Reversing maps AUC to 1 - AUC; monotone transforms leave it unchanged.
  std::vector<double> neg(s.size()), expd(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    neg[i] = -s[i];
    expd[i] = std::exp(3 * s[i]);
  }
  EXPECT_NEAR(roc_auc(neg, l).auc, 1 - roc.auc, 1e-12);
  EXPECT_NEAR(roc_auc(expd, l).auc, roc.auc, 1e-12);
}

TEST(Roc, IndependentScoresNearHalf) {
  std::mt19937_64 rng{6};
  const int n = 20000;
  std::vector<double> s(n);
  std::vector<int> l(n);
  for (int i = 0; i < n; ++i) {
    s[i] = std::uniform_real_distribution<double>{}(rng);
    l[i] = i % 2;
  }
  // Null SE of AUC for class sizes m, m: sqrt((2m + 1) / (12 m^2)).
  const double m = n / 2.0;
  const double se = std::sqrt((m + m + 1) / (12.0 * m * m));
  EXPECT_NEAR(roc_auc(s, l).auc, 0.5, 3 * se);
}

TEST(Roc, SingleClassRejected) {
  const std::vector<double> s{0.1, 0.2};
  const std::vector<int> l{1, 1};
  EXPECT_THROW(roc_auc(s, l), SingleClass);
}

TEST(Intervals, GaussianAndLogNormal) {
  const exchnet::Posterior g = exchnet::GaussianPosterior{1.0, 4.0, false};
  const auto iv = credible_interval(g, 0.95);
  EXPECT_NEAR(iv.lower, 1.0 - 1.959963984540054 * 0.5, 1e-12);
  EXPECT_NEAR(iv.upper, 1.0 + 1.959963984540054 * 0.5, 1e-12);
  const exchnet::Posterior ln = exchnet::GaussianPosterior{std::log(20.0), 4.0, true};
  const auto liv = credible_interval(ln, 0.95);
  EXPECT_NEAR(std::log(liv.lower), std::log(20.0) - 1.959963984540054 * 0.5, 1e-12);
  EXPECT_LT(liv.lower, posterior_mean(ln));
  EXPECT_LT(posterior_mean(ln), liv.upper);
  EXPECT_THROW(credible_interval(g, 1.0), std::invalid_argument);
}

TEST(Intervals, SingleComponentMixtureMatchesGaussian) {
  const exchnet::Posterior mix = exchnet::MixturePosterior{{{1.0, 2.0, 0.25}}, false};
  const auto iv = credible_interval(mix, 0.9);
  const auto ref = credible_interval(exchnet::GaussianPosterior{2.0, 0.25, false}, 0.9);
  EXPECT_NEAR(iv.lower, ref.lower, 1e-7);
  EXPECT_NEAR(iv.upper, ref.upper, 1e-7);
}

TEST(Intervals, MixtureQuantilesInvertCdf) {
  const exchnet::MixturePosterior mix{{{0.3, -1.0, 4.0}, {0.7, 2.0, 1.0}}, false};
  const auto iv = credible_interval(mix, 0.8);
  auto cdf = [&](double x) {
    double c = 0;
    for (const auto& k : mix.components)
      c += k.weight * boost::math::cdf(boost::math::normal{k.mu, 1 / std::sqrt(k.tau)}, x);
    return c;
  };
  EXPECT_NEAR(cdf(iv.lower), 0.1, 1e-8);
  EXPECT_NEAR(cdf(iv.upper), 0.9, 1e-8);
}

TEST(Coverage, TrivialCases) {
  const std::vector<exchnet::Posterior> p{exchnet::GaussianPosterior{3.0, 1.0, false}};
  EXPECT_EQ(ci_coverage(p, std::vector<double>{3.0}), 1.0);
  const std::vector<exchnet::Posterior> sharp{exchnet::GaussianPosterior{3.0, 1e12, false}};
  EXPECT_EQ(ci_coverage(sharp, std::vector<double>{3.1}), 0.0);
}

TEST(Coverage, SelfConsistentDataHitsNominal) {
  std::mt19937_64 rng{8};
  const int n = 10000;
  std::vector<exchnet::Posterior> posts;
  std::vector<double> truths;
  for (int i = 0; i < n; ++i) {
    const double mu = std::uniform_real_distribution<double>{0, 4}(rng);
    const double tau = std::uniform_real_distribution<double>{0.5, 5}(rng);
    posts.push_back(exchnet::GaussianPosterior{mu, tau, true});
    truths.push_back(std::exp(std::normal_distribution<double>{mu, 1 / std::sqrt(tau)}(rng)));
  }
  EXPECT_NEAR(ci_coverage(posts, truths, 0.95), 0.95, 3 * std::sqrt(0.95 * 0.05 / n));
}

TEST(Spearman, Basics) {
  const std::vector<double> x{1, 2, 3, 4, 5};
  std::vector<double> y{-1, -2, -3, -4, -5};
  EXPECT_DOUBLE_EQ(spearman(x, x), 1.0);
  EXPECT_DOUBLE_EQ(spearman(x, y), -1.0);
  EXPECT_THROW(spearman(x, std::vector<double>(5, 2.0)), ConstantInput);
  EXPECT_THROW(spearman(std::vector<double>{1}, std::vector<double>{1}), std::invalid_argument);
}

TEST(Spearman, HandWorkedTies) {
  // xs ranks: 1, 2.5, 2.5, 4, 5; ys ranks: 2, 1, 4, 4, 4.
  const std::vector<double> xs{10, 20, 20, 30, 40};
  const std::vector<double> ys{5, 1, 7, 7, 7};
  EXPECT_EQ(average_ranks(xs), (std::vector<double>{1, 2.5, 2.5, 4, 5}));
  EXPECT_EQ(average_ranks(ys), (std::vector<double>{2, 1, 4, 4, 4}));
  // Pearson of the rank vectors, computed by hand: sum of deviation products = 5.5, sx^2 = 9.5, sy^2 = 8.
  EXPECT_NEAR(spearman(xs, ys), 5.5 / std::sqrt(9.5 * 8.0), 1e-15);
}

namespace {

ToyConfig quick_toy() {
  ToyConfig c;
  c.draws_per_theta = 20000;
  return c;
}

}  // namespace

TEST(Toy, KeyIsRowOrderFree) {
  hotspot::LabeledWindow w = window_from_key(0b0001'0110'0000'1001, 4, 4);
  const auto key = toy_key(w);
  // Swap rows 0 and 2.
  for (int j = 0; j < 4; ++j) std::swap(w.tensor[(0 * 4 + j) * 2], w.tensor[(2 * 4 + j) * 2]);
  EXPECT_EQ(toy_key(w), key);
  EXPECT_EQ(toy_key(window_from_key(key, 4, 4)), key);
}

TEST(Toy, SizeCap) {
  ToyConfig c;
  c.n = 5;
  c.d = 5;
  EXPECT_THROW(c.validate(), ToyTooLarge);
  EXPECT_THROW(window_from_key(0, 5, 5), ToyTooLarge);
}

TEST(Toy, OracleAndKlIdentities) {
  const auto oracle = build_toy_oracle(quick_toy(), 1, 1);
  EXPECT_EQ(oracle.draws(0), 20000u);
  EXPECT_EQ(oracle.draws(1), 20000u);
  const auto exact = kl_to_oracle(oracle, [&](const hotspot::LabeledWindow& w) { return oracle.posterior(toy_key(w)); });
  EXPECT_NEAR(exact.value, 0.0, 1e-12);
  const auto prior = kl_to_oracle(oracle, [](const hotspot::LabeledWindow&) { return 0.5; });
  const auto mi = mutual_information(oracle);
  EXPECT_NEAR(prior.value, mi.value, 1e-12);
  EXPECT_GT(mi.value, 0.01);
  EXPECT_LT(mi.value, std::log(2.0));
  EXPECT_GT(mi.standard_error, 0.0);
  const auto wrong = kl_to_oracle(oracle, [](const hotspot::LabeledWindow&) { return 0.9; });
  EXPECT_GT(wrong.value, mi.value);
}

TEST(Toy, OracleIndependentOfWorkers) {
  auto cfg = quick_toy();
  cfg.draws_per_theta = 2000;
  EXPECT_EQ(build_toy_oracle(cfg, 3, 1).counts, build_toy_oracle(cfg, 3, 4).counts);
}

TEST(Toy, CacheRoundTrip) {
  auto cfg = quick_toy();
  cfg.draws_per_theta = 2000;
  const auto path = std::filesystem::temp_directory_path() / "popinfer_toy_cache_test.bin";
  std::filesystem::remove(path);
  const auto built = cached_toy_oracle(cfg, 4, 1, path);
  ASSERT_TRUE(std::filesystem::exists(path));
  const auto loaded = cached_toy_oracle(cfg, 4, 1, path);
  EXPECT_EQ(built.counts, loaded.counts);
  std::filesystem::remove(path);
}

TEST(Toy, SourceZeroesDistancesAndLabelsBothClasses) {
  const auto src = toy_source(quick_toy(), 2, Stream::Train);
  int ones = 0;
  for (std::uint64_t i = 0; i < 200; ++i) {
    const auto w = src(i);
    ones += static_cast<int>(w.label);
    for (int r = 0; r < w.rows; ++r)
      for (int j = 0; j < w.positions; ++j) EXPECT_EQ(w.distance(r, j), 0.0);
  }
  EXPECT_GT(ones, 60);
  EXPECT_LT(ones, 140);
}

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "popinfer/hotspot/prior.hpp"
#include "popinfer/hotspot/recomb_map.hpp"
#include "popinfer/hotspot/window.hpp"
#include "popinfer/hotspot/window_file.hpp"

using namespace popinfer;
using namespace popinfer::hotspot;

namespace {

// Brute-force median: expand the map to one rate per bp and take the lower
// middle element.
double per_bp_median(const std::vector<RecombMap>& maps) {
  std::vector<double> rates;
  for (const auto& m : maps)
    for (int x = 0; x < static_cast<int>(m.length()); ++x) rates.push_back(m.rate_at(x + 0.5));
  std::sort(rates.begin(), rates.end());
  return rates[(rates.size() - 1) / 2];
}

}  // namespace

TEST(RecombMap, ValidatesPieces) {
  EXPECT_THROW(RecombMap({}, 10.0), std::invalid_argument);
  EXPECT_THROW(RecombMap({{1.0, 0.1}}, 10.0), std::invalid_argument);
  EXPECT_THROW(RecombMap({{0.0, 0.1}, {0.0, 0.2}}, 10.0), std::invalid_argument);
  EXPECT_THROW(RecombMap({{0.0, -0.1}}, 10.0), std::invalid_argument);
  EXPECT_THROW(RecombMap({{0.0, 0.1}, {10.0, 0.2}}, 10.0), std::invalid_argument);
}

TEST(RecombMap, MeanRateIsWidthWeighted) {
  const RecombMap m{{{0.0, 1.0}, {10.0, 3.0}}, 20.0};
  EXPECT_DOUBLE_EQ(m.mean_rate(0.0, 20.0), 2.0);
  EXPECT_DOUBLE_EQ(m.mean_rate(5.0, 15.0), 2.0);
  EXPECT_DOUBLE_EQ(m.mean_rate(0.0, 5.0), 1.0);
  EXPECT_DOUBLE_EQ(m.mean_rate(8.0, 20.0), (2.0 + 30.0) / 12.0);
  EXPECT_THROW(m.mean_rate(5.0, 25.0), std::out_of_range);
}

TEST(RecombMap, CumulativeAndInverse) {
  const RecombMap m{{{0.0, 1.0}, {10.0, 0.0}, {15.0, 2.0}}, 20.0};
  EXPECT_DOUBLE_EQ(m.total(), 20.0);
  EXPECT_DOUBLE_EQ(m.cumulative(12.0), 10.0);
  EXPECT_DOUBLE_EQ(m.inverse_cumulative(5.0), 5.0);
  EXPECT_DOUBLE_EQ(m.inverse_cumulative(12.0), 16.0);
  for (double x : {0.0, 3.3, 9.99, 16.0, 19.5}) {
    if (m.rate_at(x) > 0) EXPECT_NEAR(m.inverse_cumulative(m.cumulative(x)), x, 1e-12);
  }
}

TEST(Median, HalfAndHalfTakesLowerValue) {
  const std::vector<RecombMap> maps{RecombMap{{{0.0, 0.001}, {50.0, 0.003}}, 100.0}};
  EXPECT_DOUBLE_EQ(genome_median_rate(maps), 0.001);
  EXPECT_DOUBLE_EQ(per_bp_median(maps), 0.001);
}

TEST(Median, MatchesPerBpExpansion) {
  Rng rng{3};
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<RecombMap> maps;
    const int count = 1 + static_cast<int>(rng() % 3);
    for (int k = 0; k < count; ++k) {
      std::vector<RecombMap::Piece> pieces;
      int at = 0;
      const int length = 20 + static_cast<int>(rng() % 40);
      while (at < length) {
        pieces.push_back({static_cast<double>(at), static_cast<double>(rng() % 5) * 1e-4});
        at += 1 + static_cast<int>(rng() % 15);
      }
      maps.emplace_back(pieces, static_cast<double>(length));
    }
    EXPECT_DOUBLE_EQ(genome_median_rate(maps), per_bp_median(maps)) << "trial " << trial;
  }
}

TEST(Median, EmptyInputThrows) { EXPECT_THROW(genome_median_rate({}), std::invalid_argument); }

TEST(Definition, ElevatedWindowIsHotspot) {
  const WindowSpec w{0.0, 1000.0, 200.0, 1000.0};
  const auto map = hotspot_map(1e-4, 20.0, w, w.total());
  EXPECT_TRUE(classify_window(map, w, 10.0, 1e-4));
  // Elevated over the flanks but not over the genome median.
  EXPECT_FALSE(classify_window(map, w, 10.0, 1e-3));
  // Below the factor over the flanks.
  const auto mild = hotspot_map(1e-4, 5.0, w, w.total());
  EXPECT_FALSE(classify_window(mild, w, 10.0, 1e-5));
  // Exactly k times is not strictly greater (dyadic values keep it exact).
  const WindowSpec dyadic{0.0, 1024.0, 256.0, 1024.0};
  const auto edge = hotspot_map(0.25, 4.0, dyadic, dyadic.total());
  EXPECT_FALSE(classify_window(edge, dyadic, 4.0, 0.0625));
  EXPECT_TRUE(classify_window(edge, dyadic, 3.5, 0.0625));
}

TEST(Definition, UsesLargerFlank) {
  const WindowSpec w{0.0, 100.0, 100.0, 100.0};
  const RecombMap map{{{0.0, 1e-4}, {100.0, 5e-3}, {200.0, 1e-3}}, 300.0};
  EXPECT_FALSE(classify_window(map, w, 10.0, 1e-5));  // 5e-3 < 10 * 1e-3
  EXPECT_TRUE(classify_window(map, w, 4.0, 1e-5));
}

TEST(Definition, RejectsBadArguments) {
  const WindowSpec w{0.0, 100.0, 100.0, 100.0};
  const auto map = RecombMap::flat(1e-3, 300.0);
  EXPECT_THROW(classify_window(map, w, 1.0, 1e-3), std::invalid_argument);
  EXPECT_THROW(classify_window(map, w, 10.0, 0.0), std::invalid_argument);
  const WindowSpec outside{100.0, 100.0, 100.0, 100.0};
  EXPECT_THROW(classify_window(map, outside, 10.0, 1e-3), WindowOutsideMap);
}

TEST(Prior, DiscreteLabelsAgreeWithDefinition) {
  PriorConfig cfg;
  Rng rng{17};
  int hot = 0;
  const int draws = 4000;
  for (int i = 0; i < draws; ++i) {
    const auto d = sample_prior(cfg, 28000.0, rng);
    EXPECT_EQ(d.h, classify_window(d.map, d.window, cfg.k_def, cfg.median_rate) ? 1 : 0);
    hot += d.h;
  }
  EXPECT_NEAR(hot / double(draws), 0.5, 4 * std::sqrt(0.25 / draws));
}

TEST(Prior, ForcedLabelAndFlatNull) {
  PriorConfig cfg;
  cfg.force_label = 0;
  cfg.null_elevation = false;
  cfg.background = BackgroundPrior::Fixed;
  Rng rng{1};
  for (int i = 0; i < 100; ++i) {
    const auto d = sample_prior(cfg, 28000.0, rng);
    EXPECT_EQ(d.h, 0);
    EXPECT_EQ(d.k, 1.0);
    EXPECT_EQ(d.background, 5e-4);
  }
}

TEST(Prior, ContinuousDrawsIntensityUniformly) {
  PriorConfig cfg;
  cfg.task = TaskKind::Continuous;
  Rng rng{2};
  double sum = 0.0;
  const int draws = 20000;
  for (int i = 0; i < draws; ++i) {
    const auto d = sample_prior(cfg, 28000.0, rng);
    EXPECT_GE(d.k, 1.0);
    EXPECT_LE(d.k, 100.0);
    sum += d.k;
  }
  EXPECT_NEAR(sum / draws, 50.5, 4 * (99.0 / std::sqrt(12.0)) / std::sqrt(double(draws)));
}

TEST(Prior, InvalidConfigs) {
  PriorConfig cfg;
  cfg.k_def = 1.0;
  Rng rng{1};
  EXPECT_THROW(sample_prior(cfg, 28000.0, rng), InvalidPrior);
  PriorConfig wide;
  EXPECT_THROW(sample_prior(wide, 1000.0, rng), InvalidPrior);
}

TEST(Encode, DistanceChannelAndBits) {
  coalescent::SnpMatrix m;
  m.rows = 2;
  m.cols = 3;
  m.values = {1, 0, 1, 0, 1, 1};
  m.positions = {100.0, 400.0, 1000.0};
  const auto t = encode_window(m, 1000.0, 2, 3);
  ASSERT_EQ(t.size(), 12u);
  EXPECT_EQ(t[0], 1.0);
  EXPECT_DOUBLE_EQ(t[1], 0.3);
  EXPECT_DOUBLE_EQ(t[3], 0.6);
  EXPECT_EQ(t[5], 0.0);
  EXPECT_EQ(t[6], 0.0);
  EXPECT_DOUBLE_EQ(t[7], 0.3);
  EXPECT_THROW(encode_window(m, 1000.0, 3, 3), std::invalid_argument);
}

TEST(WindowFile, RoundTripAndEmpty) {
  LabeledWindow w;
  w.rows = 2;
  w.positions = 3;
  w.tensor = {1, 0.1, 0, 0.2, 1, 0, 0, 0.1, 1, 0.2, 0, 0};
  w.label = 1;
  w.draw.h = 1;
  w.draw.k = 42.5;
  w.draw.background = 5e-4;
  w.raw_snps = 77;
  const std::vector<LabeledWindow> ws{w, w};
  const auto back = decode_windows(encode_windows(ws, 2, 3));
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].tensor, w.tensor);
  EXPECT_EQ(back[1].draw.k, 42.5);
  EXPECT_EQ(back[1].raw_snps, 77);
  EXPECT_TRUE(decode_windows(encode_windows({}, 32, 24)).empty());
  auto bytes = encode_windows(ws, 2, 3);
  EXPECT_THROW(decode_windows(bytes.substr(0, bytes.size() - 3)), WindowFileError);
  bytes[0] = 'X';
  EXPECT_THROW(decode_windows(bytes), WindowFileError);
  EXPECT_THROW(encode_windows(ws, 3, 3), WindowFileError);
}

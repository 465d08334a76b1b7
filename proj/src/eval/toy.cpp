#include "popinfer/eval/toy.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "popinfer/common/binary_io.hpp"
#include "popinfer/common/parallel.hpp"
#include "popinfer/training/trainer.hpp"

namespace popinfer::eval {

namespace {

constexpr std::string_view kOracleMagic = "EXTO";
constexpr std::uint32_t kOracleVersion = 1;

std::uint64_t row_bits(const hotspot::LabeledWindow& w, int i) {
  std::uint64_t bits = 0;
  for (int j = 0; j < w.positions; ++j)
    if (w.bit(i, j) != 0.0) bits |= std::uint64_t{1} << j;
  return bits;
}

double kl_term(double p, double q) { return p > 0.0 ? p * std::log(p / q) : 0.0; }

double binary_kl(double p, double q) {
  q = std::clamp(q, 1e-300, 1.0 - 1e-16);
  return kl_term(p, q) + kl_term(1.0 - p, 1.0 - q);
}

// Jackknife over oracle groups of a statistic computed from the oracle with
// one group left out (-1 = none).
template <typename Stat>
KlEstimate jackknife(const ToyOracle& oracle, Stat&& stat) {
  KlEstimate est;
  est.value = stat(-1);
  const int g = oracle.config.groups;
  if (g < 2) return est;
  std::vector<double> loo(static_cast<std::size_t>(g));
  double mean = 0.0;
  for (int k = 0; k < g; ++k) mean += loo[k] = stat(k);
  mean /= g;
  double ss = 0.0;
  for (double v : loo) ss += (v - mean) * (v - mean);
  est.standard_error = std::sqrt((g - 1.0) / g * ss);
  return est;
}

std::uint64_t key_count(const std::vector<std::uint64_t>& c, int theta, int groups, int leave_out) {
  std::uint64_t total = 0;
  for (int g = 0; g < groups; ++g)
    if (g != leave_out) total += c[static_cast<std::size_t>(g) * 2 + theta];
  return total;
}

}  // namespace

coalescent::SimConfig ToyConfig::sim_config() const {
  coalescent::SimConfig s;
  s.n = n;
  s.d = d;
  s.length = length;
  return s;
}

hotspot::PriorDraw ToyConfig::draw(int theta) const {
  hotspot::PriorDraw dr;
  dr.task = hotspot::TaskKind::Discrete;
  dr.h = theta;
  dr.window.start = (length - 2.0 * flank - hotspot_width) / 2.0;
  dr.window.alpha_l = flank;
  dr.window.alpha_h = hotspot_width;
  dr.window.alpha_r = flank;
  if (theta == 1) {
    dr.k = hot_intensity;
    dr.background = hot_background;
    dr.map = hotspot::hotspot_map(hot_background, hot_intensity, dr.window, length);
  } else {
    dr.k = 1.0;
    dr.background = 0.0;
    dr.map = hotspot::RecombMap{{{0.0, 0.0}}, length};
  }
  return dr;
}

std::string ToyConfig::fingerprint() const {
  nlohmann::ordered_json j{{"n", n},
                           {"d", d},
                           {"length", length},
                           {"flank", flank},
                           {"hotspot_width", hotspot_width},
                           {"hot_background", hot_background},
                           {"hot_intensity", hot_intensity},
                           {"draws_per_theta", draws_per_theta},
                           {"groups", groups}};
  return j.dump();
}

void ToyConfig::validate() const {
  if (n * d > kToyMaxCells) throw ToyTooLarge{};
  if (n < 2 || d < 1) throw std::invalid_argument("toy needs n >= 2 and d >= 1");
  if (2.0 * flank + hotspot_width > length) throw std::invalid_argument("toy window does not fit in the region");
  if (groups < 1 || draws_per_theta < static_cast<std::uint64_t>(groups))
    throw std::invalid_argument("toy oracle needs at least one draw per group");
}

std::uint64_t toy_key(const hotspot::LabeledWindow& w) {
  if (w.rows * w.positions > kToyMaxCells) throw ToyTooLarge{};
  std::vector<std::uint64_t> rows(static_cast<std::size_t>(w.rows));
  for (int i = 0; i < w.rows; ++i) rows[i] = row_bits(w, i);
  std::sort(rows.begin(), rows.end());
  std::uint64_t key = 0;
  for (int i = 0; i < w.rows; ++i) key |= rows[i] << (i * w.positions);
  return key;
}

hotspot::LabeledWindow window_from_key(std::uint64_t key, int n, int d) {
  if (n * d > kToyMaxCells) throw ToyTooLarge{};
  hotspot::LabeledWindow w;
  w.rows = n;
  w.positions = d;
  w.tensor.assign(static_cast<std::size_t>(n) * d * hotspot::kChannels, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j)
      w.tensor[(static_cast<std::size_t>(i) * d + j) * hotspot::kChannels] = (key >> (i * d + j)) & 1U;
  return w;
}

training::WindowSource toy_source(const ToyConfig& cfg, std::uint64_t seed, Stream stream) {
  cfg.validate();
  return [cfg, sim = cfg.sim_config(), draws = std::array{cfg.draw(0), cfg.draw(1)}, seed,
          stream](std::uint64_t index) {
    Rng rng = make_rng(seed, stream, index);
    const int theta = uniform01(rng) < 0.5 ? 0 : 1;
    auto w = coalescent::simulate_window(draws[theta], sim, rng);
    for (std::size_t c = 1; c < w.tensor.size(); c += hotspot::kChannels) w.tensor[c] = 0.0;
    return w;
  };
}

std::uint64_t ToyOracle::draws(int theta, int leave_out) const {
  std::uint64_t total = 0;
  for (const auto& [key, c] : counts) total += key_count(c, theta, config.groups, leave_out);
  return total;
}

double ToyOracle::posterior(std::uint64_t key, int leave_out) const {
  const auto it = counts.find(key);
  if (it == counts.end()) throw std::out_of_range("key never observed by the oracle");
  const double f0 = static_cast<double>(key_count(it->second, 0, config.groups, leave_out)) /
                    static_cast<double>(draws(0, leave_out));
  const double f1 = static_cast<double>(key_count(it->second, 1, config.groups, leave_out)) /
                    static_cast<double>(draws(1, leave_out));
  return f1 / (f0 + f1);
}

ToyOracle build_toy_oracle(const ToyConfig& cfg, std::uint64_t seed, int workers) {
  cfg.validate();
  const auto sim = cfg.sim_config();
  ToyOracle oracle;
  oracle.config = cfg;
  // Each (theta, group) chunk is simulated from its own index range so the
  // table does not depend on the worker count.
  const auto chunks = static_cast<std::size_t>(cfg.groups) * 2;
  std::vector<std::map<std::uint64_t, std::uint64_t>> tables(chunks);
  parallel_for(chunks, workers, [&](std::size_t chunk) {
    const int theta = static_cast<int>(chunk % 2);
    const auto group = chunk / 2;
    const auto per_group = cfg.draws_per_theta / cfg.groups + (group < cfg.draws_per_theta % cfg.groups ? 1 : 0);
    const auto draw = cfg.draw(theta);
    Rng rng = make_rng(seed, Stream::Oracle, chunk);
    auto& table = tables[chunk];
    for (std::uint64_t i = 0; i < per_group; ++i) ++table[toy_key(coalescent::simulate_window(draw, sim, rng))];
  });
  for (std::size_t chunk = 0; chunk < chunks; ++chunk)
    for (const auto& [key, c] : tables[chunk]) {
      auto& slot = oracle.counts[key];
      slot.resize(chunks, 0);
      slot[(chunk / 2) * 2 + chunk % 2] += c;
    }
  return oracle;
}

ToyOracle cached_toy_oracle(const ToyConfig& cfg, std::uint64_t seed, int workers, const std::filesystem::path& path) {
  const auto tag = cfg.fingerprint() + "|seed=" + std::to_string(seed);
  if (std::filesystem::exists(path)) {
    try {
      const auto bytes = read_file(path);
      ByteReader r{bytes};
      if (r.bytes(4) == kOracleMagic && r.u32() == kOracleVersion) {
        const auto len = r.u32();
        if (r.bytes(len) == tag) {
          ToyOracle oracle;
          oracle.config = cfg;
          const auto keys = r.u64();
          const auto width = static_cast<std::size_t>(cfg.groups) * 2;
          for (std::uint64_t k = 0; k < keys; ++k) {
            auto& slot = oracle.counts[r.u64()];
            slot.resize(width);
            for (auto& c : slot) c = r.u64();
          }
          return oracle;
        }
      }
    } catch (const TruncatedInput&) {
      // Fall through and rebuild.
    }
  }
  auto oracle = build_toy_oracle(cfg, seed, workers);
  ByteWriter w;
  w.bytes(kOracleMagic);
  w.u32(kOracleVersion);
  w.u32(static_cast<std::uint32_t>(tag.size()));
  w.bytes(tag);
  w.u64(oracle.counts.size());
  for (const auto& [key, slot] : oracle.counts) {
    w.u64(key);
    for (auto c : slot) w.u64(c);
  }
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  write_file(path, w.data());
  return oracle;
}

namespace {

// Expected KL over keys under the oracle marginal (uniform prior on theta).
double expected_kl(const ToyOracle& oracle, const std::map<std::uint64_t, double>& predicted, int leave_out) {
  const double n0 = static_cast<double>(oracle.draws(0, leave_out));
  const double n1 = static_cast<double>(oracle.draws(1, leave_out));
  const int g = oracle.config.groups;
  double kl = 0.0;
  for (const auto& [key, c] : oracle.counts) {
    const double f0 = static_cast<double>(key_count(c, 0, g, leave_out)) / n0;
    const double f1 = static_cast<double>(key_count(c, 1, g, leave_out)) / n1;
    const double marginal = 0.5 * (f0 + f1);
    if (marginal == 0.0) continue;
    kl += marginal * binary_kl(f1 / (f0 + f1), predicted.at(key));
  }
  return kl;
}

}  // namespace

KlEstimate kl_to_oracle(const ToyOracle& oracle, const ToyPredictor& predict) {
  std::map<std::uint64_t, double> predicted;
  for (const auto& [key, c] : oracle.counts)
    predicted[key] = predict(window_from_key(key, oracle.config.n, oracle.config.d));
  return jackknife(oracle, [&](int leave_out) { return expected_kl(oracle, predicted, leave_out); });
}

KlEstimate kl_to_oracle(const ToyOracle& oracle, const exchnet::ExchNet& net) {
  std::vector<std::uint64_t> keys;
  std::vector<hotspot::LabeledWindow> windows;
  for (const auto& [key, c] : oracle.counts) {
    keys.push_back(key);
    windows.push_back(window_from_key(key, oracle.config.n, oracle.config.d));
  }
  const auto posts = training::predict(net, windows);
  std::map<std::uint64_t, double> predicted;
  for (std::size_t i = 0; i < keys.size(); ++i) predicted[keys[i]] = training::positive_probability(posts[i]);
  return jackknife(oracle, [&](int leave_out) { return expected_kl(oracle, predicted, leave_out); });
}

KlEstimate mutual_information(const ToyOracle& oracle) {
  std::map<std::uint64_t, double> prior;
  for (const auto& [key, c] : oracle.counts) prior[key] = 0.5;
  return jackknife(oracle, [&](int leave_out) { return expected_kl(oracle, prior, leave_out); });
}

}  // namespace popinfer::eval

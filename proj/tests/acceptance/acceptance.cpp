// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. `--only 4,5` runs a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <fmt/core.h>

#include "popinfer/cli/commands.hpp"
#include "popinfer/coalescent/simulate.hpp"
#include "popinfer/common/binary_io.hpp"
#include "popinfer/eval/metrics.hpp"
#include "popinfer/eval/toy.hpp"
#include "popinfer/exchnet/losses.hpp"
#include "popinfer/exchnet/serialize.hpp"
#include "popinfer/hotspot/recomb_map.hpp"
#include "popinfer/training/abc.hpp"
#include "popinfer/training/experiment.hpp"

namespace fs = std::filesystem;
using namespace popinfer;
using exchnet::Architecture;
using exchnet::ExchNet;
using training::LabeledWindow;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

struct Options {
  fs::path cache_dir = "acceptance_cache";
  int workers = 0;
};

void progress(const std::string& msg) { std::cerr << "  .. " << msg << std::endl; }

Architecture desk_arch() {
  Architecture a;
  a.conv1_filters = 16;
  a.conv2_filters = 32;
  a.fc1_units = 64;
  a.fc2_units = 64;
  return a;
}

training::TrainConfig desk_train(int workers) {
  training::TrainConfig t;
  t.steps = 4000;
  t.batch_size = 50;
  t.eval_every = 500;
  t.workers = workers;
  return t;
}

std::vector<double> random_input(int batch, int n, int d, Rng& rng) {
  std::vector<double> x(static_cast<std::size_t>(batch) * n * d * 2);
  std::bernoulli_distribution bit(0.3);
  for (std::size_t i = 0; i < x.size(); i += 2) {
    x[i] = bit(rng) ? 1.0 : 0.0;
    x[i + 1] = uniform01(rng) * 0.1;
  }
  return x;
}

double sample_variance(const std::vector<double>& xs) {
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return ss / (xs.size() - 1);
}

double mean_of(const std::vector<double>& xs) { return std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size(); }

// ---- 1: permutation invariance

Verdict permutation_invariance(const Options&) {
  Rng rng{101};
  static const exchnet::HeadKind heads[] = {exchnet::HeadKind::Softmax, exchnet::HeadKind::Gaussian,
                                            exchnet::HeadKind::Mixture};
  int identical = 0;
  const int trials = 1000;
  for (int t = 0; t < trials; ++t) {
    Architecture a;
    a.positions = std::uniform_int_distribution<int>{5, 16}(rng);
    a.conv1_filters = std::uniform_int_distribution<int>{2, 6}(rng);
    a.conv2_filters = std::uniform_int_distribution<int>{2, 8}(rng);
    a.fc1_units = 8;
    a.fc2_units = 8;
    a.pooling = static_cast<exchnet::Pooling>(t % 3);
    a.head = heads[(t / 3) % 3];
    a.mixture_components = 3;
    const auto net = ExchNet::initialized(a, 1000 + t);
    const int n = std::uniform_int_distribution<int>{1, 40}(rng);
    const auto x = random_input(1, n, a.positions, rng);
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<double> px(x.size());
    const std::size_t row = static_cast<std::size_t>(a.positions) * 2;
    for (int r = 0; r < n; ++r) std::copy_n(x.begin() + perm[r] * row, row, px.begin() + r * row);
    const auto h1 = net.forward({x, 1, n, a.positions, 2}).cache.head;
    const auto h2 = net.forward({px, 1, n, a.positions, 2}).cache.head;
    identical += h1.size() == h2.size() && std::memcmp(h1.data(), h2.data(), h1.size() * sizeof(double)) == 0;
  }
  return {identical == trials, fmt::format("{}/{} triples bit-identical", identical, trials)};
}

// ---- 2: gradient check

Verdict gradient_check(const Options&) {
  static const char* heads[] = {"softmax", "lognormal", "lognormal_mixture"};
  double worst = 0.0;
  long checked = 0, skipped = 0;
  for (int input = 0; input < 20; ++input) {
    Architecture a;
    a.positions = 12;
    a.conv1_filters = 4;
    a.conv2_filters = 8;
    a.fc1_units = 16;
    a.fc2_units = 16;
    a.mixture_components = 3;
    exchnet::set_head(a, heads[input % 3]);
    auto net = ExchNet::initialized(a, 200 + input);
    Rng rng{300u + input};
    const int n = std::uniform_int_distribution<int>{2, 12}(rng);
    const auto x = random_input(1, n, 12, rng);
    const double label = a.head == exchnet::HeadKind::Softmax ? double(input % 2) : 1.0 + 99.0 * uniform01(rng);
    const exchnet::BatchView view{x, 1, n, 12, 2};
    auto loss_of = [&](const exchnet::ForwardCache& c) { return exchnet::head_loss(a, c.head, label).loss; };
    const auto base = net.forward(view);
    const auto grads = net.backward(base.cache, exchnet::head_loss(a, base.cache.head, label).grad);
    const double h = 1e-5;
    for (std::size_t p = 0; p < net.params().size(); ++p) {
      for (std::size_t i = 0; i < net.params()[p].size(); ++i) {
        const double orig = net.params()[p].values[i];
        net.mutable_params()[p].values[i] = orig + h;
        const auto plus = net.forward(view);
        net.mutable_params()[p].values[i] = orig - h;
        const auto minus = net.forward(view);
        net.mutable_params()[p].values[i] = orig;
        // A perturbation that flips a ReLU or a pooled row crosses a kink.
        if (!exchnet::same_activation_pattern(plus.cache, base.cache) ||
            !exchnet::same_activation_pattern(minus.cache, base.cache)) {
          ++skipped;
          continue;
        }
        const double numeric = (loss_of(plus.cache) - loss_of(minus.cache)) / (2 * h);
        const double analytic = grads[p].values[i];
        worst = std::max(worst, std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-6}));
        ++checked;
      }
    }
  }
  return {worst < 1e-4 && checked > 20 * skipped,
          fmt::format("max relative error {:.3g} over {} parameters ({} at kinks skipped)", worst, checked, skipped)};
}

// ---- 3: coalescent moments

struct Moments {
  double sum = 0, sum_sq = 0;
  long count = 0;
  void add(double x) {
    sum += x;
    sum_sq += x * x;
    ++count;
  }
  double mean() const { return sum / count; }
  double se() const { return std::sqrt((sum_sq / count - mean() * mean()) / (count - 1)); }
};

Verdict coalescent_moments(const Options&) {
  bool ok = true;
  std::string detail;
  const double theta = 5.0;
  const double length = 1000.0;
  const auto no_recombination = hotspot::RecombMap::flat(0.0, length);
  for (int n : {2, 8, 16}) {
    Rng rng{4000u + n};
    Moments tmrca, total, snps;
    for (int rep = 0; rep < 100000; ++rep) {
      const auto ts = coalescent::simulate_trees(n, length, no_recombination, coalescent::PopSizeHistory{}, rng);
      tmrca.add(ts.trees[0].height());
      total.add(ts.trees[0].total_branch_length());
      snps.add(coalescent::drop_mutations(ts, theta / length, rng).cols);
    }
    double a_n = 0;
    for (int i = 1; i < n; ++i) a_n += 1.0 / i;
    const double z_t = (tmrca.mean() - 2 * (1 - 1.0 / n)) / tmrca.se();
    const double z_l = (total.mean() - 2 * a_n) / total.se();
    const double z_s = (snps.mean() - theta * a_n) / snps.se();
    ok = ok && std::abs(z_t) < 3 && std::abs(z_l) < 3 && std::abs(z_s) < 3;
    detail += fmt::format("n={}: z(T)={:+.2f} z(L)={:+.2f} z(S)={:+.2f}; ", n, z_t, z_l, z_s);
  }
  detail.resize(detail.size() - 2);
  return {ok, detail};
}

// ---- 4, 5, 6, 10: hotspot classification runs, shared

class HotspotRuns {
 public:
  explicit HotspotRuns(const Options& opt) : opt_{opt} {
    setup_.prior.background = hotspot::BackgroundPrior::Fixed;
    setup_.prior.background_value = 5e-4;
    setup_.prior.hot_range = {20.0, 100.0};
    setup_.prior.null_elevation = false;
    setup_.arch = desk_arch();
    setup_.arch.positions = setup_.sim.d;
    setup_.train = desk_train(opt.workers);
    setup_.dataset_size = 2000;
    setup_.heldout_size = 1000;
  }

  const training::ExperimentSetup& setup() const { return setup_; }

  const ExchNet& on_the_fly(std::uint64_t seed) {
    if (!fly_.count(seed)) {
      progress(fmt::format("on-the-fly training, seed {}", seed));
      training::TrainTrace trace;
      auto net = training::run_on_the_fly(setup_, seed, heldout(seed), trace);
      fly_trace_.emplace(seed, std::move(trace));
      fly_.emplace(seed, std::move(net));
    }
    return fly_.at(seed);
  }

  const ExchNet& fixed(std::uint64_t seed) {
    if (!fixed_.count(seed)) {
      progress(fmt::format("fixed-set training, seed {}", seed));
      training::TrainTrace trace;
      auto net = training::run_fixed(setup_, seed, heldout(seed), trace);
      fixed_trace_.emplace(seed, std::move(trace));
      fixed_.emplace(seed, std::move(net));
    }
    return fixed_.at(seed);
  }

  double final_loss(std::uint64_t seed, bool fly) {
    fly ? on_the_fly(seed) : fixed(seed);
    return training::final_heldout_loss(fly ? fly_trace_.at(seed) : fixed_trace_.at(seed));
  }

  std::vector<LabeledWindow> test_set(std::uint64_t seed, std::size_t count, int rows) const {
    auto sim = setup_.sim;
    sim.n = rows;
    return training::simulate_set(training::prior_source(sim, setup_.prior, seed, Stream::Test), 0, count,
                                  opt_.workers);
  }

 private:
  const std::vector<LabeledWindow>& heldout(std::uint64_t seed) {
    if (!heldout_.count(seed)) heldout_.emplace(seed, training::heldout_set(setup_, seed));
    return heldout_.at(seed);
  }

  Options opt_;
  training::ExperimentSetup setup_;
  std::map<std::uint64_t, std::vector<LabeledWindow>> heldout_;
  std::map<std::uint64_t, ExchNet> fly_, fixed_;
  std::map<std::uint64_t, training::TrainTrace> fly_trace_, fixed_trace_;
};

struct Scores {
  std::vector<double> probs;
  std::vector<int> labels;
};

Scores score(const ExchNet& net, const std::vector<LabeledWindow>& windows) {
  Scores s;
  for (const auto& post : training::predict(net, windows)) s.probs.push_back(training::positive_probability(post));
  for (const auto& w : windows) s.labels.push_back(static_cast<int>(w.label));
  return s;
}

Verdict hotspot_skill(HotspotRuns& runs) {
  bool ok = true;
  std::string detail;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto& net = runs.on_the_fly(seed);
    const auto s = score(net, runs.test_set(seed, 2000, runs.setup().sim.n));
    const double acc = eval::accuracy(s.probs, s.labels);
    const double auc = eval::roc_auc(s.probs, s.labels).auc;
    ok = ok && acc > 0.85 && auc > 0.90;
    detail += fmt::format("seed {}: acc {:.3f} auc {:.3f}; ", seed, acc, auc);
  }
  detail.resize(detail.size() - 2);
  return {ok, detail};
}

Verdict fixed_vs_fly(HotspotRuns& runs) {
  std::vector<double> fly, fixed;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    fly.push_back(runs.final_loss(seed, true));
    fixed.push_back(runs.final_loss(seed, false));
  }
  const double mf = mean_of(fixed), mo = mean_of(fly);
  const double vf = sample_variance(fixed), vo = sample_variance(fly);
  return {mf >= mo && vf >= vo,
          fmt::format("held-out cross-entropy mean fixed {:.4f} vs fly {:.4f}, variance fixed {:.3g} vs fly {:.3g}", mf,
                      mo, vf, vo)};
}

Verdict calibration(HotspotRuns& runs) {
  const auto test = runs.test_set(1, 5000, runs.setup().sim.n);
  const auto fly = score(runs.on_the_fly(1), test);
  const auto fixed = score(runs.fixed(1), test);
  const double dev_fly = eval::calibration_curve(fly.probs, fly.labels, 10).max_deviation(200);
  const double dev_fixed = eval::calibration_curve(fixed.probs, fixed.labels, 10).max_deviation(200);
  return {dev_fly <= 0.08 && dev_fixed > dev_fly,
          fmt::format("max calibration deviation on-the-fly {:.4f}, fixed {:.4f}", dev_fly, dev_fixed)};
}

Verdict sample_size_robustness(HotspotRuns& runs) {
  const auto& net = runs.on_the_fly(1);
  const auto home = score(net, runs.test_set(1, 2000, runs.setup().sim.n));
  const double base = eval::accuracy(home.probs, home.labels);
  bool ok = true;
  std::string detail = fmt::format("n=32 acc {:.3f}", base);
  for (int rows : {8, 16, 64, 128}) {
    progress(fmt::format("testing at n={}", rows));
    const auto s = score(net, runs.test_set(1, 1000, rows));
    const double acc = eval::accuracy(s.probs, s.labels);
    ok = ok && acc >= 0.9 * base;
    detail += fmt::format("; n={} acc {:.3f} ({:.1f}%)", rows, acc, 100 * acc / base);
  }
  return {ok, detail};
}

// ---- 7: toy problem vs the enumerated oracle

Verdict toy_kl(const Options& opt) {
  const eval::ToyConfig toy;
  fs::create_directories(opt.cache_dir);
  progress("toy oracle (cached after the first build)");
  const auto oracle = eval::cached_toy_oracle(toy, 1, opt.workers, opt.cache_dir / "toy_oracle.bin");

  Architecture a;
  a.positions = toy.d;
  a.patch = 3;
  a.conv1_filters = 8;
  a.conv2_filters = 16;
  a.fc1_units = 32;
  a.fc2_units = 32;
  auto net = training::initial_network(a, 1);
  training::TrainConfig cfg;
  cfg.steps = 4000;
  cfg.batch_size = 200;
  cfg.eval_every = 1000;
  cfg.workers = opt.workers;
  const auto heldout = training::simulate_set(eval::toy_source(toy, 1, Stream::Heldout), 0, 500, opt.workers);
  std::vector<eval::KlEstimate> checkpoints;
  progress("toy training");
  training::train_on_the_fly(net, eval::toy_source(toy, 1, Stream::Train), cfg, heldout,
                             [&](std::uint64_t b, const ExchNet& n) {
                               if (b == cfg.steps / 4 || b == cfg.steps / 2 || b == cfg.steps)
                                 checkpoints.push_back(eval::kl_to_oracle(oracle, n));
                             });
  const auto mi = eval::mutual_information(oracle);
  const bool ok = checkpoints.size() == 3 && checkpoints[2].value < 0.05 &&
                  checkpoints[0].value > checkpoints[1].value && checkpoints[1].value > checkpoints[2].value;
  std::string detail = fmt::format("prior KL (mutual information) {:.4f}; KL at 25/50/100%:", mi.value);
  for (const auto& k : checkpoints) detail += fmt::format(" {:.4f} (se {:.4f})", k.value, k.standard_error);
  return {ok, detail};
}

// ---- 8: ABC on the Beta-Binomial toy

Verdict abc_beta_binomial(const Options& opt) {
  constexpr int trials = 20;
  constexpr int observed = 7;
  constexpr int bins = 20;
  auto prior = [](Rng& rng) { return uniform01(rng); };
  auto sim = [](double p, Rng& rng) { return std::binomial_distribution<int>{trials, p}(rng); };
  auto summary = [](int x) { return training::Stats{double(x)}; };
  auto dist = [](const training::Stats& a, const training::Stats& b) { return std::abs(a[0] - b[0]); };
  // One set of draws thresholded at every epsilon (common random numbers).
  const auto widest = training::abc_rejection<double>(prior, sim, summary, dist, 4.0, 100000,
                                                      training::Stats{double(observed)}, 1, opt.workers);
  auto tv = [&](const training::AbcResult<double>& r) {
    std::vector<double> hist(bins, 0.0);
    for (double t : r.accepted) hist[std::min(bins - 1, static_cast<int>(t * bins))] += 1.0 / r.accepted.size();
    double total = 0.0;
    for (int b = 0; b < bins; ++b) {
      const double exact = boost::math::ibeta(1.0 + observed, 1.0 + trials - observed, (b + 1.0) / bins) -
                           boost::math::ibeta(1.0 + observed, 1.0 + trials - observed, double(b) / bins);
      total += std::abs(hist[b] - exact);
    }
    return total / 2;
  };
  std::vector<double> tvs;
  std::string detail = "TV at eps 4/2/1/0:";
  for (double eps : {4.0, 2.0, 1.0, 0.0}) {
    const auto r = training::rethreshold(widest, eps);
    tvs.push_back(tv(r));
    detail += fmt::format(" {:.4f} ({} accepted)", tvs.back(), r.accepted.size());
  }
  const bool ok = tvs[3] < 0.05 && std::is_sorted(tvs.rbegin(), tvs.rend()) &&
                  std::adjacent_find(tvs.begin(), tvs.end()) == tvs.end();
  return {ok, detail};
}

// ---- 9: continuous task

Verdict continuous_task(const Options& opt) {
  coalescent::SimConfig sim;
  hotspot::PriorConfig prior;
  prior.task = hotspot::TaskKind::Continuous;
  prior.continuous_range = {1.0, 100.0};
  prior.continuous_background = 5e-4;

  std::vector<LabeledWindow> grid;
  std::vector<double> truths;
  for (int i = 0; i < 200; ++i) {
    hotspot::PriorDraw draw;
    draw.task = hotspot::TaskKind::Continuous;
    draw.window = hotspot::centered_window(prior, sim.length);
    draw.background = prior.continuous_background;
    draw.k = 1.0 + 99.0 * i / 199.0;
    draw.map = hotspot::hotspot_map(draw.background, draw.k, draw.window, sim.length);
    Rng rng = make_rng(1, Stream::Test, i);
    grid.push_back(coalescent::simulate_window(draw, sim, rng));
    truths.push_back(draw.k);
  }
  const auto heldout = training::simulate_set(training::prior_source(sim, prior, 1, Stream::Heldout), 0, 500,
                                              opt.workers);

  struct HeadResult {
    double coverage, rho;
  };
  auto run = [&](const char* head) {
    auto a = desk_arch();
    a.positions = sim.d;
    exchnet::set_head(a, head);
    a.target_low = std::log(prior.continuous_range.low);
    a.target_high = std::log(prior.continuous_range.high);
    auto net = training::initial_network(a, 1);
    progress(fmt::format("continuous training, {} head", head));
    training::train_on_the_fly(net, training::prior_source(sim, prior, 1, Stream::Train), desk_train(opt.workers),
                               heldout);
    const auto posts = training::predict(net, grid);
    std::vector<double> means;
    for (const auto& p : posts) means.push_back(eval::posterior_mean(p));
    return HeadResult{eval::ci_coverage(posts, truths, 0.95), eval::spearman(truths, means)};
  };
  const auto single = run("lognormal");
  const auto mixture = run("lognormal_mixture");
  const bool ok = single.coverage >= 0.90 && single.coverage <= 0.99 && single.rho > 0.5 &&
                  mixture.rho >= single.rho - 0.05;
  return {ok, fmt::format("log-normal head: coverage {:.3f}, spearman {:.3f}; mixture head: coverage {:.3f}, "
                          "spearman {:.3f}",
                          single.coverage, single.rho, mixture.coverage, mixture.rho)};
}

// ---- 11: model files

Verdict serialization(const Options&) {
  int exact = 0;
  Rng rng{1100};
  static const char* heads[] = {"softmax", "gaussian", "lognormal", "mixture", "lognormal_mixture"};
  std::string sample;
  for (int i = 0; i < 100; ++i) {
    Architecture a;
    a.positions = std::uniform_int_distribution<int>{5, 24}(rng);
    a.conv1_filters = std::uniform_int_distribution<int>{1, 8}(rng);
    a.conv2_filters = std::uniform_int_distribution<int>{1, 8}(rng);
    a.fc1_units = std::uniform_int_distribution<int>{1, 16}(rng);
    a.fc2_units = std::uniform_int_distribution<int>{1, 16}(rng);
    a.pooling = static_cast<exchnet::Pooling>(i % 3);
    exchnet::set_head(a, heads[i % 5]);
    a.mixture_components = 1 + i % 4;
    auto net = ExchNet::initialized(a, 5000 + i);
    if (i % 2) {
      // Give it optimizer state too.
      std::vector<LabeledWindow> batch(2);
      for (auto& w : batch) {
        w.rows = 6;
        w.positions = a.positions;
        w.tensor = random_input(1, 6, a.positions, rng);
        w.label = a.head == exchnet::HeadKind::Softmax ? 1.0 : 5.0;
      }
      const LabeledWindow* ptrs[] = {&batch[0], &batch[1]};
      training::train_step(net, ptrs, nullptr, {});
    }
    const auto bytes = exchnet::encode_model(net);
    const auto back = exchnet::decode_model(bytes);
    bool same = back.architecture() == net.architecture() && back.optimizer().step == net.optimizer().step &&
                exchnet::encode_model(back) == bytes;
    for (std::size_t p = 0; same && p < net.params().size(); ++p)
      same = std::memcmp(net.params()[p].data(), back.params()[p].data(), net.params()[p].size() * 8) == 0;
    exact += same;
    if (i == 1) sample = bytes;
  }

  auto rejects = [&](std::string bytes, auto tag) {
    try {
      exchnet::decode_model(bytes);
    } catch (const decltype(tag)&) {
      return true;
    } catch (...) {
    }
    return false;
  };
  auto bad_magic = sample;
  bad_magic[1] = '?';
  auto bad_version = sample;
  bad_version[4] = static_cast<char>(bad_version[4] + 1);
  auto bad_payload = sample;
  bad_payload[sample.size() / 2] = static_cast<char>(bad_payload[sample.size() / 2] ^ 0x10);
  int truncations = 0, truncations_ok = 0;
  for (std::size_t len = 0; len < sample.size(); len += 7, ++truncations)
    truncations_ok += len < 4 ? rejects(sample.substr(0, len), exchnet::MagicMismatch{})
                              : rejects(sample.substr(0, len), exchnet::TruncatedFile{});
  const bool magic = rejects(bad_magic, exchnet::MagicMismatch{});
  const bool version = rejects(bad_version, exchnet::VersionUnsupported{0});
  const bool checksum = rejects(bad_payload, exchnet::ChecksumMismatch{});
  return {exact == 100 && magic && version && checksum && truncations_ok == truncations,
          fmt::format("{}/100 bit-exact round trips; magic {}, version {}, checksum {}, truncation {}/{}", exact,
                      magic ? "rejected" : "MISSED", version ? "rejected" : "MISSED",
                      checksum ? "rejected" : "MISSED", truncations_ok, truncations)};
}

// ---- 12: CLI determinism

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator{dir})
    if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = read_file(e.path());
  return files;
}

Verdict cli_determinism(const Options& opt) {
  const fs::path root = fs::absolute(opt.cache_dir / "determinism");
  fs::remove_all(root);
  fs::create_directories(root);
  const auto config = root / "config.json";
  {
    std::ofstream out{config};
    out << R"({
  "schema_version": 1,
  "seed": 7,
  "sim": {"n": 8, "d": 8, "length": 28000},
  "network": {"patch": 3, "conv1_filters": 2, "conv2_filters": 3, "fc1_units": 4, "fc2_units": 4},
  "train": {"steps": 20, "batch_size": 5, "eval_every": 10, "heldout_size": 20},
  "eval": {"test_size": 40},
  "experiment": {"replicates": 2, "dataset_size": 10}
})";
  }
  const auto fixed_config = root / "fixed.json";
  {
    std::ofstream out{fixed_config};
    out << fmt::format(R"({{
  "schema_version": 1,
  "seed": 7,
  "sim": {{"n": 8, "d": 8, "length": 28000}},
  "network": {{"patch": 3, "conv1_filters": 2, "conv2_filters": 3, "fc1_units": 4, "fc2_units": 4}},
  "train": {{"steps": 20, "batch_size": 5, "eval_every": 10, "heldout_size": 20, "mode": "fixed",
            "dataset_path": "{}"}}
}})",
                       (root / "work" / "simulate" / cli::kWindowsFile).string());
  }
  const auto work = root / "work";
  const std::string workers = std::to_string(opt.workers);
  const std::vector<std::vector<std::string>> commands{
      {"simulate", "--config", config.string(), "--count", "25", "--out", (work / "simulate").string()},
      {"train", "--config", config.string(), "--out", (work / "train").string()},
      {"train", "--config", fixed_config.string(), "--out", (work / "train_fixed").string()},
      {"eval", "--config", config.string(), "--model", (work / "train" / cli::kModelFile).string(), "--out",
       (work / "eval").string()},
      {"eval", "--config", config.string(), "--model", (work / "train" / cli::kModelFile).string(), "--data",
       (work / "simulate" / cli::kWindowsFile).string(), "--out", (work / "eval_data").string()},
      {"infer", "--model", (work / "train" / cli::kModelFile).string(), "--window",
       (work / "simulate" / cli::kWindowsFile).string()},
      {"experiment-fixed-vs-fly", "--config", config.string(), "--out", (work / "experiment").string()},
  };

  std::vector<std::map<std::string, std::string>> runs;
  for (int pass = 0; pass < 2; ++pass) {
    fs::remove_all(work);
    std::map<std::string, std::string> stdout_by_command;
    for (std::size_t c = 0; c < commands.size(); ++c) {
      std::vector<const char*> argv{"popinfer"};
      for (const auto& a : commands[c]) argv.push_back(a.c_str());
      if (commands[c][0] != "infer") {
        argv.push_back("--workers");
        argv.push_back(workers.c_str());
      }
      std::ostringstream captured;
      auto* old = std::cout.rdbuf(captured.rdbuf());
      const int code = cli::run(static_cast<int>(argv.size()), argv.data());
      std::cout.rdbuf(old);
      if (code != 0) return {false, fmt::format("`{}` exited with {}", commands[c][0], code)};
      stdout_by_command[fmt::format("stdout:{}", c)] = captured.str();
    }
    auto files = snapshot(work);
    files.merge(stdout_by_command);
    runs.push_back(std::move(files));
  }
  std::vector<std::string> differing;
  for (const auto& [name, bytes] : runs[0]) {
    const auto it = runs[1].find(name);
    if (it == runs[1].end() || it->second != bytes) differing.push_back(name);
  }
  if (runs[0].size() != runs[1].size()) differing.push_back("(file sets differ)");
  std::string detail = fmt::format("{} artifacts from {} commands compared", runs[0].size(), commands.size());
  for (const auto& d : differing) detail += "; differs: " + d;
  return {differing.empty(), detail};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  Options opt;
  std::string cache = opt.cache_dir.string();
  std::vector<int> only;
  app.add_option("--cache-dir", cache, "where expensive oracles and scratch runs live");
  app.add_option("--only", only, "criteria to run (default: all)")->delimiter(',')->check(CLI::Range(1, 12));
  app.add_option("--workers", opt.workers, "worker threads, 0 = all cores");
  CLI11_PARSE(app, argc, argv);
  opt.cache_dir = cache;
  const std::set<int> selected(only.begin(), only.end());

  HotspotRuns hotspot{opt};
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria{
      {"permutation invariance", [&] { return permutation_invariance(opt); }},
      {"gradient correctness", [&] { return gradient_check(opt); }},
      {"coalescent validity", [&] { return coalescent_moments(opt); }},
      {"hotspot task skill", [&] { return hotspot_skill(hotspot); }},
      {"fixed vs on-the-fly", [&] { return fixed_vs_fly(hotspot); }},
      {"calibration", [&] { return calibration(hotspot); }},
      {"toy KL to oracle", [&] { return toy_kl(opt); }},
      {"ABC correctness", [&] { return abc_beta_binomial(opt); }},
      {"continuous task", [&] { return continuous_task(opt); }},
      {"sample-size robustness", [&] { return sample_size_robustness(hotspot); }},
      {"serialization", [&] { return serialization(opt); }},
      {"determinism", [&] { return cli_determinism(opt); }},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    std::cerr << fmt::format("criterion {}: {}", id, criteria[i].first) << std::endl;
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string{"exception: "} + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failures += !v.pass;
    std::cout << fmt::format("{} {:>2} {}: {} [{:.0f} s]", v.pass ? "PASS" : "FAIL", id, criteria[i].first, v.detail,
                             secs)
              << std::endl;
  }
  return failures == 0 ? 0 : 1;
}

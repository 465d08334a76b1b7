#include "popinfer/cli/commands.hpp"

#include <openssl/sha.h>

#include <algorithm>
#include <cmath>
#include <iostream>
#include <sstream>

#include <fmt/core.h>

#include "popinfer/common/binary_io.hpp"
#include "popinfer/eval/metrics.hpp"
#include "popinfer/exchnet/losses.hpp"
#include "popinfer/exchnet/serialize.hpp"
#include "popinfer/hotspot/window_file.hpp"
#include "popinfer/training/experiment.hpp"
#include "popinfer/training/trainer.hpp"

namespace popinfer::cli {

using nlohmann::ordered_json;

namespace {

constexpr const char* kVersion = "0.1.0";

Stream split_stream(Split s) {
  switch (s) {
    case Split::Train: return Stream::Train;
    case Split::Heldout: return Stream::Heldout;
    case Split::Test: return Stream::Test;
  }
  return Stream::Test;
}

std::string split_name(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Heldout: return "heldout";
    case Split::Test: return "test";
  }
  return "?";
}

ordered_json manifest_base(const RunConfig& cfg, const std::string& command) {
  auto config = cfg.to_json();
  // The output location does not affect any artifact.
  config.erase("out_dir");
  ordered_json m;
  m["command"] = command;
  m["seed"] = cfg.seed;
  m["config_hash"] = cfg.hash();
  m["data_hash"] = cfg.data_hash();
  m["formats"] = ordered_json{{"model", exchnet::kModelFormatVersion},
                              {"windows", hotspot::kWindowFormatVersion},
                              {"config_schema", kConfigSchemaVersion}};
  m["code_version"] = code_version();
  m["code_version_hash"] = code_version_hash();
  m["config"] = std::move(config);
  return m;
}

void write_json(const fs::path& path, const ordered_json& j) { write_file(path, j.dump(2) + "\n"); }

std::string number(double v) { return fmt::format("{:.17g}", v); }

void write_metrics(const fs::path& path, const std::vector<std::pair<std::string, double>>& rows) {
  std::string out = "metric,value\n";
  for (const auto& [name, value] : rows) out += name + "," + number(value) + "\n";
  write_file(path, out);
}

std::vector<int> int_labels(std::span<const hotspot::LabeledWindow> windows) {
  std::vector<int> labels;
  labels.reserve(windows.size());
  for (const auto& w : windows) labels.push_back(static_cast<int>(w.label));
  return labels;
}

ordered_json posterior_json(const exchnet::Posterior& post, double level) {
  ordered_json j;
  if (const auto* d = std::get_if<exchnet::DiscreteProbs>(&post)) {
    j["family"] = "categorical";
    j["probabilities"] = d->p;
    return j;
  }
  if (const auto* g = std::get_if<exchnet::GaussianPosterior>(&post)) {
    j["family"] = g->log_space ? "lognormal" : "gaussian";
    j["mu"] = g->mu;
    j["tau"] = g->tau;
  } else {
    const auto& m = std::get<exchnet::MixturePosterior>(post);
    j["family"] = m.log_space ? "lognormal_mixture" : "mixture";
    j["components"] = ordered_json::array();
    for (const auto& c : m.components)
      j["components"].push_back(ordered_json{{"weight", c.weight}, {"mu", c.mu}, {"tau", c.tau}});
  }
  const auto iv = eval::credible_interval(post, level);
  j["mean"] = eval::posterior_mean(post);
  j["level"] = level;
  j["interval"] = ordered_json::array({iv.lower, iv.upper});
  return j;
}

void check_shape(const exchnet::Architecture& arch, const hotspot::LabeledWindow& w) {
  if (w.positions != arch.positions)
    throw std::runtime_error(fmt::format("incompatible windows: model expects d={}, data has d={}", arch.positions,
                                         w.positions));
}

}  // namespace

Split parse_split(const std::string& name) {
  if (name == "train") return Split::Train;
  if (name == "heldout") return Split::Heldout;
  if (name == "test") return Split::Test;
  throw ConfigError("unknown split '" + name + "' (expected train, heldout or test)");
}

std::string code_version() {
  return fmt::format("popinfer {}; model format {}; window format {}; config schema {}", kVersion,
                     exchnet::kModelFormatVersion, hotspot::kWindowFormatVersion, kConfigSchemaVersion);
}

std::string code_version_hash() {
  const auto text = code_version();
  const auto blob = fmt::format("blob {}", text.size()) + std::string(1, '\0') + text;
  unsigned char digest[SHA_DIGEST_LENGTH];
  SHA1(reinterpret_cast<const unsigned char*>(blob.data()), blob.size(), digest);
  std::string hex;
  for (unsigned char c : digest) hex += fmt::format("{:02x}", c);
  return hex;
}

std::optional<std::string> sidecar_mismatch(const fs::path& dataset, const std::string& expected_hash) {
  auto sidecar = dataset;
  sidecar.replace_extension(".json");
  if (!fs::exists(sidecar)) return "dataset " + dataset.string() + " has no sidecar; cannot check its config";
  const auto j = nlohmann::json::parse(read_file(sidecar), nullptr, false);
  if (j.is_discarded() || !j.contains("data_hash")) return "sidecar " + sidecar.string() + " is unreadable";
  const auto recorded = j["data_hash"].get<std::string>();
  if (recorded != expected_hash)
    return fmt::format("dataset {} was simulated with config {} but the current sim/prior config hashes to {}",
                       dataset.string(), recorded, expected_hash);
  return std::nullopt;
}

std::vector<hotspot::LabeledWindow> load_dataset(const fs::path& path, const RunConfig& cfg) {
  if (!fs::exists(path)) throw std::runtime_error("dataset not found: " + path.string());
  if (const auto warning = sidecar_mismatch(path, cfg.data_hash())) std::cerr << "warning: " << *warning << "\n";
  return hotspot::load_windows(path);
}

void cmd_simulate(const RunConfig& cfg, std::size_t count, Split split, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  auto sim = cfg.sim;
  const auto windows = training::simulate_set(
      training::prior_source(sim, cfg.prior, cfg.seed, split_stream(split)), 0, count, cfg.workers);
  const auto path = out_dir / kWindowsFile;
  hotspot::save_windows(windows, sim.rows(), sim.d, path);
  auto side = manifest_base(cfg, "simulate");
  side["split"] = split_name(split);
  side["count"] = count;
  side["n"] = sim.rows();
  side["d"] = sim.d;
  write_json(fs::path{path}.replace_extension(".json"), side);
}

void cmd_train(const RunConfig& cfg, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  auto net = training::initial_network(cfg.network, cfg.seed);
  const auto heldout = training::simulate_set(
      training::prior_source(cfg.sim, cfg.prior, cfg.seed, Stream::Heldout), 0, cfg.heldout_size, cfg.workers);
  training::TrainTrace trace;
  auto tc = cfg.train;
  if (tc.mode == training::TrainMode::OnTheFly) {
    trace = training::train_on_the_fly(net, training::prior_source(cfg.sim, cfg.prior, cfg.seed, Stream::Train), tc,
                                       heldout);
  } else {
    const auto dataset = load_dataset(cfg.dataset_path, cfg);
    if (dataset.empty()) throw std::runtime_error("fixed-mode dataset " + cfg.dataset_path + " is empty");
    check_shape(cfg.network, dataset.front());
    tc.dataset_size = dataset.size();
    trace = training::train_fixed(net, dataset, tc, heldout);
  }
  exchnet::save_model(net, out_dir / kModelFile);
  write_file(out_dir / kTraceFile, trace.csv());
  const auto& last = trace.records.back();
  write_metrics(out_dir / kMetricsFile, {{"final_train_loss", last.train_loss},
                                         {"final_heldout_loss", last.heldout_loss},
                                         {"final_heldout_accuracy", last.heldout_accuracy}});
  auto m = manifest_base(cfg, "train");
  m["head"] = exchnet::head_name(cfg.network);
  m["head_output_size"] = cfg.network.output_size();
  if (tc.mode == training::TrainMode::Fixed) m["dataset_size"] = tc.dataset_size;
  write_json(out_dir / kManifestFile, m);
}

void cmd_eval(const RunConfig& cfg, const fs::path& model, const std::optional<fs::path>& data,
              const fs::path& out_dir) {
  if (!fs::exists(model)) throw std::runtime_error("model not found: " + model.string());
  const auto net = exchnet::load_model(model);
  const auto& arch = net.architecture();
  std::vector<hotspot::LabeledWindow> windows;
  if (data) {
    windows = load_dataset(*data, cfg);
  } else {
    auto sim = cfg.sim;
    if (cfg.eval.rows) sim.n = *cfg.eval.rows;
    windows = training::simulate_set(training::prior_source(sim, cfg.prior, cfg.seed, Stream::Test), 0,
                                     cfg.eval.test_size, cfg.workers);
  }
  if (windows.empty()) throw std::runtime_error("no windows to evaluate");
  check_shape(arch, windows.front());

  const bool discrete = arch.head == exchnet::HeadKind::Softmax;
  auto metrics = cfg.eval.metrics;
  if (metrics.empty())
    metrics = discrete ? std::vector<std::string>{"loss", "accuracy", "auc", "calibration"}
                       : std::vector<std::string>{"loss", "coverage", "spearman"};
  for (const auto& name : metrics) {
    const bool ok = name == "loss" || (discrete && (name == "accuracy" || name == "auc" || name == "calibration")) ||
                    (!discrete && (name == "coverage" || name == "spearman"));
    if (!ok) throw ConfigError("metric '" + name + "' does not apply to a " + exchnet::head_name(arch) + " head");
  }

  fs::create_directories(out_dir);
  const auto posts = training::predict(net, windows);
  std::vector<std::pair<std::string, double>> rows{{"windows", static_cast<double>(windows.size())},
                                                   {"rows", static_cast<double>(windows.front().rows)}};
  std::vector<double> scores;
  std::vector<int> labels;
  if (discrete) {
    for (const auto& p : posts) scores.push_back(training::positive_probability(p));
    labels = int_labels(windows);
  }
  for (const auto& name : metrics) {
    if (name == "loss") {
      rows.emplace_back("loss", training::evaluate(net, windows).loss);
    } else if (name == "accuracy") {
      rows.emplace_back("accuracy", training::evaluate(net, windows).accuracy);
    } else if (name == "auc") {
      const auto roc = eval::roc_auc(scores, labels);
      rows.emplace_back("auc", roc.auc);
      std::ostringstream s;
      eval::write_roc_csv(s, roc);
      write_file(out_dir / "roc.csv", s.str());
    } else if (name == "calibration") {
      const auto pos = std::count(labels.begin(), labels.end(), 1);
      if (pos == 0 || pos == static_cast<long>(labels.size())) throw eval::SingleClass{};
      const auto curve = eval::calibration_curve(scores, labels, cfg.eval.calibration_bins);
      rows.emplace_back("calibration_max_deviation", curve.max_deviation(1));
      std::ostringstream s;
      eval::write_calibration_csv(s, curve);
      write_file(out_dir / "calibration.csv", s.str());
    } else if (name == "coverage") {
      std::vector<double> truths;
      for (const auto& w : windows) truths.push_back(w.label);
      rows.emplace_back(fmt::format("coverage_{:g}", cfg.eval.level), eval::ci_coverage(posts, truths, cfg.eval.level));
    } else if (name == "spearman") {
      std::vector<double> truths;
      std::vector<double> means;
      for (std::size_t i = 0; i < windows.size(); ++i) {
        truths.push_back(windows[i].label);
        means.push_back(eval::posterior_mean(posts[i]));
      }
      rows.emplace_back("spearman", eval::spearman(truths, means));
    }
  }
  write_metrics(out_dir / kMetricsFile, rows);
  auto m = manifest_base(cfg, "eval");
  m["model"] = model.string();
  m["model_hash"] = fnv1a_hex(read_file(model));
  m["data"] = data ? ordered_json(data->string()) : ordered_json(nullptr);
  m["data_file_hash"] = data ? ordered_json(fnv1a_hex(read_file(*data))) : ordered_json(nullptr);
  m["metrics"] = metrics;
  write_json(out_dir / kManifestFile, m);
}

std::string cmd_infer(const fs::path& model, const fs::path& windows_path, double level) {
  if (!fs::exists(model)) throw std::runtime_error("model not found: " + model.string());
  if (!fs::exists(windows_path)) throw std::runtime_error("window file not found: " + windows_path.string());
  const auto net = exchnet::load_model(model);
  const auto windows = hotspot::load_windows(windows_path);
  if (windows.empty()) throw std::runtime_error("window file holds no windows");
  check_shape(net.architecture(), windows.front());
  const auto posts = training::predict(net, windows);
  if (posts.size() == 1) return posterior_json(posts.front(), level).dump(2);
  auto all = ordered_json::array();
  for (const auto& p : posts) all.push_back(posterior_json(p, level));
  return all.dump(2);
}

void cmd_experiment_fixed_vs_fly(const RunConfig& cfg, const fs::path& out_dir) {
  if (cfg.network.head != exchnet::HeadKind::Softmax)
    throw ConfigError("experiment-fixed-vs-fly compares cross-entropy and needs the discrete task");
  fs::create_directories(out_dir / "traces");
  training::ExperimentSetup setup{cfg.sim, cfg.prior, cfg.network, cfg.train, cfg.experiment.dataset_size,
                                  cfg.heldout_size};
  std::string table = "replicate,seed,mode,final_heldout_loss,final_heldout_accuracy\n";
  std::vector<double> fly_losses;
  std::vector<double> fixed_losses;
  for (int r = 0; r < cfg.experiment.replicates; ++r) {
    const auto seed = cfg.seed + static_cast<std::uint64_t>(r);
    const auto runs = training::run_matched(setup, seed);
    for (const auto* mode : {"on_the_fly", "fixed"}) {
      const auto& trace = std::string_view{mode} == "fixed" ? runs.fixed_trace : runs.on_the_fly_trace;
      const auto& last = trace.records.back();
      table += fmt::format("{},{},{},{},{}\n", r + 1, seed, mode, number(last.heldout_loss),
                           number(last.heldout_accuracy));
      write_file(out_dir / "traces" / fmt::format("replicate_{:02d}_{}.csv", r + 1, mode), trace.csv());
    }
    fly_losses.push_back(training::final_heldout_loss(runs.on_the_fly_trace));
    fixed_losses.push_back(training::final_heldout_loss(runs.fixed_trace));
  }
  write_file(out_dir / "experiment.csv", table);
  auto mean = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  auto variance = [&](const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double mu = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - mu) * (x - mu);
    return s / static_cast<double>(v.size() - 1);
  };
  const double fly_mean = mean(fly_losses), fixed_mean = mean(fixed_losses);
  const double fly_var = variance(fly_losses), fixed_var = variance(fixed_losses);
  write_metrics(out_dir / kMetricsFile, {{"on_the_fly_mean_loss", fly_mean},
                                         {"on_the_fly_var_loss", fly_var},
                                         {"fixed_mean_loss", fixed_mean},
                                         {"fixed_var_loss", fixed_var},
                                         {"fixed_mean_ge_on_the_fly", fixed_mean >= fly_mean ? 1.0 : 0.0},
                                         {"fixed_var_ge_on_the_fly", fixed_var >= fly_var ? 1.0 : 0.0}});
  auto m = manifest_base(cfg, "experiment-fixed-vs-fly");
  m["replicate_seeds"] = ordered_json::array();
  for (int r = 0; r < cfg.experiment.replicates; ++r) m["replicate_seeds"].push_back(cfg.seed + r);
  write_json(out_dir / kManifestFile, m);
}

}  // namespace popinfer::cli

#include "popinfer/cli/config.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/core.h>

#include "popinfer/common/binary_io.hpp"

namespace popinfer::cli {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

// Reads typed fields of one JSON object and remembers which keys were used so
// leftovers can be reported as unknown.
class Section {
 public:
  Section(const json& node, std::string path) : node_{node}, path_{std::move(path)} {
    if (!node_.is_object()) fail(path_, "expected an object");
  }

  bool has(const char* key) const { return node_.contains(key); }

  void get(const char* key, int& out) { read(key, out, "an integer", [](const json& v) { return v.is_number_integer(); }); }
  void get(const char* key, std::uint64_t& out) {
    read(key, out, "a non-negative integer", [](const json& v) { return v.is_number_unsigned(); });
  }
  void get(const char* key, double& out) { read(key, out, "a number", [](const json& v) { return v.is_number(); }); }
  void get(const char* key, bool& out) { read(key, out, "a boolean", [](const json& v) { return v.is_boolean(); }); }
  void get(const char* key, std::string& out) {
    read(key, out, "a string", [](const json& v) { return v.is_string(); });
  }
  void get(const char* key, hotspot::Range& out) {
    if (!has(key)) return;
    used_.insert(key);
    const auto& v = node_.at(key);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
      fail(field(key), "expected a [low, high] pair of numbers");
    out = {v[0].get<double>(), v[1].get<double>()};
  }

  const json* child(const char* key) {
    if (!has(key)) return nullptr;
    used_.insert(key);
    return &node_.at(key);
  }

  std::string field(std::string_view key) const { return path_.empty() ? std::string{key} : path_ + "." + std::string{key}; }

  void finish() const {
    for (const auto& [key, value] : node_.items())
      if (!used_.count(key)) fail(field(key), "unknown key");
  }

  [[noreturn]] static void fail(const std::string& where, const std::string& what) {
    throw ConfigError(fmt::format("config field '{}': {}", where, what));
  }

 private:
  template <typename T, typename Check>
  void read(const char* key, T& out, const char* expected, Check&& ok) {
    if (!has(key)) return;
    used_.insert(key);
    const auto& v = node_.at(key);
    if (!ok(v)) fail(field(key), std::string{"expected "} + expected);
    out = v.get<T>();
  }

  const json& node_;
  std::string path_;
  std::set<std::string> used_;
};

template <typename Fn>
void guarded(const std::string& where, Fn&& fn) {
  try {
    fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    Section::fail(where, e.what());
  }
}

void read_sim(Section& s, coalescent::SimConfig& sim) {
  s.get("n", sim.n);
  s.get("length", sim.length);
  s.get("mu", sim.mu);
  s.get("ne", sim.ne);
  s.get("d", sim.d);
  s.get("retry_cap", sim.retry_cap);
  s.get("minor_allele_recode", sim.minor_allele_recode);
  s.get("unphased", sim.unphased);
  if (const auto* sizes = s.child("pop_sizes")) {
    if (!sizes->is_array() || sizes->empty()) Section::fail(s.field("pop_sizes"), "expected a nonempty array");
    std::vector<coalescent::PopSizeHistory::Epoch> epochs;
    for (std::size_t i = 0; i < sizes->size(); ++i) {
      Section e{(*sizes)[i], s.field("pop_sizes") + "[" + std::to_string(i) + "]"};
      coalescent::PopSizeHistory::Epoch epoch{0.0, 1.0};
      e.get("start", epoch.start);
      e.get("relative_size", epoch.relative_size);
      e.finish();
      epochs.push_back(epoch);
    }
    guarded(s.field("pop_sizes"), [&] { sim.eta = coalescent::PopSizeHistory{std::move(epochs)}; });
  }
  s.finish();
}

void read_prior(Section& s, hotspot::PriorConfig& p) {
  std::string task = p.task == hotspot::TaskKind::Discrete ? "discrete" : "continuous";
  s.get("task", task);
  if (task == "discrete")
    p.task = hotspot::TaskKind::Discrete;
  else if (task == "continuous")
    p.task = hotspot::TaskKind::Continuous;
  else
    Section::fail(s.field("task"), "expected \"discrete\" or \"continuous\"");
  s.get("alpha_l", p.alpha_l);
  s.get("alpha_h", p.alpha_h);
  s.get("alpha_r", p.alpha_r);
  s.get("k_def", p.k_def);
  s.get("median_rate", p.median_rate);
  std::string bg = p.background == hotspot::BackgroundPrior::Fixed ? "fixed" : "log_uniform";
  s.get("background", bg);
  if (bg == "fixed")
    p.background = hotspot::BackgroundPrior::Fixed;
  else if (bg == "log_uniform")
    p.background = hotspot::BackgroundPrior::LogUniform;
  else
    Section::fail(s.field("background"), "expected \"fixed\" or \"log_uniform\"");
  s.get("background_value", p.background_value);
  s.get("background_range", p.background_range);
  s.get("hot_probability", p.hot_probability);
  s.get("hot_range", p.hot_range);
  s.get("null_range", p.null_range);
  s.get("null_elevation", p.null_elevation);
  s.get("continuous_range", p.continuous_range);
  s.get("continuous_background", p.continuous_background);
  s.get("max_rejections", p.max_rejections);
  s.finish();
}

void read_network(Section& s, exchnet::Architecture& a) {
  s.get("patch", a.patch);
  s.get("conv1_filters", a.conv1_filters);
  s.get("conv2_filters", a.conv2_filters);
  s.get("fc1_units", a.fc1_units);
  s.get("fc2_units", a.fc2_units);
  std::string pooling = exchnet::pooling_name(a.pooling);
  s.get("pooling", pooling);
  guarded(s.field("pooling"), [&] { a.pooling = exchnet::parse_pooling(pooling); });
  std::string head = exchnet::head_name(a);
  s.get("head", head);
  guarded(s.field("head"), [&] { exchnet::set_head(a, head); });
  s.get("mixture_components", a.mixture_components);
  s.get("dropout", a.dropout);
  s.finish();
}

void read_train(Section& s, RunConfig& cfg) {
  auto& t = cfg.train;
  s.get("steps", t.steps);
  s.get("batch_size", t.batch_size);
  std::string mode = t.mode == training::TrainMode::OnTheFly ? "on_the_fly" : "fixed";
  s.get("mode", mode);
  if (mode == "on_the_fly")
    t.mode = training::TrainMode::OnTheFly;
  else if (mode == "fixed")
    t.mode = training::TrainMode::Fixed;
  else
    Section::fail(s.field("mode"), "expected \"on_the_fly\" or \"fixed\"");
  s.get("dataset_path", cfg.dataset_path);
  s.get("without_replacement", t.without_replacement);
  s.get("eval_every", t.eval_every);
  s.get("heldout_size", cfg.heldout_size);
  s.get("record_wall_clock", t.record_wall_clock);
  s.get("learning_rate", t.adam.base_lr);
  s.get("lr_decay", t.adam.decay);
  s.get("lr_decay_steps", t.adam.decay_steps);
  s.finish();
}

void read_eval(Section& s, EvalConfig& e) {
  s.get("test_size", e.test_size);
  if (const auto* rows = s.child("rows")) {
    if (rows->is_null())
      e.rows.reset();
    else if (rows->is_number_integer())
      e.rows = rows->get<int>();
    else
      Section::fail(s.field("rows"), "expected an integer or null");
  }
  if (const auto* metrics = s.child("metrics")) {
    if (!metrics->is_array()) Section::fail(s.field("metrics"), "expected an array of metric names");
    e.metrics.clear();
    for (const auto& m : *metrics) {
      if (!m.is_string()) Section::fail(s.field("metrics"), "expected an array of metric names");
      e.metrics.push_back(m.get<std::string>());
    }
  }
  s.get("calibration_bins", e.calibration_bins);
  s.get("level", e.level);
  s.finish();
}

void read_experiment(Section& s, ExperimentConfig& x) {
  s.get("replicates", x.replicates);
  s.get("dataset_size", x.dataset_size);
  s.finish();
}

// Fields derived from other sections.
void finalize(RunConfig& cfg) {
  auto& a = cfg.network;
  a.positions = cfg.sim.d;
  a.input_channels = hotspot::kChannels;
  a.num_classes = 2;
  if (a.head != exchnet::HeadKind::Softmax) {
    const auto r = cfg.prior.continuous_range;
    if (a.log_space && r.low > 0.0) {
      a.target_low = std::log(r.low);
      a.target_high = std::log(r.high);
    } else {
      a.target_low = r.low;
      a.target_high = r.high;
    }
  } else {
    a.target_low = a.target_high = 0.0;
  }
  cfg.train.seed = cfg.seed;
  cfg.train.workers = cfg.workers;
}

std::string line_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return fmt::format("line {}, column {}", line, col);
}

ordered_json range_json(hotspot::Range r) { return ordered_json::array({r.low, r.high}); }

}  // namespace

void RunConfig::validate() const {
  guarded("sim", [&] { sim.validate(); });
  guarded("prior", [&] { prior.validate(); });
  guarded("network", [&] { network.validate(); });
  auto t = train;
  if (t.mode == training::TrainMode::Fixed) {
    if (dataset_path.empty())
      Section::fail("train.dataset_path", "fixed mode needs a dataset file written by `simulate`");
    t.dataset_size = std::max<std::size_t>(t.dataset_size, 1);
  }
  guarded("train", [&] { t.validate(); });
  const bool discrete = prior.task == hotspot::TaskKind::Discrete;
  if (discrete != (network.head == exchnet::HeadKind::Softmax))
    Section::fail("network.head", discrete ? "the discrete task needs the softmax head"
                                           : "the continuous task needs a gaussian, lognormal or mixture head");
  if (network.log_space && prior.continuous_range.low <= 0.0)
    Section::fail("prior.continuous_range", "log-space heads need a positive range");
  if (heldout_size == 0) Section::fail("train.heldout_size", "must be > 0");
  if (eval.calibration_bins < 1) Section::fail("eval.calibration_bins", "must be >= 1");
  if (!(eval.level > 0.0 && eval.level < 1.0)) Section::fail("eval.level", "must lie in (0, 1)");
  if (eval.rows && *eval.rows < 2) Section::fail("eval.rows", "must be >= 2");
  if (experiment.replicates < 1) Section::fail("experiment.replicates", "must be >= 1");
  if (experiment.dataset_size == 0) Section::fail("experiment.dataset_size", "must be > 0");
  if (workers < 0) Section::fail("workers", "must be >= 0");
}

ordered_json RunConfig::to_json() const {
  ordered_json j;
  j["schema_version"] = kConfigSchemaVersion;
  j["seed"] = seed;
  j["workers"] = workers;
  j["out_dir"] = out_dir;
  auto& s = j["sim"];
  s["n"] = sim.n;
  s["length"] = sim.length;
  s["mu"] = sim.mu;
  s["ne"] = sim.ne;
  s["d"] = sim.d;
  s["retry_cap"] = sim.retry_cap;
  s["minor_allele_recode"] = sim.minor_allele_recode;
  s["unphased"] = sim.unphased;
  s["pop_sizes"] = ordered_json::array();
  for (const auto& e : sim.eta.epochs())
    s["pop_sizes"].push_back(ordered_json{{"start", e.start}, {"relative_size", e.relative_size}});
  auto& p = j["prior"];
  p["task"] = prior.task == hotspot::TaskKind::Discrete ? "discrete" : "continuous";
  p["alpha_l"] = prior.alpha_l;
  p["alpha_h"] = prior.alpha_h;
  p["alpha_r"] = prior.alpha_r;
  p["k_def"] = prior.k_def;
  p["median_rate"] = prior.median_rate;
  p["background"] = prior.background == hotspot::BackgroundPrior::Fixed ? "fixed" : "log_uniform";
  p["background_value"] = prior.background_value;
  p["background_range"] = range_json(prior.background_range);
  p["hot_probability"] = prior.hot_probability;
  p["hot_range"] = range_json(prior.hot_range);
  p["null_range"] = range_json(prior.null_range);
  p["null_elevation"] = prior.null_elevation;
  p["continuous_range"] = range_json(prior.continuous_range);
  p["continuous_background"] = prior.continuous_background;
  p["max_rejections"] = prior.max_rejections;
  auto& n = j["network"];
  n["patch"] = network.patch;
  n["conv1_filters"] = network.conv1_filters;
  n["conv2_filters"] = network.conv2_filters;
  n["fc1_units"] = network.fc1_units;
  n["fc2_units"] = network.fc2_units;
  n["pooling"] = exchnet::pooling_name(network.pooling);
  n["head"] = exchnet::head_name(network);
  n["mixture_components"] = network.mixture_components;
  n["dropout"] = network.dropout;
  auto& t = j["train"];
  t["steps"] = train.steps;
  t["batch_size"] = train.batch_size;
  t["mode"] = train.mode == training::TrainMode::OnTheFly ? "on_the_fly" : "fixed";
  t["dataset_path"] = dataset_path;
  t["without_replacement"] = train.without_replacement;
  t["eval_every"] = train.eval_every;
  t["heldout_size"] = heldout_size;
  t["record_wall_clock"] = train.record_wall_clock;
  t["learning_rate"] = train.adam.base_lr;
  t["lr_decay"] = train.adam.decay;
  t["lr_decay_steps"] = train.adam.decay_steps;
  auto& e = j["eval"];
  e["test_size"] = eval.test_size;
  e["rows"] = eval.rows ? ordered_json(*eval.rows) : ordered_json(nullptr);
  e["metrics"] = eval.metrics;
  e["calibration_bins"] = eval.calibration_bins;
  e["level"] = eval.level;
  j["experiment"] = ordered_json{{"replicates", experiment.replicates}, {"dataset_size", experiment.dataset_size}};
  return j;
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

// The output directory is where results go, not what they are.
std::string RunConfig::hash() const {
  auto j = to_json();
  j.erase("out_dir");
  return fnv1a_hex(j.dump());
}

std::string RunConfig::data_hash() const {
  const auto j = to_json();
  return fnv1a_hex(ordered_json{{"sim", j["sim"]}, {"prior", j["prior"]}}.dump());
}

RunConfig parse_config(std::string_view text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("config is not valid JSON at {}: {}", line_column(text, e.byte == 0 ? 0 : e.byte - 1),
                                  e.what()));
  }
  RunConfig cfg;
  Section top{root, ""};
  if (!top.has("schema_version")) Section::fail("schema_version", "missing (expected 1)");
  int version = 0;
  top.get("schema_version", version);
  if (version != kConfigSchemaVersion)
    Section::fail("schema_version", fmt::format("unsupported version {} (expected {})", version, kConfigSchemaVersion));
  top.get("seed", cfg.seed);
  top.get("workers", cfg.workers);
  top.get("out_dir", cfg.out_dir);
  if (const auto* node = top.child("sim")) {
    Section s{*node, "sim"};
    read_sim(s, cfg.sim);
  }
  if (const auto* node = top.child("prior")) {
    Section s{*node, "prior"};
    read_prior(s, cfg.prior);
  }
  if (const auto* node = top.child("network")) {
    Section s{*node, "network"};
    read_network(s, cfg.network);
  }
  if (const auto* node = top.child("train")) {
    Section s{*node, "train"};
    read_train(s, cfg);
  }
  if (const auto* node = top.child("eval")) {
    Section s{*node, "eval"};
    read_eval(s, cfg.eval);
  }
  if (const auto* node = top.child("experiment")) {
    Section s{*node, "experiment"};
    read_experiment(s, cfg.experiment);
  }
  top.finish();
  finalize(cfg);
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const std::exception& e) {
    throw ConfigError(fmt::format("cannot read config {}: {}", path.string(), e.what()));
  }
  try {
    return parse_config(text);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

}  // namespace popinfer::cli

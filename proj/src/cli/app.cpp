#include <iostream>

#include <CLI11.hpp>

#include "popinfer/cli/commands.hpp"

namespace popinfer::cli {

namespace {

struct CommonFlags {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
};

void add_common(CLI::App& cmd, CommonFlags& f, bool with_out = true) {
  cmd.add_option("--config", f.config, "JSON run config (defaults apply when omitted)")->check(CLI::ExistingFile);
  if (with_out) cmd.add_option("--out", f.out, "output directory (overrides out_dir)");
  cmd.add_option("--seed", f.seed, "root seed (overrides the config)");
  cmd.add_option("--workers", f.workers, "worker threads, 0 = all cores")->check(CLI::NonNegativeNumber);
}

RunConfig resolve(const CommonFlags& f) {
  RunConfig cfg = f.config.empty() ? parse_config(R"({"schema_version": 1})") : load_config(f.config);
  if (f.seed) cfg.seed = *f.seed;
  if (f.workers) cfg.workers = *f.workers;
  if (!f.out.empty()) cfg.out_dir = f.out;
  cfg.train.seed = cfg.seed;
  cfg.train.workers = cfg.workers;
  return cfg;
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"Recombination hotspot detection from SNP windows with a row-permutation-invariant network"};
  app.require_subcommand(1);

  CommonFlags sim_flags;
  std::size_t count = 1000;
  std::string split = "train";
  auto* simulate = app.add_subcommand("simulate", "simulate labeled windows into an EXGW dataset");
  add_common(*simulate, sim_flags);
  simulate->add_option("--count", count, "number of windows");
  simulate->add_option("--split", split, "RNG stream: train, heldout or test");

  CommonFlags train_flags;
  auto* train = app.add_subcommand("train", "train a network (on-the-fly or fixed dataset)");
  add_common(*train, train_flags);

  CommonFlags eval_flags;
  std::string model;
  std::string data;
  std::vector<std::string> metrics;
  auto* evaluate = app.add_subcommand("eval", "evaluate a model on a dataset or a fresh test set");
  add_common(*evaluate, eval_flags);
  evaluate->add_option("--model", model, "EXNN model file")->required();
  evaluate->add_option("--data", data, "EXGW dataset (default: simulate eval.test_size windows)");
  evaluate->add_option("--metrics", metrics, "metrics to compute: loss accuracy auc calibration coverage spearman")
      ->delimiter(',');

  std::string infer_model;
  std::string window;
  double level = 0.95;
  auto* infer = app.add_subcommand("infer", "print the posterior for each window of an EXGW file");
  infer->add_option("--model", infer_model, "EXNN model file")->required();
  infer->add_option("--window", window, "EXGW window file")->required();
  infer->add_option("--level", level, "credible level for continuous posteriors")->check(CLI::Range(0.0, 1.0));

  CommonFlags exp_flags;
  auto* experiment =
      app.add_subcommand("experiment-fixed-vs-fly", "matched-seed comparison of fixed-set and on-the-fly training");
  add_common(*experiment, exp_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (simulate->parsed()) {
      const auto cfg = resolve(sim_flags);
      cmd_simulate(cfg, count, parse_split(split), cfg.out_dir);
    } else if (train->parsed()) {
      const auto cfg = resolve(train_flags);
      cmd_train(cfg, cfg.out_dir);
    } else if (evaluate->parsed()) {
      auto cfg = resolve(eval_flags);
      if (!metrics.empty()) cfg.eval.metrics = metrics;
      cmd_eval(cfg, model, data.empty() ? std::nullopt : std::optional<fs::path>{data}, cfg.out_dir);
    } else if (infer->parsed()) {
      std::cout << cmd_infer(infer_model, window, level) << "\n";
    } else if (experiment->parsed()) {
      const auto cfg = resolve(exp_flags);
      cmd_experiment_fixed_vs_fly(cfg, cfg.out_dir);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace popinfer::cli

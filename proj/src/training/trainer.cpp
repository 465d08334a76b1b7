#include "popinfer/training/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

#include <fmt/core.h>

#include "popinfer/exchnet/losses.hpp"

namespace popinfer::training {

using exchnet::ExchNet;

void TrainConfig::validate() const {
  if (steps == 0) throw std::invalid_argument("train.steps must be > 0");
  if (batch_size <= 0) throw std::invalid_argument("train.batch_size must be > 0");
  if (mode == TrainMode::Fixed && dataset_size == 0) throw std::invalid_argument("fixed mode needs dataset_size > 0");
  if (eval_every == 0) throw std::invalid_argument("train.eval_every must be > 0");
}

void TrainTrace::write_csv(std::ostream& out) const {
  out << "batch,train_loss,heldout_loss,heldout_accuracy,seconds\n";
  for (const auto& r : records)
    out << fmt::format("{},{:.17g},{:.17g},{:.17g},{:.6f}\n", r.batch, r.train_loss, r.heldout_loss,
                       r.heldout_accuracy, r.seconds);
}

std::string TrainTrace::csv() const {
  std::ostringstream s;
  write_csv(s);
  return s.str();
}

ExchNet initial_network(const exchnet::Architecture& arch, std::uint64_t seed) {
  return ExchNet::initialized(arch, derive_seed(seed, Stream::Init, 0));
}

double train_step(ExchNet& net, std::span<const LabeledWindow* const> batch, Rng* dropout_rng,
                  const exchnet::AdamConfig& adam) {
  const auto data = stack_tensors(batch);
  const auto& arch = net.architecture();
  const exchnet::BatchView view{data, static_cast<int>(batch.size()), batch.front()->rows,
                                batch.front()->positions, hotspot::kChannels};
  auto fwd = net.forward(view, dropout_rng);
  const auto out = static_cast<std::size_t>(arch.output_size());
  std::vector<double> grads(fwd.cache.head.size());
  double loss = 0.0;
  const double scale = 1.0 / static_cast<double>(batch.size());
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const auto lg = exchnet::head_loss(arch, std::span<const double>{fwd.cache.head}.subspan(b * out, out),
                                       batch[b]->label);
    loss += lg.loss;
    for (std::size_t k = 0; k < out; ++k) grads[b * out + k] = lg.grad[k] * scale;
  }
  loss *= scale;
  if (!std::isfinite(loss)) throw TrainingDiverged{net.optimizer().step};
  net.apply_gradients(net.backward(fwd.cache, grads), adam);
  return loss;
}

double positive_probability(const exchnet::Posterior& post) {
  const auto* d = std::get_if<exchnet::DiscreteProbs>(&post);
  if (!d || d->p.size() < 2) throw std::invalid_argument("positive_probability needs a discrete posterior");
  return d->p[1];
}

namespace {

constexpr std::size_t kPredictChunk = 100;

}  // namespace

std::vector<exchnet::Posterior> predict(const ExchNet& net, std::span<const LabeledWindow> windows) {
  std::vector<exchnet::Posterior> out(windows.size());
  // Group by row count so each forward pass sees one shape.
  std::map<int, std::vector<std::size_t>> by_rows;
  for (std::size_t i = 0; i < windows.size(); ++i) by_rows[windows[i].rows].push_back(i);
  for (const auto& [rows, idx] : by_rows) {
    for (std::size_t start = 0; start < idx.size(); start += kPredictChunk) {
      const auto stop = std::min(idx.size(), start + kPredictChunk);
      std::vector<const LabeledWindow*> chunk;
      for (auto k = start; k < stop; ++k) chunk.push_back(&windows[idx[k]]);
      const auto data = stack_tensors(chunk);
      const exchnet::BatchView view{data, static_cast<int>(chunk.size()), rows, chunk.front()->positions,
                                    hotspot::kChannels};
      auto fwd = net.forward(view);
      for (auto k = start; k < stop; ++k) out[idx[k]] = std::move(fwd.posteriors[k - start]);
    }
  }
  return out;
}

HeldoutMetrics evaluate(const ExchNet& net, std::span<const LabeledWindow> windows) {
  if (windows.empty()) throw std::invalid_argument("cannot evaluate on an empty set");
  const auto& arch = net.architecture();
  const auto posts = predict(net, windows);
  HeldoutMetrics m;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const double label = windows[i].label;
    std::visit(
        [&](const auto& p) {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, exchnet::DiscreteProbs>) {
            m.loss += exchnet::loss_xent(p, static_cast<int>(label));
            const auto best = std::max_element(p.p.begin(), p.p.end()) - p.p.begin();
            if (best == static_cast<long>(label)) ++correct;
          } else if constexpr (std::is_same_v<T, exchnet::GaussianPosterior>) {
            m.loss += exchnet::loss_gaussian_nll(p.mu, p.tau, exchnet::head_target(arch, label));
          } else {
            m.loss += exchnet::loss_mixture_nll(p, exchnet::head_target(arch, label));
          }
        },
        posts[i]);
  }
  m.loss /= static_cast<double>(windows.size());
  m.accuracy = arch.head == exchnet::HeadKind::Softmax
                   ? static_cast<double>(correct) / static_cast<double>(windows.size())
                   : std::numeric_limits<double>::quiet_NaN();
  return m;
}

namespace {

// Shared step loop; `next_batch(b)` returns the windows of batch b.
template <typename NextBatch>
TrainTrace run_loop(ExchNet& net, const TrainConfig& cfg, std::span<const LabeledWindow> heldout,
                    const BatchHook& hook, NextBatch&& next_batch) {
  cfg.validate();
  const auto clock_start = std::chrono::steady_clock::now();
  Rng dropout_rng = make_rng(cfg.seed, Stream::Dropout, 0);
  TrainTrace trace;
  double loss_sum = 0.0;
  std::uint64_t loss_count = 0;
  for (std::uint64_t b = 1; b <= cfg.steps; ++b) {
    const auto windows = next_batch(b - 1);
    std::vector<const LabeledWindow*> ptrs;
    ptrs.reserve(windows.size());
    for (const auto& w : windows) ptrs.push_back(&w);
    double loss = 0.0;
    try {
      loss = train_step(net, ptrs, &dropout_rng, cfg.adam);
    } catch (const exchnet::NonFiniteActivation&) {
      throw TrainingDiverged{b};
    } catch (const std::domain_error&) {
      throw TrainingDiverged{b};
    }
    loss_sum += loss;
    ++loss_count;
    if (hook) hook(b, net);
    if (b % cfg.eval_every == 0 || b == cfg.steps) {
      TraceRecord rec;
      rec.batch = b;
      rec.train_loss = loss_sum / static_cast<double>(loss_count);
      if (!heldout.empty()) {
        const auto m = evaluate(net, heldout);
        rec.heldout_loss = m.loss;
        rec.heldout_accuracy = m.accuracy;
      } else {
        rec.heldout_loss = rec.heldout_accuracy = std::numeric_limits<double>::quiet_NaN();
      }
      if (cfg.record_wall_clock)
        rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - clock_start).count();
      trace.records.push_back(rec);
      loss_sum = 0.0;
      loss_count = 0;
    }
  }
  return trace;
}

}  // namespace

TrainTrace train_on_the_fly(ExchNet& net, const WindowSource& source, const TrainConfig& cfg,
                            std::span<const LabeledWindow> heldout, const BatchHook& hook) {
  const auto bs = static_cast<std::uint64_t>(cfg.batch_size);
  return run_loop(net, cfg, heldout, hook,
                  [&](std::uint64_t b) { return simulate_set(source, b * bs, cfg.batch_size, cfg.workers); });
}

TrainTrace train_fixed(ExchNet& net, std::span<const LabeledWindow> dataset, const TrainConfig& cfg,
                       std::span<const LabeledWindow> heldout, const BatchHook& hook) {
  if (dataset.empty()) throw std::invalid_argument("fixed-mode training needs a nonempty dataset");
  Rng sampler = make_rng(cfg.seed, Stream::BatchSampler, 0);
  std::uniform_int_distribution<std::size_t> pick(0, dataset.size() - 1);
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::size_t cursor = 0;
  return run_loop(net, cfg, heldout, hook, [&](std::uint64_t) {
    std::vector<LabeledWindow> batch;
    batch.reserve(static_cast<std::size_t>(cfg.batch_size));
    for (int i = 0; i < cfg.batch_size; ++i) {
      if (!cfg.without_replacement) {
        batch.push_back(dataset[pick(sampler)]);
        continue;
      }
      if (cursor == order.size()) {
        std::shuffle(order.begin(), order.end(), sampler);
        cursor = 0;
      }
      batch.push_back(dataset[order[cursor++]]);
    }
    return batch;
  });
}

}  // namespace popinfer::training

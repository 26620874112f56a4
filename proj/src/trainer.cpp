#include "spx/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <mutex>
#include <numeric>
#include <thread>

namespace spx {

void TrainConfig::validate() const {
  check_arg(schedule != nullptr, "train: schedule missing");
  check_arg(eta > 0.0 && eta <= 1.0, "train.eta: must be in (0,1]");
  check_arg(scsp_eta > 0.0 && scsp_eta <= 1.0, "train.scsp_eta: must be in (0,1]");
  compression.validate();
  sgd.validate();
  check_arg(epochs >= 1, "train.epochs: must be >= 1");
  check_arg(threads >= 1, "train.threads: must be >= 1");
}

double parameter_divergence(const std::vector<ParamVector>& models) {
  check_arg(!models.empty(), "parameter_divergence: no models");
  const std::size_t d = models[0].size();
  for (const auto& m : models)
    check_arg(m.size() == d, "parameter_divergence: dimension mismatch");
  ParamVector mean(d, 0.0);
  for (const auto& m : models)
    for (std::size_t k = 0; k < d; ++k) mean[k] += m[k];
  const double inv_n = 1.0 / static_cast<double>(models.size());
  for (double& v : mean) v *= inv_n;
  double acc = 0.0;
  for (const auto& m : models) {
    double sq = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      const double diff = m[k] - mean[k];
      sq += diff * diff;
    }
    acc += std::sqrt(sq);
  }
  return acc * inv_n;
}

double default_eta(const CompressionSpec& spec) {
  // (kept fraction, eta) tuning pairs, descending.
  static constexpr double table[][2] = {
      {1.0, 1.0}, {0.5, 0.08}, {0.1, 0.01}, {0.01, 0.005}, {0.001, 0.001}};
  const double f = spec.kept_fraction();
  if (f >= table[0][0]) return table[0][1];
  constexpr std::size_t last = std::size(table) - 1;
  if (f <= table[last][0]) return table[last][1];
  for (std::size_t i = 1; i <= last; ++i) {
    if (f >= table[i][0]) {
      const double t = (std::log(f) - std::log(table[i - 1][0])) /
                       (std::log(table[i][0]) - std::log(table[i - 1][0]));
      return std::exp(std::log(table[i - 1][1]) +
                      t * (std::log(table[i][1]) - std::log(table[i - 1][1])));
    }
  }
  return table[last][1];
}

std::string RunLog::to_csv() const {
  std::string out =
      "epoch,mean_train_loss,avg_test_accuracy,parameter_divergence,"
      "cumulative_bytes_sent,compression_factor\n";
  char buf[256];
  for (const auto& r : records) {
    std::snprintf(buf, sizeof buf, "%zu,%.10g,%.10g,%.10g,%llu,%.10g\n", r.epoch,
                  r.mean_train_loss, r.avg_test_accuracy, r.parameter_divergence,
                  static_cast<unsigned long long>(r.cumulative_bytes_sent),
                  r.compression_factor);
    out += buf;
  }
  return out;
}

namespace {

// Next minibatch without replacement; the permutation reshuffles on wrap.
std::vector<uint32_t> next_batch(NodeState& node, std::size_t batch_size) {
  std::vector<uint32_t> rows;
  rows.reserve(batch_size);
  while (rows.size() < batch_size) {
    if (node.cursor == node.order.size()) {
      std::shuffle(node.order.begin(), node.order.end(), node.batch_rng.engine());
      node.cursor = 0;
    }
    rows.push_back(node.order[node.cursor++]);
  }
  return rows;
}

// Runs fn(i) for i in [0, n) over the worker count. Each index is handled by
// a fixed worker (static striping), so outputs are schedule-independent.
void parallel_over_nodes(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const std::size_t workers = std::min<std::size_t>(threads, n);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::exception_ptr error;
  std::mutex error_mu;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += workers) fn(i);
      } catch (...) {
        std::scoped_lock lock(error_mu);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

uint64_t edge_count_no_self(const DirectedTopology& t) { return t.edges().size(); }

struct Orchestrator {
  const TrainConfig& cfg;
  const LabeledDataset& test;
  std::vector<NodeState> nodes;
  Model shape;
  uint64_t bytes_sent = 0;
  uint64_t dense_bytes_equiv = 0;  // same rounds at identity rates
  RunLog log;

  Orchestrator(const TrainConfig& c, const std::vector<LabeledDataset>& parts,
               const LabeledDataset& test_set)
      : cfg(c), test(test_set) {
    cfg.validate();
    const std::size_t n = cfg.schedule->node_count();
    check_arg(parts.size() == n, "train: partition count != node count");
    shape = Model::make(cfg.model_shape.kind, cfg.model_shape.d_in, cfg.model_shape.d_out,
                        cfg.model_shape.hidden);

    // Every node starts from the same random parameters.
    Rng init_rng(cfg.seed, "model-init");
    const ParamVector init = init_params(shape, init_rng);

    nodes.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      NodeState& node = nodes[i];
      check_arg(parts[i].size() >= 1, "train: empty partition shard");
      check_arg(parts[i].d_in == shape.d_in, "train: shard dimension mismatch");
      node.x = init;
      node.z = init;
      node.delta.assign(init.size(), 0.0);
      node.momentum_buf.assign(init.size(), 0.0);
      node.local_data = &parts[i];
      node.batch_rng = Rng(cfg.seed, "node/" + std::to_string(i) + "/batches");
      node.compress_rng = Rng(cfg.seed, "node/" + std::to_string(i) + "/compress");
      node.order.resize(parts[i].size());
      std::iota(node.order.begin(), node.order.end(), 0u);
      node.cursor = node.order.size();  // force shuffle on first batch
    }
  }

  std::size_t batches_per_epoch() const {
    std::size_t bpe = 1;
    for (const auto& node : nodes) {
      const std::size_t local =
          (node.local_data->size() + cfg.sgd.batch_size - 1) / cfg.sgd.batch_size;
      bpe = std::max(bpe, local);
    }
    return bpe;
  }

  uint64_t dense_payload_bytes() const {
    return 16 + 4ull * shape.params.size();
  }

  // One sparse-push iteration. Returns the mean train loss over nodes.
  double iterate(const MixingMatrix& w, std::size_t epoch) {
    const std::size_t n = nodes.size();
    std::vector<CompressedPayload> payloads(n);
    std::vector<ParamVector> msgs(n);
    std::vector<ParamVector> base(n);
    std::vector<double> losses(n, 0.0);

    // Local update + error-compensated compression, per node.
    parallel_over_nodes(n, cfg.threads, [&](std::size_t i) {
      NodeState& node = nodes[i];
      const auto rows = next_batch(node, cfg.sgd.batch_size);

      Model view = shape;
      view.params = node.z;  // gradients are taken at the de-biased model
      auto [loss, grad] = loss_and_grad(view, {node.local_data, rows});
      losses[i] = loss;

      base[i] = sgd_step(node.x, grad, node.momentum_buf, cfg.sgd, epoch);
      if (cfg.isolated) return;

      ParamVector v = base[i];
      for (std::size_t k = 0; k < v.size(); ++k) v[k] += node.delta[k];
      payloads[i] = compress(v, cfg.compression, node.compress_rng);
      msgs[i] = decompress(payloads[i]);
      for (std::size_t k = 0; k < v.size(); ++k) node.delta[k] = v[k] - msgs[i][k];
    });

    if (cfg.isolated) {
      parallel_over_nodes(n, cfg.threads, [&](std::size_t i) {
        nodes[i].x = std::move(base[i]);
        nodes[i].z = debias({nodes[i].x, nodes[i].u, {}});
      });
      return std::accumulate(losses.begin(), losses.end(), 0.0) / static_cast<double>(n);
    }

    // Exchange: every sender's payload travels each of its out-edges, the
    // bias weight rides along as one scalar.
    const DirectedTopology& topo = schedule_topology_at(*cfg.schedule, epoch);
    for (const auto& [src, dst] : topo.edges()) {
      (void)dst;
      bytes_sent += wire_bytes(payloads[src]) + 8;
    }
    dense_bytes_equiv += edge_count_no_self(topo) * (dense_payload_bytes() + 8);

    // Gossip update + de-bias.
    std::vector<double> u(n);
    for (std::size_t i = 0; i < n; ++i) u[i] = nodes[i].u;
    std::vector<ParamVector> x_next(n);
    std::vector<double> u_next(n);
    gossip_round(base, msgs, u, w, x_next, u_next);
    parallel_over_nodes(n, cfg.threads, [&](std::size_t i) {
      nodes[i].x = std::move(x_next[i]);
      nodes[i].u = u_next[i];
      nodes[i].z = debias({nodes[i].x, nodes[i].u, {}});
    });
    return std::accumulate(losses.begin(), losses.end(), 0.0) / static_cast<double>(n);
  }

  void record(std::size_t epoch, double mean_loss) {
    std::vector<double> accs(nodes.size(), 0.0);
    parallel_over_nodes(nodes.size(), cfg.threads, [&](std::size_t i) {
      Model view = shape;
      view.params = nodes[i].z;
      accs[i] = evaluate(view, test);
    });
    std::vector<ParamVector> zs;
    zs.reserve(nodes.size());
    for (const auto& node : nodes) zs.push_back(node.z);

    RunRecord r;
    r.epoch = epoch;
    r.mean_train_loss = mean_loss;
    r.avg_test_accuracy =
        std::accumulate(accs.begin(), accs.end(), 0.0) / static_cast<double>(accs.size());
    r.parameter_divergence = parameter_divergence(zs);
    r.cumulative_bytes_sent = bytes_sent;
    r.compression_factor =
        bytes_sent == 0 ? 0.0
                        : static_cast<double>(dense_bytes_equiv) / static_cast<double>(bytes_sent);
    log.records.push_back(r);
  }

  void train(const IterationObserver& observer) {
    const std::size_t bpe = batches_per_epoch();
    std::vector<std::unique_ptr<MixingMatrix>> cache(cfg.schedule->size());
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
      const std::size_t slot = cfg.schedule->index_at(epoch);
      if (!cache[slot])
        cache[slot] = std::make_unique<MixingMatrix>(
            effective_mixing_matrix(cfg.schedule->topology(slot), cfg.eta));
      double loss_acc = 0.0;
      for (std::size_t b = 0; b < bpe; ++b) {
        loss_acc += iterate(*cache[slot], epoch);
        if (observer) observer(epoch * bpe + b, nodes);
      }
      record(epoch, loss_acc / static_cast<double>(bpe));
    }
  }

  // Uncompressed gossip tail (no gradients, no compression, no error
  // feedback); the schedule clock keeps ticking one epoch per round.
  void gossip_tail() {
    const std::size_t n = nodes.size();
    std::vector<std::unique_ptr<MixingMatrix>> cache(cfg.schedule->size());
    for (std::size_t r = 0; r < cfg.scsp_k; ++r) {
      const std::size_t epoch = cfg.epochs + r;
      const std::size_t slot = cfg.schedule->index_at(epoch);
      if (!cache[slot])
        cache[slot] = std::make_unique<MixingMatrix>(
            effective_mixing_matrix(cfg.schedule->topology(slot), cfg.scsp_eta));

      const DirectedTopology& topo = schedule_topology_at(*cfg.schedule, epoch);
      const uint64_t per_edge = dense_payload_bytes() + 8;
      bytes_sent += edge_count_no_self(topo) * per_edge;
      dense_bytes_equiv += edge_count_no_self(topo) * per_edge;

      std::vector<ParamVector> x(n);
      std::vector<double> u(n);
      for (std::size_t i = 0; i < n; ++i) {
        x[i] = nodes[i].x;
        u[i] = nodes[i].u;
      }
      std::vector<ParamVector> x_next(n);
      std::vector<double> u_next(n);
      gossip_round(x, x, u, *cache[slot], x_next, u_next);
      parallel_over_nodes(n, cfg.threads, [&](std::size_t i) {
        nodes[i].x = std::move(x_next[i]);
        nodes[i].u = u_next[i];
        nodes[i].z = debias({nodes[i].x, nodes[i].u, {}});
      });
    }
  }

  TrainResult result() {
    TrainResult out;
    out.models.reserve(nodes.size());
    for (auto& node : nodes) out.models.push_back(node.z);
    out.log = std::move(log);
    return out;
  }
};

}  // namespace

TrainResult sp_train(const TrainConfig& cfg, const std::vector<LabeledDataset>& parts,
                     const LabeledDataset& test, const IterationObserver& observer) {
  Orchestrator run(cfg, parts, test);
  run.train(observer);
  return run.result();
}

TrainResult scsp_train(const TrainConfig& cfg, const std::vector<LabeledDataset>& parts,
                       const LabeledDataset& test, const IterationObserver& observer) {
  Orchestrator run(cfg, parts, test);
  run.train(observer);
  if (cfg.scsp_k > 0) {
    run.gossip_tail();
    // Post-tail evaluation point, tagged with the epoch index past training.
    run.record(cfg.epochs, run.log.records.back().mean_train_loss);
  }
  return run.result();
}

}  // namespace spx

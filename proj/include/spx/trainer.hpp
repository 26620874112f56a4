#ifndef SPX_TRAINER_HPP
#define SPX_TRAINER_HPP

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "spx/common.hpp"
#include "spx/compression.hpp"
#include "spx/consensus.hpp"
#include "spx/data.hpp"
#include "spx/learning.hpp"
#include "spx/topology.hpp"

namespace spx {

/// Per-node training state. delta is the error-feedback residual (starts at
/// zero), u the push-sum bias weight (starts at one).
struct NodeState {
  ParamVector x;
  ParamVector delta;
  double u = 1.0;
  ParamVector z;
  ParamVector momentum_buf;
  const LabeledDataset* local_data = nullptr;
  Rng batch_rng{0};
  Rng compress_rng{0};

  // epoch-permutation cursor for without-replacement sampling
  std::vector<uint32_t> order;
  std::size_t cursor = 0;
};

struct TrainConfig {
  const GraphSchedule* schedule = nullptr;
  double eta = 1.0;            // gossip averaging rate, in (0,1]
  CompressionSpec compression; // applied to every outgoing model message
  SgdConfig sgd;
  Model model_shape;           // params field ignored; shape only
  std::size_t epochs = 1;
  std::size_t scsp_k = 0;      // uncompressed gossip rounds after training
  double scsp_eta = 1.0;       // averaging rate of the uncompressed tail
  bool isolated = false;       // diagnostic: no communication at all
  uint64_t seed = 0;
  int threads = 1;

  void validate() const;
};

/// One record per evaluation point (one per epoch, plus one after the
/// uncompressed tail when scsp_k > 0).
struct RunRecord {
  std::size_t epoch = 0;
  double mean_train_loss = 0.0;
  double avg_test_accuracy = 0.0;
  double parameter_divergence = 0.0;
  uint64_t cumulative_bytes_sent = 0;
  double compression_factor = 1.0;
};

struct RunLog {
  std::vector<RunRecord> records;

  const RunRecord& final_record() const { return records.back(); }
  /// CSV with the canonical column order.
  std::string to_csv() const;
};

struct TrainResult {
  std::vector<ParamVector> models;  // de-biased z per node
  RunLog log;
};

/// Observer for tests and diagnostics; called after every iteration.
using IterationObserver = std::function<void(std::size_t iteration, std::span<const NodeState>)>;

/// (1/n) sum_i ||x_i - mean||_2.
double parameter_divergence(const std::vector<ParamVector>& models);

/// Averaging rate matched to the compression level: the tuning table
/// {100%: 1, 50%: 0.08, 10%: 0.01, 1%: 0.005, 0.1%: 0.001} keyed by kept
/// fraction, log-linearly interpolated, clamped at the ends.
double default_eta(const CompressionSpec& spec);

/// Sparse-push training: local SGD steps on the de-biased model, error-
/// compensated compressed gossip of the biased model, push-sum de-biasing.
/// Deterministic given cfg.seed, independent of cfg.threads.
TrainResult sp_train(const TrainConfig& cfg, const std::vector<LabeledDataset>& parts,
                     const LabeledDataset& test, const IterationObserver& observer = nullptr);

/// sp_train followed by cfg.scsp_k uncompressed gossip rounds (no gradient
/// steps, no compression), re-synchronizing the node models. Bytes for the
/// tail are accounted at dense rates. scsp_k = 0 is exactly sp_train.
TrainResult scsp_train(const TrainConfig& cfg, const std::vector<LabeledDataset>& parts,
                       const LabeledDataset& test, const IterationObserver& observer = nullptr);

}  // namespace spx

#endif

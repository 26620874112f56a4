#ifndef SPX_HARNESS_HPP
#define SPX_HARNESS_HPP

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "spx/compression.hpp"
#include "spx/data.hpp"
#include "spx/learning.hpp"
#include "spx/topology.hpp"
#include "spx/trainer.hpp"

namespace spx {

/// Name of the environment variable overriding the output root.
inline constexpr const char* kOutputRootEnv = "SPARSEPUSH_OUTPUT_ROOT";

struct DatasetSpec {
  bool generated = true;
  // generator
  std::size_t num_classes = 4;
  std::size_t per_class = 1000;
  std::size_t d_in = 8;
  double separation = 4.0;
  std::size_t test_per_class = 250;
  // csv
  std::string csv;
  std::string test_csv;
};

/// Graph description before construction: either a ring or an edge list.
struct GraphSpec {
  bool ring = true;
  bool reversed = false;
  std::size_t nodes = 4;
  std::vector<std::pair<std::size_t, std::size_t>> edges;

  DirectedTopology build() const;
};

struct TopologySpec {
  std::vector<GraphSpec> graphs;  // one entry = static topology
  std::size_t period = 1;

  GraphSchedule build() const;
  std::size_t node_count() const { return graphs.front().nodes; }
};

enum class Algorithm { sp, scsp };

std::string to_string(Algorithm a);
Algorithm algorithm_from_string(const std::string& s);

struct TrainSettings {
  ModelKind model_kind = ModelKind::logistic_softmax;
  std::size_t hidden = 16;
  std::size_t epochs = 10;
  std::optional<double> eta;  // nullopt = matched to the compression level
  CompressionSpec compression;
  SgdConfig sgd;
  Algorithm algorithm = Algorithm::sp;
  std::size_t scsp_k = 40;
  double scsp_eta = 1.0;
  bool isolated = false;
  int threads = 1;
};

struct SweepSpec {
  std::vector<double> skew;
  std::vector<CompressionSpec> compression;
  std::vector<Algorithm> algorithm;

  bool empty() const { return skew.empty() && compression.empty() && algorithm.empty(); }
};

struct ExperimentConfig {
  int version = 1;
  uint64_t seed = 0;
  std::string output_dir = "results";
  DatasetSpec dataset;
  double skew = 0.0;
  TopologySpec topology;
  TrainSettings train;
  bool export_partitions = false;
  SweepSpec sweep;
};

/// Parses and validates; errors carry the offending field path
/// (e.g. "train.eta: must be in (0,1]").
ExperimentConfig parse_config_file(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text, const std::string& origin = "config");

/// Normalized round-trippable form (defaults materialized, stable key order).
std::string config_to_json(const ExperimentConfig& cfg);

struct RunOverrides {
  std::optional<std::string> output_root;  // beats env, which beats config
  std::optional<int> threads;
  std::optional<uint64_t> seed;
};

struct CellResult {
  std::string name;
  Algorithm algorithm = Algorithm::sp;
  double skew = 0.0;
  std::string compression;
  uint64_t cell_seed = 0;
  double final_accuracy = 0.0;
  double final_loss = 0.0;
  double final_divergence = 0.0;
  uint64_t total_bytes = 0;
  double compression_factor = 0.0;
};

struct SweepResult {
  std::string output_dir;
  std::string sweep_csv_path;
  std::vector<CellResult> cells;
};

/// Runs every sweep cell sequentially; per cell writes runlog.csv and
/// summary.json under <output>/<cell>/, appending to <output>/sweep.csv as
/// cells complete (partial results survive a failing cell). Fully
/// deterministic per seed; every cell derives its streams from
/// split_seed(seed, "cell/<name>"), so adding cells never perturbs others.
SweepResult run_experiment(const ExperimentConfig& cfg, const RunOverrides& ov = {});
SweepResult run_experiment_file(const std::string& config_path, const RunOverrides& ov = {});

/// Long-format projection of sweep.csv: skew,compression,algorithm,accuracy.
void emit_plot_data(const std::string& sweep_csv_path, std::ostream& out);

/// Standalone push-sum demo on a directed ring, initial value of node i is
/// i. Writes "round,node,u,abs_err" rows, one per node per round.
void consensus_demo(std::size_t nodes, std::size_t rounds, double eta, std::ostream& out);

}  // namespace spx

#endif

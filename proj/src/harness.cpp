#include "spx/harness.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace spx {

DirectedTopology GraphSpec::build() const {
  if (ring) {
    if (nodes == 1) return single_node_topology();
    return build_directed_ring(nodes, reversed);
  }
  return DirectedTopology(nodes, edges);
}

GraphSchedule TopologySpec::build() const {
  std::vector<DirectedTopology> topo;
  topo.reserve(graphs.size());
  for (const auto& g : graphs) topo.push_back(g.build());
  return GraphSchedule(std::move(topo), period);
}

std::string to_string(Algorithm a) { return a == Algorithm::sp ? "sp" : "scsp"; }

Algorithm algorithm_from_string(const std::string& s) {
  if (s == "sp") return Algorithm::sp;
  if (s == "scsp") return Algorithm::scsp;
  throw ValidationError("algorithm: expected \"sp\" or \"scsp\", got \"" + s + "\"");
}

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ValidationError(path + ": " + what);
}

const json& member(const json& j, const std::string& path, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) fail(path + "." + key, "missing field");
  return *it;
}

double num_at(const json& j, const std::string& path, const char* key, double fallback,
              bool required = false) {
  auto it = j.find(key);
  if (it == j.end()) {
    if (required) fail(path + "." + key, "missing field");
    return fallback;
  }
  if (!it->is_number()) fail(path + "." + key, "expected a number");
  return it->get<double>();
}

std::size_t size_at(const json& j, const std::string& path, const char* key, std::size_t fallback,
                    bool required = false) {
  auto it = j.find(key);
  if (it == j.end()) {
    if (required) fail(path + "." + key, "missing field");
    return fallback;
  }
  if (!it->is_number_unsigned()) fail(path + "." + key, "expected a non-negative integer");
  return it->get<std::size_t>();
}

bool bool_at(const json& j, const std::string& path, const char* key, bool fallback) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  if (!it->is_boolean()) fail(path + "." + key, "expected a boolean");
  return it->get<bool>();
}

std::string str_at(const json& j, const std::string& path, const char* key,
                   const std::string& fallback, bool required = false) {
  auto it = j.find(key);
  if (it == j.end()) {
    if (required) fail(path + "." + key, "missing field");
    return fallback;
  }
  if (!it->is_string()) fail(path + "." + key, "expected a string");
  return it->get<std::string>();
}

CompressionSpec parse_compression(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  const std::string kind = str_at(j, path, "kind", "", true);
  CompressionSpec spec;
  if (kind == "identity") {
    spec = CompressionSpec::identity();
  } else if (kind == "top_k") {
    spec = CompressionSpec::top_k(num_at(j, path, "k_fraction", 0.0, true));
  } else if (kind == "stochastic_quant") {
    spec = CompressionSpec::stochastic_quant(
        static_cast<int>(size_at(j, path, "bits", 0, true)),
        static_cast<uint32_t>(size_at(j, path, "block_size", 1024)));
  } else {
    fail(path + ".kind", "unknown compression kind \"" + kind + "\"");
  }
  try {
    spec.validate();
  } catch (const ValidationError& e) {
    fail(path, e.what());
  }
  return spec;
}

GraphSpec parse_graph(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  GraphSpec g;
  if (j.contains("ring")) {
    g.ring = true;
    g.nodes = size_at(j, path, "ring", 0, true);
    g.reversed = bool_at(j, path, "reversed", false);
    if (g.nodes < 1) fail(path + ".ring", "need at least one node");
  } else {
    g.ring = false;
    g.nodes = size_at(j, path, "nodes", 0, true);
    const json& edges = member(j, path, "edges");
    if (!edges.is_array()) fail(path + ".edges", "expected an array of [src,dst] pairs");
    for (std::size_t i = 0; i < edges.size(); ++i) {
      const json& e = edges[i];
      const std::string epath = path + ".edges[" + std::to_string(i) + "]";
      if (!e.is_array() || e.size() != 2 || !e[0].is_number_unsigned() ||
          !e[1].is_number_unsigned())
        fail(epath, "expected [src,dst]");
      g.edges.emplace_back(e[0].get<std::size_t>(), e[1].get<std::size_t>());
    }
  }
  // Build eagerly so structural problems surface with a config path.
  try {
    g.build();
  } catch (const ValidationError& e) {
    fail(path, e.what());
  }
  return g;
}

ordered_json graph_to_json(const GraphSpec& g) {
  ordered_json j;
  if (g.ring) {
    j["ring"] = g.nodes;
    if (g.reversed) j["reversed"] = true;
  } else {
    j["nodes"] = g.nodes;
    auto& edges = j["edges"] = ordered_json::array();
    for (const auto& [s, d] : g.edges) edges.push_back({s, d});
  }
  return j;
}

ordered_json compression_to_json(const CompressionSpec& c) {
  ordered_json j;
  switch (c.kind) {
    case CompressionKind::identity:
      j["kind"] = "identity";
      break;
    case CompressionKind::top_k:
      j["kind"] = "top_k";
      j["k_fraction"] = c.k_fraction;
      break;
    case CompressionKind::stochastic_quant:
      j["kind"] = "stochastic_quant";
      j["bits"] = c.bits;
      j["block_size"] = c.block_size;
      break;
  }
  return j;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text, const std::string& origin) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(origin + ": invalid JSON: " + e.what());
  }
  if (!root.is_object()) fail(origin, "top level must be an object");

  ExperimentConfig cfg;
  cfg.version = static_cast<int>(size_at(root, origin, "version", 1));
  if (cfg.version != 1) fail(origin + ".version", "unsupported schema version");
  cfg.seed = static_cast<uint64_t>(size_at(root, origin, "seed", 0));
  cfg.output_dir = str_at(root, origin, "output_dir", "results");
  cfg.export_partitions = bool_at(root, origin, "export_partitions", false);

  // dataset
  {
    const json& d = member(root, origin, "dataset");
    const std::string path = origin + ".dataset";
    if (!d.is_object()) fail(path, "expected an object");
    if (d.contains("csv")) {
      cfg.dataset.generated = false;
      cfg.dataset.csv = str_at(d, path, "csv", "", true);
      cfg.dataset.test_csv = str_at(d, path, "test_csv", "", true);
    } else {
      const json& g = member(d, path, "generator");
      const std::string gpath = path + ".generator";
      cfg.dataset.generated = true;
      cfg.dataset.num_classes = size_at(g, gpath, "num_classes", 4);
      cfg.dataset.per_class = size_at(g, gpath, "per_class", 1000);
      cfg.dataset.d_in = size_at(g, gpath, "d_in", 8);
      cfg.dataset.separation = num_at(g, gpath, "separation", 4.0);
      cfg.dataset.test_per_class = size_at(g, gpath, "test_per_class", 250);
      if (cfg.dataset.num_classes < 1) fail(gpath + ".num_classes", "must be >= 1");
      if (cfg.dataset.per_class < 1) fail(gpath + ".per_class", "must be >= 1");
      if (cfg.dataset.num_classes > cfg.dataset.d_in)
        fail(gpath + ".d_in", "must be >= num_classes");
    }
  }

  // partition
  if (root.contains("partition")) {
    const json& p = root["partition"];
    const std::string path = origin + ".partition";
    if (!p.is_object()) fail(path, "expected an object");
    cfg.skew = num_at(p, path, "skew", 0.0);
    if (cfg.skew < 0.0 || cfg.skew > 1.0) fail(path + ".skew", "must be in [0,1]");
  }

  // topology
  {
    const json& t = member(root, origin, "topology");
    const std::string path = origin + ".topology";
    if (!t.is_object()) fail(path, "expected an object");
    if (t.contains("schedule")) {
      const json& s = t["schedule"];
      const std::string spath = path + ".schedule";
      cfg.topology.period = size_at(s, spath, "period", 1);
      if (cfg.topology.period < 1) fail(spath + ".period", "must be >= 1");
      const json& graphs = member(s, spath, "graphs");
      if (!graphs.is_array() || graphs.empty()) fail(spath + ".graphs", "expected a non-empty array");
      for (std::size_t i = 0; i < graphs.size(); ++i)
        cfg.topology.graphs.push_back(
            parse_graph(graphs[i], spath + ".graphs[" + std::to_string(i) + "]"));
    } else {
      cfg.topology.period = 1;
      cfg.topology.graphs.push_back(parse_graph(t, path));
    }
    try {
      cfg.topology.build();
    } catch (const ValidationError& e) {
      fail(path, e.what());
    }
  }

  // train
  {
    const json& t = member(root, origin, "train");
    const std::string path = origin + ".train";
    if (!t.is_object()) fail(path, "expected an object");

    const json& m = member(t, path, "model");
    const std::string mpath = path + ".model";
    cfg.train.model_kind = [&] {
      const std::string kind = str_at(m, mpath, "kind", "", true);
      try {
        return model_kind_from_string(kind);
      } catch (const ValidationError& e) {
        fail(mpath + ".kind", e.what());
      }
    }();
    cfg.train.hidden = size_at(m, mpath, "hidden", 16);

    cfg.train.epochs = size_at(t, path, "epochs", 10);
    if (cfg.train.epochs < 1) fail(path + ".epochs", "must be >= 1");
    cfg.train.sgd.batch_size = size_at(t, path, "batch_size", 32);
    if (cfg.train.sgd.batch_size < 1) fail(path + ".batch_size", "must be >= 1");

    if (t.contains("eta") && !(t["eta"].is_string() && t["eta"] == "auto")) {
      const double eta = num_at(t, path, "eta", 1.0);
      if (!(eta > 0.0 && eta <= 1.0)) fail(path + ".eta", "must be in (0,1]");
      cfg.train.eta = eta;
    }

    if (t.contains("compression"))
      cfg.train.compression = parse_compression(t["compression"], path + ".compression");

    if (t.contains("sgd")) {
      const json& s = t["sgd"];
      const std::string spath = path + ".sgd";
      if (!s.is_object()) fail(spath, "expected an object");
      cfg.train.sgd.gamma.initial = num_at(s, spath, "gamma", 0.1);
      cfg.train.sgd.momentum = num_at(s, spath, "momentum", 0.0);
      cfg.train.sgd.weight_decay = num_at(s, spath, "weight_decay", 0.0);
      if (s.contains("lr_drops")) {
        const json& drops = s["lr_drops"];
        if (!drops.is_array()) fail(spath + ".lr_drops", "expected an array of [epoch,mult]");
        for (std::size_t i = 0; i < drops.size(); ++i) {
          const json& d = drops[i];
          if (!d.is_array() || d.size() != 2 || !d[0].is_number_unsigned() || !d[1].is_number())
            fail(spath + ".lr_drops[" + std::to_string(i) + "]", "expected [epoch,mult]");
          cfg.train.sgd.gamma.drops.emplace_back(d[0].get<std::size_t>(), d[1].get<double>());
        }
      }
      try {
        cfg.train.sgd.validate();
      } catch (const ValidationError& e) {
        fail(spath, e.what());
      }
    }

    cfg.train.algorithm = algorithm_from_string(str_at(t, path, "algorithm", "sp"));
    cfg.train.scsp_k = size_at(t, path, "scsp_k", 40);
    cfg.train.scsp_eta = num_at(t, path, "scsp_eta", 1.0);
    if (!(cfg.train.scsp_eta > 0.0 && cfg.train.scsp_eta <= 1.0))
      fail(path + ".scsp_eta", "must be in (0,1]");
    cfg.train.isolated = bool_at(t, path, "isolated", false);
    cfg.train.threads = static_cast<int>(size_at(t, path, "threads", 1));
    if (cfg.train.threads < 1) fail(path + ".threads", "must be >= 1");
  }

  // sweep
  if (root.contains("sweep")) {
    const json& s = root["sweep"];
    const std::string path = origin + ".sweep";
    if (!s.is_object()) fail(path, "expected an object");
    if (s.contains("skew")) {
      const json& a = s["skew"];
      if (!a.is_array() || a.empty()) fail(path + ".skew", "expected a non-empty array");
      for (const auto& v : a) {
        if (!v.is_number()) fail(path + ".skew", "expected numbers");
        const double skew = v.get<double>();
        if (skew < 0.0 || skew > 1.0) fail(path + ".skew", "values must be in [0,1]");
        cfg.sweep.skew.push_back(skew);
      }
    }
    if (s.contains("compression")) {
      const json& a = s["compression"];
      if (!a.is_array() || a.empty()) fail(path + ".compression", "expected a non-empty array");
      for (std::size_t i = 0; i < a.size(); ++i)
        cfg.sweep.compression.push_back(
            parse_compression(a[i], path + ".compression[" + std::to_string(i) + "]"));
    }
    if (s.contains("algorithm")) {
      const json& a = s["algorithm"];
      if (!a.is_array() || a.empty()) fail(path + ".algorithm", "expected a non-empty array");
      for (const auto& v : a) {
        if (!v.is_string()) fail(path + ".algorithm", "expected strings");
        cfg.sweep.algorithm.push_back(algorithm_from_string(v.get<std::string>()));
      }
    }
  }

  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(path + ": cannot open config file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path);
}

std::string config_to_json(const ExperimentConfig& cfg) {
  ordered_json j;
  j["version"] = cfg.version;
  j["seed"] = cfg.seed;
  j["output_dir"] = cfg.output_dir;
  if (cfg.dataset.generated) {
    j["dataset"]["generator"] = {{"num_classes", cfg.dataset.num_classes},
                                 {"per_class", cfg.dataset.per_class},
                                 {"d_in", cfg.dataset.d_in},
                                 {"separation", cfg.dataset.separation},
                                 {"test_per_class", cfg.dataset.test_per_class}};
  } else {
    j["dataset"]["csv"] = cfg.dataset.csv;
    j["dataset"]["test_csv"] = cfg.dataset.test_csv;
  }
  j["partition"]["skew"] = cfg.skew;
  if (cfg.topology.graphs.size() == 1 && cfg.topology.period == 1) {
    j["topology"] = graph_to_json(cfg.topology.graphs.front());
  } else {
    auto& graphs = j["topology"]["schedule"]["graphs"] = ordered_json::array();
    for (const auto& g : cfg.topology.graphs) graphs.push_back(graph_to_json(g));
    j["topology"]["schedule"]["period"] = cfg.topology.period;
  }
  auto& t = j["train"];
  t["model"]["kind"] = to_string(cfg.train.model_kind);
  t["model"]["hidden"] = cfg.train.hidden;
  t["epochs"] = cfg.train.epochs;
  t["batch_size"] = cfg.train.sgd.batch_size;
  if (cfg.train.eta)
    t["eta"] = *cfg.train.eta;
  else
    t["eta"] = "auto";
  t["compression"] = compression_to_json(cfg.train.compression);
  t["sgd"]["gamma"] = cfg.train.sgd.gamma.initial;
  t["sgd"]["momentum"] = cfg.train.sgd.momentum;
  t["sgd"]["weight_decay"] = cfg.train.sgd.weight_decay;
  auto& drops = t["sgd"]["lr_drops"] = ordered_json::array();
  for (const auto& [e, mult] : cfg.train.sgd.gamma.drops) drops.push_back({e, mult});
  t["algorithm"] = to_string(cfg.train.algorithm);
  t["scsp_k"] = cfg.train.scsp_k;
  t["scsp_eta"] = cfg.train.scsp_eta;
  t["isolated"] = cfg.train.isolated;
  t["threads"] = cfg.train.threads;
  j["export_partitions"] = cfg.export_partitions;
  if (!cfg.sweep.empty()) {
    auto& s = j["sweep"];
    if (!cfg.sweep.skew.empty()) s["skew"] = cfg.sweep.skew;
    if (!cfg.sweep.compression.empty()) {
      auto& a = s["compression"] = ordered_json::array();
      for (const auto& c : cfg.sweep.compression) a.push_back(compression_to_json(c));
    }
    if (!cfg.sweep.algorithm.empty()) {
      auto& a = s["algorithm"] = ordered_json::array();
      for (const auto& al : cfg.sweep.algorithm) a.push_back(to_string(al));
    }
  }
  return j.dump(2) + "\n";
}

namespace {

struct Cell {
  double skew;
  CompressionSpec compression;
  Algorithm algorithm;
  std::string name;
};

std::string cell_name(double skew, const CompressionSpec& comp, Algorithm algo) {
  std::string comp_label = comp.label();
  for (char& c : comp_label)
    if (c == ':') c = '-';
  return "skew" + format_double(skew) + "__" + comp_label + "__" + to_string(algo);
}

std::vector<Cell> expand_cells(const ExperimentConfig& cfg) {
  const std::vector<double> skews =
      cfg.sweep.skew.empty() ? std::vector<double>{cfg.skew} : cfg.sweep.skew;
  const std::vector<CompressionSpec> comps =
      cfg.sweep.compression.empty() ? std::vector<CompressionSpec>{cfg.train.compression}
                                    : cfg.sweep.compression;
  const std::vector<Algorithm> algos =
      cfg.sweep.algorithm.empty() ? std::vector<Algorithm>{cfg.train.algorithm}
                                  : cfg.sweep.algorithm;
  std::vector<Cell> cells;
  for (double skew : skews)
    for (const auto& comp : comps)
      for (Algorithm algo : algos)
        cells.push_back({skew, comp, algo, cell_name(skew, comp, algo)});
  return cells;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw FormatError(path.string() + ": cannot open for writing");
  out << content;
}

std::string summary_json(const CellResult& r) {
  ordered_json j;
  j["final_accuracy"] = r.final_accuracy;
  j["final_divergence"] = r.final_divergence;
  j["total_bytes"] = r.total_bytes;
  j["compression_factor"] = r.compression_factor;
  return j.dump(2) + "\n";
}

constexpr const char* kSweepHeader =
    "cell,algorithm,skew,compression,seed,final_accuracy,final_divergence,"
    "total_bytes,compression_factor\n";

std::string sweep_row(const CellResult& r) {
  std::string row = r.name + ',' + to_string(r.algorithm) + ',' + format_double(r.skew) + ',' +
                    r.compression + ',' + std::to_string(r.cell_seed) + ',' +
                    format_double(r.final_accuracy) + ',' + format_double(r.final_divergence) +
                    ',' + std::to_string(r.total_bytes) + ',' +
                    format_double(r.compression_factor) + '\n';
  return row;
}

}  // namespace

SweepResult run_experiment(const ExperimentConfig& cfg, const RunOverrides& ov) {
  // Output root: explicit override > environment > config.
  std::string out_dir = cfg.output_dir;
  if (const char* env = std::getenv(kOutputRootEnv); env && *env) out_dir = env;
  if (ov.output_root) out_dir = *ov.output_root;
  const uint64_t seed = ov.seed.value_or(cfg.seed);
  const int threads = ov.threads.value_or(cfg.train.threads);

  const GraphSchedule schedule = cfg.topology.build();
  const std::size_t n = schedule.node_count();

  LabeledDataset train_set, test_set;
  if (cfg.dataset.generated) {
    train_set = gen_blobs(cfg.dataset.num_classes, cfg.dataset.per_class, cfg.dataset.d_in,
                          cfg.dataset.separation, split_seed(seed, "data/train"));
    test_set = gen_blobs(cfg.dataset.num_classes, cfg.dataset.test_per_class, cfg.dataset.d_in,
                         cfg.dataset.separation, split_seed(seed, "data/test"));
  } else {
    train_set = load_csv(cfg.dataset.csv);
    test_set = load_csv(cfg.dataset.test_csv);
    check_arg(train_set.d_in == test_set.d_in, "dataset: train/test dimension mismatch");
  }

  fs::create_directories(out_dir);
  SweepResult result;
  result.output_dir = out_dir;
  result.sweep_csv_path = (fs::path(out_dir) / "sweep.csv").string();

  std::ofstream sweep_csv(result.sweep_csv_path);
  if (!sweep_csv) throw FormatError(result.sweep_csv_path + ": cannot open for writing");
  sweep_csv << kSweepHeader << std::flush;

  for (const Cell& cell : expand_cells(cfg)) {
    const uint64_t cell_seed = split_seed(seed, "cell/" + cell.name);

    PartitionSpec pspec;
    pspec.n_nodes = n;
    pspec.skew = cell.skew;
    pspec.seed = cell_seed;
    const std::vector<LabeledDataset> parts = partition(train_set, pspec);

    TrainConfig tc;
    tc.schedule = &schedule;
    tc.eta = cfg.train.eta.value_or(default_eta(cell.compression));
    tc.compression = cell.compression;
    tc.sgd = cfg.train.sgd;
    tc.model_shape = Model::make(cfg.train.model_kind, train_set.d_in,
                                 std::max<std::size_t>(train_set.num_classes, 1),
                                 cfg.train.hidden);
    tc.epochs = cfg.train.epochs;
    tc.scsp_k = cfg.train.scsp_k;
    tc.scsp_eta = cfg.train.scsp_eta;
    tc.isolated = cfg.train.isolated;
    tc.seed = cell_seed;
    tc.threads = threads;

    const TrainResult tr = cell.algorithm == Algorithm::scsp ? scsp_train(tc, parts, test_set)
                                                             : sp_train(tc, parts, test_set);

    const fs::path cell_dir = fs::path(out_dir) / cell.name;
    fs::create_directories(cell_dir);
    write_file(cell_dir / "runlog.csv", tr.log.to_csv());

    CellResult r;
    r.name = cell.name;
    r.algorithm = cell.algorithm;
    r.skew = cell.skew;
    r.compression = cell.compression.label();
    r.cell_seed = cell_seed;
    const RunRecord& last = tr.log.final_record();
    r.final_accuracy = last.avg_test_accuracy;
    r.final_loss = last.mean_train_loss;
    r.final_divergence = last.parameter_divergence;
    r.total_bytes = last.cumulative_bytes_sent;
    r.compression_factor = last.compression_factor;
    write_file(cell_dir / "summary.json", summary_json(r));

    if (cfg.export_partitions)
      for (std::size_t i = 0; i < parts.size(); ++i)
        save_csv(parts[i], (cell_dir / ("partition_node" + std::to_string(i) + ".csv")).string());

    sweep_csv << sweep_row(r) << std::flush;
    result.cells.push_back(std::move(r));
  }
  return result;
}

SweepResult run_experiment_file(const std::string& config_path, const RunOverrides& ov) {
  return run_experiment(parse_config_file(config_path), ov);
}

void emit_plot_data(const std::string& sweep_csv_path, std::ostream& out) {
  std::ifstream in(sweep_csv_path);
  if (!in) throw FormatError(sweep_csv_path + ": cannot open file");
  std::string header;
  if (!std::getline(in, header)) throw FormatError(sweep_csv_path + ": empty file");

  std::vector<std::string> cols;
  std::stringstream hs(header);
  std::string col;
  while (std::getline(hs, col, ',')) cols.push_back(col);
  auto col_index = [&](const std::string& name) {
    for (std::size_t i = 0; i < cols.size(); ++i)
      if (cols[i] == name) return i;
    throw FormatError(sweep_csv_path + ": missing column '" + name + "'");
  };
  const std::size_t c_skew = col_index("skew");
  const std::size_t c_comp = col_index("compression");
  const std::size_t c_algo = col_index("algorithm");
  const std::size_t c_acc = col_index("final_accuracy");

  out << "skew,compression,algorithm,accuracy\n";
  std::string line;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() != cols.size())
      throw FormatError(sweep_csv_path + ": row " + std::to_string(row) + ": wrong column count");
    out << cells[c_skew] << ',' << cells[c_comp] << ',' << cells[c_algo] << ',' << cells[c_acc]
        << '\n';
  }
}

void consensus_demo(std::size_t nodes, std::size_t rounds, double eta, std::ostream& out) {
  check_arg(nodes >= 1, "consensus-demo: need at least one node");
  const DirectedTopology topo =
      nodes == 1 ? single_node_topology() : build_directed_ring(nodes);
  const MixingMatrix w = effective_mixing_matrix(topo, eta);

  std::vector<ParamVector> x(nodes);
  std::vector<double> u(nodes, 1.0);
  double mean = 0.0;
  for (std::size_t i = 0; i < nodes; ++i) {
    x[i] = {static_cast<double>(i)};
    mean += static_cast<double>(i);
  }
  mean /= static_cast<double>(nodes);

  out << "round,node,u,abs_err\n";
  char buf[128];
  std::vector<ParamVector> xn;
  std::vector<double> un;
  for (std::size_t r = 1; r <= rounds; ++r) {
    gossip_round(x, x, u, w, xn, un);
    x.swap(xn);
    u.swap(un);
    for (std::size_t i = 0; i < nodes; ++i) {
      const double z = debias({x[i], u[i], {}})[0];
      std::snprintf(buf, sizeof buf, "%zu,%zu,%.10g,%.10g\n", r, i, u[i], std::abs(z - mean));
      out << buf;
    }
  }
}

}  // namespace spx

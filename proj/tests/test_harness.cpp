#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "spx/harness.hpp"

using namespace spx;
namespace fs = std::filesystem;

namespace {

const char* kTinyConfig = R"({
  "version": 1,
  "seed": 7,
  "output_dir": "OUTDIR",
  "dataset": {"generator": {"num_classes": 2, "per_class": 12, "d_in": 4,
                            "separation": 6.0, "test_per_class": 8}},
  "partition": {"skew": 0.0},
  "topology": {"ring": 2},
  "train": {
    "model": {"kind": "logistic_softmax"},
    "epochs": 1,
    "batch_size": 6,
    "eta": 1.0,
    "compression": {"kind": "identity"},
    "sgd": {"gamma": 0.05, "momentum": 0.0, "weight_decay": 0.0},
    "algorithm": "sp",
    "scsp_k": 4
  }
})";

std::string tiny_config(const std::string& outdir) {
  std::string text = kTinyConfig;
  text.replace(text.find("OUTDIR"), 6, outdir);
  return text;
}

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("config parsing applies defaults and validates") {
  const auto cfg = parse_config_text(tiny_config("/tmp/x"));
  CHECK(cfg.seed == 7);
  CHECK(cfg.topology.node_count() == 2);
  CHECK(cfg.train.eta.has_value());
  CHECK(*cfg.train.eta == 1.0);
  CHECK(cfg.train.scsp_k == 4);
  CHECK(cfg.train.threads == 1);
  CHECK(cfg.dataset.generated);
}

TEST_CASE("validation errors carry the field path") {
  auto bad_eta = tiny_config("/tmp/x");
  bad_eta.replace(bad_eta.find("\"eta\": 1.0"), 10, "\"eta\": 1.5");
  CHECK_THROWS_WITH_AS(parse_config_text(bad_eta), doctest::Contains("train.eta"),
                       ValidationError);

  auto bad_skew = tiny_config("/tmp/x");
  bad_skew.replace(bad_skew.find("\"skew\": 0.0"), 11, "\"skew\": 2.0");
  CHECK_THROWS_WITH_AS(parse_config_text(bad_skew), doctest::Contains("partition.skew"),
                       ValidationError);

  CHECK_THROWS_WITH_AS(parse_config_text("{\"version\": 1}"), doctest::Contains("dataset"),
                       ValidationError);
  CHECK_THROWS_AS(parse_config_text("not json"), ValidationError);

  auto bad_comp = tiny_config("/tmp/x");
  bad_comp.replace(bad_comp.find("{\"kind\": \"identity\"}"), 20,
                   "{\"kind\": \"top_k\", \"k_fraction\": 0}");
  CHECK_THROWS_WITH_AS(parse_config_text(bad_comp), doctest::Contains("train.compression"),
                       ValidationError);
}

TEST_CASE("auto eta resolves from the compression spec") {
  auto text = tiny_config("/tmp/x");
  text.replace(text.find("\"eta\": 1.0"), 10, "\"eta\": \"auto\"");
  const auto cfg = parse_config_text(text);
  CHECK(!cfg.train.eta.has_value());
}

TEST_CASE("config round-trips through its normalized form") {
  const auto cfg = parse_config_text(tiny_config("/tmp/x"));
  const std::string once = config_to_json(cfg);
  const std::string twice = config_to_json(parse_config_text(once));
  CHECK(once == twice);
}

TEST_CASE("schedule topologies parse") {
  const char* text = R"({
    "version": 1, "seed": 1, "output_dir": "/tmp/x",
    "dataset": {"generator": {"num_classes": 2, "per_class": 8, "d_in": 4}},
    "topology": {"schedule": {"period": 6, "graphs": [
      {"ring": 4}, {"ring": 4, "reversed": true},
      {"nodes": 4, "edges": [[0,2],[2,1],[1,3],[3,0]]}
    ]}},
    "train": {"model": {"kind": "logistic_softmax"}, "epochs": 1}
  })";
  const auto cfg = parse_config_text(text);
  CHECK(cfg.topology.graphs.size() == 3);
  CHECK(cfg.topology.period == 6);
  const auto sched = cfg.topology.build();
  CHECK(sched.node_count() == 4);

  // disconnected edge list must fail with the config path
  const char* bad = R"({
    "version": 1, "seed": 1, "output_dir": "/tmp/x",
    "dataset": {"generator": {"num_classes": 2, "per_class": 8, "d_in": 4}},
    "topology": {"nodes": 3, "edges": [[0,1],[1,0]]},
    "train": {"model": {"kind": "logistic_softmax"}, "epochs": 1}
  })";
  CHECK_THROWS_WITH_AS(parse_config_text(bad), doctest::Contains("topology"), ValidationError);
}

TEST_CASE("sweeps run every cell and write per-cell artifacts") {
  const auto dir = fresh_dir("spx_sweep");
  auto text = tiny_config(dir.string());
  text.insert(text.rfind('}'), R"(,
    "sweep": {"skew": [0, 0.5, 0.8], "algorithm": ["sp", "scsp"]}
  )");
  const auto cfg = parse_config_text(text);
  const auto result = run_experiment(cfg);
  CHECK(result.cells.size() == 6);

  const auto sweep = slurp(result.sweep_csv_path);
  CHECK(std::count(sweep.begin(), sweep.end(), '\n') == 7);  // header + 6 rows

  for (const auto& cell : result.cells) {
    CHECK(fs::exists(dir / cell.name / "runlog.csv"));
    CHECK(fs::exists(dir / cell.name / "summary.json"));
  }

  // deterministic rerun: byte-identical sweep.csv
  const auto again = run_experiment(cfg);
  CHECK(slurp(again.sweep_csv_path) == sweep);
}

TEST_CASE("plot data projects the sweep") {
  const auto dir = fresh_dir("spx_plot");
  auto text = tiny_config(dir.string());
  text.insert(text.rfind('}'), R"(,
    "sweep": {"skew": [0, 0.8], "compression": [{"kind": "identity"},
              {"kind": "top_k", "k_fraction": 0.25}]}
  )");
  const auto result = run_experiment(parse_config_text(text));
  std::ostringstream out;
  emit_plot_data(result.sweep_csv_path, out);
  const std::string plot = out.str();
  CHECK(plot.rfind("skew,compression,algorithm,accuracy\n", 0) == 0);
  CHECK(std::count(plot.begin(), plot.end(), '\n') == 5);
  CHECK(plot.find("top_k:0.25") != std::string::npos);

  const auto bogus = dir / "bogus.csv";
  std::ofstream(bogus) << "a,b\n1,2\n";
  std::ostringstream sink;
  CHECK_THROWS_AS(emit_plot_data(bogus.string(), sink), FormatError);
}

TEST_CASE("environment variable overrides the output root") {
  const auto dir = fresh_dir("spx_env");
  const auto env_dir = fresh_dir("spx_env_override");
  setenv(kOutputRootEnv, env_dir.string().c_str(), 1);
  const auto result = run_experiment(parse_config_text(tiny_config(dir.string())));
  unsetenv(kOutputRootEnv);
  CHECK(result.output_dir == env_dir.string());
  CHECK(fs::exists(env_dir / "sweep.csv"));
  CHECK(!fs::exists(dir / "sweep.csv"));

  // explicit override beats both
  const auto arg_dir = fresh_dir("spx_arg_override");
  setenv(kOutputRootEnv, env_dir.string().c_str(), 1);
  RunOverrides ov;
  ov.output_root = arg_dir.string();
  const auto r2 = run_experiment(parse_config_text(tiny_config(dir.string())), ov);
  unsetenv(kOutputRootEnv);
  CHECK(r2.output_dir == arg_dir.string());
}

TEST_CASE("partition export writes one csv per node") {
  const auto dir = fresh_dir("spx_parts");
  auto text = tiny_config(dir.string());
  text.insert(text.rfind('}'), ",\n  \"export_partitions\": true");
  const auto result = run_experiment(parse_config_text(text));
  REQUIRE(result.cells.size() == 1);
  const auto cell_dir = dir / result.cells[0].name;
  CHECK(fs::exists(cell_dir / "partition_node0.csv"));
  CHECK(fs::exists(cell_dir / "partition_node1.csv"));
  const auto node0 = load_csv((cell_dir / "partition_node0.csv").string());
  CHECK(node0.size() == 12);  // half of 24
}

TEST_CASE("consensus demo emits decreasing per-round error") {
  std::ostringstream out;
  consensus_demo(4, 60, 1.0, out);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "round,node,u,abs_err");
  double round1_max = 0, last_err = -1;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    const auto last_comma = line.rfind(',');
    const double err = std::stod(line.substr(last_comma + 1));
    if (rows < 4) round1_max = std::max(round1_max, err);
    last_err = err;
    ++rows;
  }
  CHECK(rows == 4 * 60);
  CHECK(last_err < 1e-8);
  CHECK(round1_max > 1e-3);
  CHECK_THROWS_AS(consensus_demo(0, 10, 1.0, out), ValidationError);
}

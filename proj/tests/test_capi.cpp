#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "sparsepush.h"

namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string write_config(const fs::path& dir, const std::string& outdir) {
  const std::string text = R"({
    "version": 1,
    "seed": 3,
    "output_dir": ")" + outdir + R"(",
    "dataset": {"generator": {"num_classes": 2, "per_class": 10, "d_in": 4,
                              "separation": 6.0, "test_per_class": 6}},
    "topology": {"ring": 2},
    "train": {
      "model": {"kind": "logistic_softmax"},
      "epochs": 1, "batch_size": 5, "eta": 1.0,
      "compression": {"kind": "identity"},
      "sgd": {"gamma": 0.05}
    },
    "sweep": {"algorithm": ["sp", "scsp"]}
  })";
  const auto path = dir / "config.json";
  std::ofstream(path) << text;
  return path.string();
}

}  // namespace

TEST_CASE("version and error state") {
  CHECK(spx_version() != nullptr);
  CHECK(std::strlen(spx_version()) > 0);
}

TEST_CASE("validate: good and bad configs") {
  const auto dir = fresh_dir("spx_capi_validate");
  const auto cfg = write_config(dir, (dir / "out").string());
  CHECK(spx_validate_config(cfg.c_str()) == SPX_OK);
  CHECK(std::strlen(spx_last_error()) == 0);

  CHECK(spx_validate_config("/does/not/exist.json") == SPX_ERR_VALIDATION);
  CHECK(std::strlen(spx_last_error()) > 0);
  CHECK(spx_validate_config(nullptr) == SPX_ERR_VALIDATION);

  const auto bad = dir / "bad.json";
  std::ofstream(bad) << "{\"version\": 1}";
  CHECK(spx_validate_config(bad.string().c_str()) == SPX_ERR_VALIDATION);
}

TEST_CASE("run experiment through the shared library") {
  const auto dir = fresh_dir("spx_capi_run");
  const auto cfg = write_config(dir, (dir / "out").string());

  spx_sweep_result* result = nullptr;
  REQUIRE(spx_run_experiment(cfg.c_str(), nullptr, &result) == SPX_OK);
  REQUIRE(result != nullptr);
  CHECK(spx_sweep_result_cells(result) == 2);
  CHECK(std::string(spx_sweep_result_cell_name(result, 0)).find("sp") != std::string::npos);
  CHECK(spx_sweep_result_accuracy(result, 0) > 0.4);
  CHECK(spx_sweep_result_bytes(result, 0) > 0);
  CHECK(spx_sweep_result_compression_factor(result, 0) == doctest::Approx(1.0));
  CHECK(spx_sweep_result_divergence(result, 1) >= 0.0);
  CHECK(fs::exists(spx_sweep_result_sweep_csv(result)));

  // plot data from the produced sweep
  const auto plot_path = (dir / "plot.csv").string();
  CHECK(spx_emit_plot_data(spx_sweep_result_sweep_csv(result), plot_path.c_str()) == SPX_OK);
  std::ifstream plot(plot_path);
  std::string header;
  std::getline(plot, header);
  CHECK(header == "skew,compression,algorithm,accuracy");

  spx_sweep_result_free(result);

  // overrides: output root redirects everything
  const auto dir2 = fresh_dir("spx_capi_run2");
  spx_run_options opts{};
  const std::string root2 = (dir2 / "redirected").string();
  opts.output_root = root2.c_str();
  opts.threads = 2;
  opts.seed = 3;
  REQUIRE(spx_run_experiment(cfg.c_str(), &opts, nullptr) == SPX_OK);
  CHECK(fs::exists(dir2 / "redirected" / "sweep.csv"));
}

TEST_CASE("numerical and validation statuses map to distinct codes") {
  CHECK(spx_emit_plot_data("/does/not/exist.csv", nullptr) == SPX_ERR_VALIDATION);
  CHECK(spx_consensus_demo(0, 5, 1.0, nullptr) == SPX_ERR_VALIDATION);
  CHECK(spx_consensus_demo(4, 5, 7.0, nullptr) == SPX_ERR_VALIDATION);  // eta out of range
}

TEST_CASE("consensus demo writes csv rows") {
  const auto dir = fresh_dir("spx_capi_demo");
  const auto out = (dir / "demo.csv").string();
  REQUIRE(spx_consensus_demo(4, 60, 1.0, out.c_str()) == SPX_OK);
  std::ifstream in(out);
  std::string line;
  std::size_t rows = 0;
  std::getline(in, line);
  CHECK(line == "round,node,u,abs_err");
  double last = 1e9;
  while (std::getline(in, line)) {
    last = std::stod(line.substr(line.rfind(',') + 1));
    ++rows;
  }
  CHECK(rows == 240);
  CHECK(last < 1e-6);
}

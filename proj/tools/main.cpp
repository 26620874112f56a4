// CLI front-end; links the C API of the sparsepush shared library only.

#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "sparsepush.h"

namespace {

int finish(spx_status status) {
  if (status != SPX_OK) std::fprintf(stderr, "error: %s\n", spx_last_error());
  return static_cast<int>(status);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decentralized training simulator: compressed push-sum SGD over directed, "
               "time-varying graphs"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(spx_version()));

  std::string config_path;
  std::string output_root;
  int threads = 0;
  int64_t seed = -1;
  auto* run = app.add_subcommand("run", "Run all sweep cells of an experiment config");
  run->add_option("config", config_path, "Experiment config (JSON)")->required();
  run->add_option("--output-root", output_root,
                  "Output directory (beats config and " + std::string("SPARSEPUSH_OUTPUT_ROOT") +
                      ")");
  run->add_option("--threads", threads, "Worker threads per cell (beats train.threads)");
  run->add_option("--seed", seed, "Top-level seed (beats config seed)");

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "Parse and validate a config, run nothing");
  validate->add_option("config", validate_path, "Experiment config (JSON)")->required();

  std::string sweep_csv;
  std::string plot_out;
  auto* plot = app.add_subcommand("plot-data", "Project a sweep.csv into tidy plot data");
  plot->add_option("sweep_csv", sweep_csv, "Path to sweep.csv")->required();
  plot->add_option("-o,--output", plot_out, "Output CSV path (default: stdout)");

  std::size_t demo_nodes = 4;
  std::size_t demo_rounds = 50;
  double demo_eta = 1.0;
  std::string demo_out;
  auto* demo = app.add_subcommand("consensus-demo",
                                  "Push-sum averaging on a directed ring, per-round error");
  demo->add_option("--nodes", demo_nodes, "Node count")->capture_default_str();
  demo->add_option("--rounds", demo_rounds, "Gossip rounds")->capture_default_str();
  demo->add_option("--eta", demo_eta, "Averaging rate in (0,1]")->capture_default_str();
  demo->add_option("-o,--output", demo_out, "Output CSV path (default: stdout)");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) {
    spx_run_options opts{};
    opts.output_root = output_root.empty() ? nullptr : output_root.c_str();
    opts.threads = threads;
    opts.seed = seed;
    spx_sweep_result* result = nullptr;
    const spx_status status = spx_run_experiment(config_path.c_str(), &opts, &result);
    if (status == SPX_OK) {
      const size_t cells = spx_sweep_result_cells(result);
      for (size_t i = 0; i < cells; ++i)
        std::printf("%s: accuracy=%.4f divergence=%.3e bytes=%" PRIu64 " factor=%.2f\n",
                    spx_sweep_result_cell_name(result, i), spx_sweep_result_accuracy(result, i),
                    spx_sweep_result_divergence(result, i), spx_sweep_result_bytes(result, i),
                    spx_sweep_result_compression_factor(result, i));
      std::printf("wrote %s\n", spx_sweep_result_sweep_csv(result));
    }
    spx_sweep_result_free(result);
    return finish(status);
  }
  if (validate->parsed()) {
    const spx_status status = spx_validate_config(validate_path.c_str());
    if (status == SPX_OK) std::printf("%s: ok\n", validate_path.c_str());
    return finish(status);
  }
  if (plot->parsed())
    return finish(spx_emit_plot_data(sweep_csv.c_str(), plot_out.empty() ? nullptr : plot_out.c_str()));
  if (demo->parsed())
    return finish(spx_consensus_demo(demo_nodes, demo_rounds, demo_eta,
                                     demo_out.empty() ? nullptr : demo_out.c_str()));
  return 0;
}

#include "sparsepush.h"

#include <fstream>
#include <functional>
#include <iostream>
#include <string>

#include "spx/harness.hpp"

namespace {

thread_local std::string g_last_error;

struct StatusGuard {
  spx_status run(const std::function<void()>& fn) {
    g_last_error.clear();
    try {
      fn();
      return SPX_OK;
    } catch (const spx::NumericalError& e) {
      g_last_error = e.what();
      return SPX_ERR_NUMERICAL;
    } catch (const spx::ValidationError& e) {
      g_last_error = e.what();
      return SPX_ERR_VALIDATION;
    } catch (const spx::FormatError& e) {
      g_last_error = e.what();
      return SPX_ERR_VALIDATION;
    } catch (const std::exception& e) {
      g_last_error = e.what();
      return SPX_ERR_INTERNAL;
    } catch (...) {
      g_last_error = "unknown error";
      return SPX_ERR_INTERNAL;
    }
  }
};

spx_status guarded(const std::function<void()>& fn) { return StatusGuard{}.run(fn); }

void emit_to(const char* out_path, const std::function<void(std::ostream&)>& fn) {
  if (out_path == nullptr) {
    fn(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream out(out_path);
  if (!out) throw spx::FormatError(std::string(out_path) + ": cannot open for writing");
  fn(out);
}

}  // namespace

struct spx_sweep_result {
  spx::SweepResult result;
};

extern "C" {

const char* spx_version(void) { return "1.0.0"; }

const char* spx_last_error(void) { return g_last_error.c_str(); }

spx_status spx_validate_config(const char* config_path) {
  return guarded([&] {
    if (config_path == nullptr) throw spx::ValidationError("config path is null");
    spx::parse_config_file(config_path);
  });
}

spx_status spx_run_experiment(const char* config_path, const spx_run_options* opts,
                              spx_sweep_result** out_result) {
  if (out_result != nullptr) *out_result = nullptr;
  return guarded([&] {
    if (config_path == nullptr) throw spx::ValidationError("config path is null");
    spx::RunOverrides ov;
    if (opts != nullptr) {
      if (opts->output_root != nullptr) ov.output_root = opts->output_root;
      if (opts->threads > 0) ov.threads = opts->threads;
      if (opts->seed >= 0) ov.seed = static_cast<uint64_t>(opts->seed);
    }
    spx::SweepResult result = spx::run_experiment_file(config_path, ov);
    if (out_result != nullptr) *out_result = new spx_sweep_result{std::move(result)};
  });
}

size_t spx_sweep_result_cells(const spx_sweep_result* r) {
  return r == nullptr ? 0 : r->result.cells.size();
}

const char* spx_sweep_result_sweep_csv(const spx_sweep_result* r) {
  return r == nullptr ? "" : r->result.sweep_csv_path.c_str();
}

const char* spx_sweep_result_cell_name(const spx_sweep_result* r, size_t cell) {
  if (r == nullptr || cell >= r->result.cells.size()) return "";
  return r->result.cells[cell].name.c_str();
}

double spx_sweep_result_accuracy(const spx_sweep_result* r, size_t cell) {
  if (r == nullptr || cell >= r->result.cells.size()) return 0.0;
  return r->result.cells[cell].final_accuracy;
}

double spx_sweep_result_divergence(const spx_sweep_result* r, size_t cell) {
  if (r == nullptr || cell >= r->result.cells.size()) return 0.0;
  return r->result.cells[cell].final_divergence;
}

uint64_t spx_sweep_result_bytes(const spx_sweep_result* r, size_t cell) {
  if (r == nullptr || cell >= r->result.cells.size()) return 0;
  return r->result.cells[cell].total_bytes;
}

double spx_sweep_result_compression_factor(const spx_sweep_result* r, size_t cell) {
  if (r == nullptr || cell >= r->result.cells.size()) return 0.0;
  return r->result.cells[cell].compression_factor;
}

void spx_sweep_result_free(spx_sweep_result* r) { delete r; }

spx_status spx_emit_plot_data(const char* sweep_csv_path, const char* out_csv_path) {
  return guarded([&] {
    if (sweep_csv_path == nullptr) throw spx::ValidationError("sweep csv path is null");
    emit_to(out_csv_path, [&](std::ostream& out) { spx::emit_plot_data(sweep_csv_path, out); });
  });
}

spx_status spx_consensus_demo(size_t nodes, size_t rounds, double eta,
                              const char* out_csv_path) {
  return guarded([&] {
    emit_to(out_csv_path, [&](std::ostream& out) { spx::consensus_demo(nodes, rounds, eta, out); });
  });
}

}  // extern "C"

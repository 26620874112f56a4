#ifndef SPX_TOPOLOGY_HPP
#define SPX_TOPOLOGY_HPP

#include <cstddef>
#include <utility>
#include <vector>

#include "spx/common.hpp"

namespace spx {

/// Directed communication graph over n nodes. Self-loops are implicit:
/// every node is always its own in- and out-neighbour, and explicit (i,i)
/// edges are rejected. Construction validates strong connectivity.
class DirectedTopology {
public:
  /// edges: ordered (src, dst) pairs, src sends to dst. Duplicates rejected.
  DirectedTopology(std::size_t n, std::vector<std::pair<std::size_t, std::size_t>> edges);

  std::size_t node_count() const { return n_; }
  const std::vector<std::pair<std::size_t, std::size_t>>& edges() const { return edges_; }

  /// Out-neighbours of j excluding the implicit self-loop, sorted.
  const std::vector<std::size_t>& out_neighbors(std::size_t j) const { return out_[j]; }
  /// In-neighbours of i excluding the implicit self-loop, sorted.
  const std::vector<std::size_t>& in_neighbors(std::size_t i) const { return in_[i]; }

  /// Out-degree including the implicit self-loop.
  std::size_t out_degree(std::size_t j) const { return out_[j].size() + 1; }

private:
  std::size_t n_;
  std::vector<std::pair<std::size_t, std::size_t>> edges_;
  std::vector<std::vector<std::size_t>> out_;
  std::vector<std::vector<std::size_t>> in_;
};

/// Column-stochastic matrix of effective gossip weights. Entry (i, j) is the
/// weight node i applies to node j's message. Validated on construction:
/// non-negative entries, every column sums to 1 within 1e-12.
class MixingMatrix {
public:
  /// Dense row-major n*n entries.
  static MixingMatrix from_raw(std::size_t n, std::vector<double> entries);

  std::size_t node_count() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return w_[i * n_ + j]; }
  const std::vector<double>& raw() const { return w_; }

private:
  MixingMatrix(std::size_t n, std::vector<double> w) : n_(n), w_(std::move(w)) {}
  std::size_t n_;
  std::vector<double> w_;  // row-major
};

/// Rotation of topologies, switched every `rotation_period` epochs.
/// A static graph is a 1-element schedule.
class GraphSchedule {
public:
  GraphSchedule(std::vector<DirectedTopology> topologies, std::size_t rotation_period);

  std::size_t node_count() const { return topologies_.front().node_count(); }
  std::size_t size() const { return topologies_.size(); }
  std::size_t rotation_period() const { return period_; }
  const DirectedTopology& topology(std::size_t k) const { return topologies_[k]; }
  /// Slot active at the given epoch: (epoch / rotation_period) mod size.
  std::size_t index_at(std::size_t epoch) const { return (epoch / period_) % topologies_.size(); }

private:
  std::vector<DirectedTopology> topologies_;
  std::size_t period_;
};

/// Ring where node i sends to node (i+1) mod n, plus implicit self-loops.
/// reversed=true flips every edge (node i sends to (i-1) mod n).
DirectedTopology build_directed_ring(std::size_t n, bool reversed = false);

/// Single node, self-loop only. Degenerate but valid: a run on it is plain SGD.
DirectedTopology single_node_topology();

/// Effective weights I + eta*(W - I), where the base W gives each sender a
/// uniform 1/out-degree share over its out-neighbourhood (self included):
///   diagonal (j,j): 1 - eta*(1 - 1/outdeg(j))
///   entry (i,j):    eta/outdeg(j) for each edge j->i
MixingMatrix effective_mixing_matrix(const DirectedTopology& g, double eta);

/// topologies[(epoch / rotation_period) mod size].
const DirectedTopology& schedule_topology_at(const GraphSchedule& s, std::size_t epoch);

/// 1 - |lambda_2|, second-largest-magnitude eigenvalue by deflated power
/// iteration (2-vector subspace, so complex-conjugate pairs converge).
/// Throws NumericalError if the residual does not reach 1e-9 in 1e5 rounds.
double spectral_gap(const MixingMatrix& m);

}  // namespace spx

#endif

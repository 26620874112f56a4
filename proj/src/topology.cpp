#include "spx/topology.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "spx/rng.hpp"

namespace spx {

namespace {

// Reachability of every node from node 0 along `adj`.
bool all_reachable(const std::vector<std::vector<std::size_t>>& adj) {
  const std::size_t n = adj.size();
  std::vector<char> seen(n, 0);
  std::vector<std::size_t> stack{0};
  seen[0] = 1;
  std::size_t count = 1;
  while (!stack.empty()) {
    std::size_t v = stack.back();
    stack.pop_back();
    for (std::size_t w : adj[v]) {
      if (!seen[w]) {
        seen[w] = 1;
        ++count;
        stack.push_back(w);
      }
    }
  }
  return count == n;
}

}  // namespace

DirectedTopology::DirectedTopology(std::size_t n,
                                   std::vector<std::pair<std::size_t, std::size_t>> edges)
    : n_(n), edges_(std::move(edges)) {
  check_arg(n >= 1, "topology: node count must be >= 1");
  std::set<std::pair<std::size_t, std::size_t>> uniq;
  out_.assign(n_, {});
  in_.assign(n_, {});
  for (const auto& [src, dst] : edges_) {
    check_arg(src < n_ && dst < n_, "topology: edge endpoint out of range");
    check_arg(src != dst, "topology: self-loops are implicit, do not list them");
    check_arg(uniq.insert({src, dst}).second, "topology: duplicate edge");
    out_[src].push_back(dst);
    in_[dst].push_back(src);
  }
  for (auto& v : out_) std::sort(v.begin(), v.end());
  for (auto& v : in_) std::sort(v.begin(), v.end());
  std::sort(edges_.begin(), edges_.end());

  // Assumption: the graph is strongly connected. Fail fast at construction.
  if (!all_reachable(out_) || !all_reachable(in_))
    throw ValidationError("topology: graph is not strongly connected");
}

DirectedTopology build_directed_ring(std::size_t n, bool reversed) {
  check_arg(n >= 2, "build_directed_ring: need n >= 2");
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  edges.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t j = reversed ? (i + n - 1) % n : (i + 1) % n;
    edges.emplace_back(i, j);
  }
  return DirectedTopology(n, std::move(edges));
}

DirectedTopology single_node_topology() { return DirectedTopology(1, {}); }

MixingMatrix MixingMatrix::from_raw(std::size_t n, std::vector<double> entries) {
  check_arg(n >= 1 && entries.size() == n * n, "mixing matrix: bad dimensions");
  for (double w : entries)
    check_arg(w >= 0.0, "mixing matrix: negative entry");
  for (std::size_t j = 0; j < n; ++j) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += entries[i * n + j];
    check_arg(std::abs(sum - 1.0) <= 1e-12, "mixing matrix: column not stochastic");
  }
  return MixingMatrix(n, std::move(entries));
}

MixingMatrix effective_mixing_matrix(const DirectedTopology& g, double eta) {
  check_arg(eta > 0.0 && eta <= 1.0, "effective_mixing_matrix: eta must be in (0,1]");
  const std::size_t n = g.node_count();
  std::vector<double> w(n * n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    const double share = eta / static_cast<double>(g.out_degree(j));
    double diag = 1.0;
    for (std::size_t i : g.out_neighbors(j)) {
      w[i * n + j] = share;
      diag -= share;
    }
    w[j * n + j] = diag;
  }
  return MixingMatrix::from_raw(n, std::move(w));
}

GraphSchedule::GraphSchedule(std::vector<DirectedTopology> topologies, std::size_t rotation_period)
    : topologies_(std::move(topologies)), period_(rotation_period) {
  check_arg(!topologies_.empty(), "schedule: need at least one topology");
  check_arg(period_ >= 1, "schedule: rotation period must be >= 1");
  for (const auto& t : topologies_)
    check_arg(t.node_count() == topologies_.front().node_count(),
              "schedule: all topologies must share the node count");
}

const DirectedTopology& schedule_topology_at(const GraphSchedule& s, std::size_t epoch) {
  return s.topology(s.index_at(epoch));
}

namespace {

void mat_vec(const MixingMatrix& m, const double* x, double* y) {
  const std::size_t n = m.node_count();
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += m(i, j) * x[j];
    y[i] = acc;
  }
}

constexpr int kMaxIters = 100000;
constexpr double kResidualTol = 1e-9;

}  // namespace

double spectral_gap(const MixingMatrix& m) {
  const std::size_t n = m.node_count();
  if (n == 1) return 1.0;  // no second mode

  // Dominant right eigenvector pi (eigenvalue 1, Perron). L1-normalized
  // power iteration; the left eigenvector is the all-ones vector.
  // Perron vector to the numerical floor: leftover error re-enters the
  // deflated operator as a spurious near-zero mode and caps the accuracy of
  // everything after.
  Rng rng(0x5eed, "spectral-gap");
  std::vector<double> pi(n), next(n);
  for (auto& v : pi) v = 1.0 / static_cast<double>(n);
  int budget = kMaxIters;
  double prev_diff = 1e300;
  int pi_stagnant = 0;
  for (;; --budget) {
    if (budget <= 0) throw NumericalError("spectral_gap: power iteration did not converge");
    mat_vec(m, pi.data(), next.data());
    double norm = 0.0, diff = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      diff += std::abs(next[i] - pi[i]);
      norm += std::abs(next[i]);
    }
    for (std::size_t i = 0; i < n; ++i) pi[i] = next[i] / norm;
    if (diff <= 1e-15) break;
    if (diff >= prev_diff * (1.0 - 1e-3)) {
      if (++pi_stagnant >= 20) break;  // hit the round-off floor
    } else {
      pi_stagnant = 0;
    }
    prev_diff = diff;
  }
  double pi_sum = 0.0;
  for (double v : pi) pi_sum += v;

  // Deflate: A' = W - pi * 1^T / (1^T pi). Applied on the fly.
  auto deflated = [&](const double* x, double* y) {
    mat_vec(m, x, y);
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += x[j];
    s /= pi_sum;
    for (std::size_t i = 0; i < n; ++i) y[i] -= pi[i] * s;
  };

  // Power iteration on A' with a two-step Ritz extraction: the dominant mode
  // of a real operator is either a real eigenvalue or a conjugate pair, and
  // both live in the span of {v, A'v}. Orthonormalizing that basis before
  // projecting keeps the small 2x2 problem well conditioned even when the
  // pair is nearly defective.
  std::vector<double> v0(n), t1(n), t2(n), q1(n);
  for (auto& v : v0) v = rng.normal();

  auto dot = [n](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
  };
  auto clamp_gap = [](double mag) {
    double gap = 1.0 - mag;
    if (gap < 0.0 && gap > -1e-9) gap = 0.0;
    if (gap > 1.0) gap = 1.0;
    return gap;
  };
  auto two_by_two_mag = [](double h00, double h01, double h10, double h11) {
    const double tr = h00 + h11;
    const double det = h00 * h11 - h01 * h10;
    const double disc = tr * tr / 4.0 - det;
    if (disc >= 0.0) {
      const double root = std::sqrt(disc);
      return std::max(std::abs(tr / 2.0 + root), std::abs(tr / 2.0 - root));
    }
    return std::sqrt(det);  // conjugate pair, |lambda|^2 = det
  };

  {
    const double nv = std::sqrt(dot(v0, v0));
    for (auto& v : v0) v /= nv;
  }

  double best_resid = 1e300, best_mag = 0.0;
  int stagnant = 0;

  for (; budget > 0; budget -= 2) {
    deflated(v0.data(), t1.data());
    const double h00 = dot(v0, t1);
    for (std::size_t i = 0; i < n; ++i) q1[i] = t1[i] - h00 * v0[i];
    const double h10 = std::sqrt(dot(q1, q1));

    double resid, mag;
    if (h10 <= 1e-13) {
      // v0 is an eigenvector of A' to round-off.
      mag = std::abs(h00);
      resid = h10;
    } else {
      for (auto& v : q1) v /= h10;
      deflated(q1.data(), t2.data());
      const double h01 = dot(v0, t2);
      const double h11 = dot(q1, t2);
      double r2 = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double r = t2[i] - h01 * v0[i] - h11 * q1[i];
        r2 += r * r;
      }
      resid = std::sqrt(r2);
      mag = two_by_two_mag(h00, h01, h10, h11);
    }

    if (resid < best_resid) {
      best_resid = resid;
      best_mag = mag;
      stagnant = 0;
    } else if (++stagnant >= 2000) {
      break;  // round-off floor reached
    }
    if (resid <= 1e-13) return clamp_gap(mag);

    const double nt = std::sqrt(dot(t1, t1));
    if (nt <= 1e-13) return 1.0;  // A' annihilates the iterate: lambda_2 = 0
    for (std::size_t i = 0; i < n; ++i) v0[i] = t1[i] / nt;
  }
  if (best_resid <= kResidualTol) return clamp_gap(best_mag);
  throw NumericalError("spectral_gap: power iteration did not converge");
}

}  // namespace spx

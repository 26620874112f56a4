#ifndef SPX_RNG_HPP
#define SPX_RNG_HPP

#include <cstdint>
#include <random>
#include <string_view>

namespace spx {

/// Derives the seed of a named substream from a top-level seed.
///
/// The label is hashed (FNV-1a), mixed with the seed, and finalized with
/// splitmix64. Every consumer of randomness in the project owns a substream
/// keyed by a stable label, e.g. "node/3/batches" or "cell/<name>". Adding
/// new consumers never perturbs existing streams.
///
/// Stream labels in use:
///   "model-init"          shared initial model parameters (all nodes equal)
///   "node/<i>/batches"    per-node minibatch shuffling
///   "node/<i>/compress"   per-node stochastic compression
///   "partition"           dataset partitioning
///   "data/train" "data/test"  synthetic dataset generation
///   "cell/<name>"         per sweep-cell root seed
uint64_t split_seed(uint64_t seed, std::string_view label);

/// Deterministic random stream. Thin wrapper over mt19937_64 so call sites
/// don't spell distribution boilerplate.
class Rng {
public:
  explicit Rng(uint64_t seed) : engine_(seed) {}
  Rng(uint64_t seed, std::string_view label) : engine_(split_seed(seed, label)) {}

  std::mt19937_64& engine() { return engine_; }

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  double normal(double mean = 0.0, double stddev = 1.0) {
    return std::normal_distribution<double>(mean, stddev)(engine_);
  }
  /// Uniform integer in [0, n).
  uint64_t index(uint64_t n) {
    return std::uniform_int_distribution<uint64_t>(0, n - 1)(engine_);
  }

private:
  std::mt19937_64 engine_;
};

}  // namespace spx

#endif

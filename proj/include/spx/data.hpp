#ifndef SPX_DATA_HPP
#define SPX_DATA_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "spx/common.hpp"

namespace spx {

/// Dense feature matrix with integer class labels.
struct LabeledDataset {
  std::size_t d_in = 0;
  std::size_t num_classes = 0;
  std::vector<double> features;  // row-major, size() == size * d_in
  std::vector<uint32_t> labels;

  std::size_t size() const { return labels.size(); }
  std::span<const double> row(std::size_t i) const {
    return {features.data() + i * d_in, d_in};
  }
  void append_row(std::span<const double> x, uint32_t label);
  void validate() const;
};

struct PartitionSpec {
  std::size_t n_nodes = 1;
  double skew = 0.0;  // fraction partitioned non-IID, in [0,1]
  uint64_t seed = 0;

  void validate() const;
};

/// Gaussian blobs: one unit-covariance cluster per class, class means at
/// pairwise distance `separation` (scaled basis vectors, so num_classes must
/// not exceed d_in). Deterministic per seed.
LabeledDataset gen_blobs(std::size_t num_classes, std::size_t per_class, std::size_t d_in,
                         double separation, uint64_t seed);

/// Seeded shuffle, then contiguous near-equal shards (sizes differ by at
/// most one, larger shards first). Disjoint and covering.
std::vector<LabeledDataset> partition_iid(const LabeledDataset& ds, const PartitionSpec& spec);

/// Skewed label partitioning. Per class, floor(skew * class_count) samples
/// are drawn; the draws are concatenated sorted by label (sampling order
/// within a label), split into n contiguous near-equal chunks handed to
/// nodes 0..n-1 in order. Everything else, flooring remainders included,
/// forms the IID pool and is shuffled into near-equal shards appended to
/// the nodes. skew = 0 therefore matches partition_iid exactly.
std::vector<LabeledDataset> partition_skewed(const LabeledDataset& ds, const PartitionSpec& spec);

/// Dispatch on spec.skew.
std::vector<LabeledDataset> partition(const LabeledDataset& ds, const PartitionSpec& spec);

/// Strict CSV: every row is `feature,...,feature,label` with a non-negative
/// integer label, no header. Throws FormatError naming row and column.
LabeledDataset load_csv(const std::string& path);
void save_csv(const LabeledDataset& ds, const std::string& path);

}  // namespace spx

#endif

#include "spx/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>

#include "spx/rng.hpp"

namespace spx {

void LabeledDataset::append_row(std::span<const double> x, uint32_t label) {
  features.insert(features.end(), x.begin(), x.end());
  labels.push_back(label);
  if (label + 1 > num_classes) num_classes = label + 1;
}

void LabeledDataset::validate() const {
  check_arg(d_in > 0, "dataset: zero feature dimension");
  check_arg(features.size() == labels.size() * d_in, "dataset: feature/label size mismatch");
  for (uint32_t l : labels)
    check_arg(l < num_classes, "dataset: label out of range");
}

void PartitionSpec::validate() const {
  check_arg(n_nodes >= 1, "partition: n_nodes must be >= 1");
  check_arg(skew >= 0.0 && skew <= 1.0, "partition: skew must be in [0,1]");
}

LabeledDataset gen_blobs(std::size_t num_classes, std::size_t per_class, std::size_t d_in,
                         double separation, uint64_t seed) {
  check_arg(num_classes >= 1 && per_class >= 1 && d_in >= 1, "gen_blobs: counts must be >= 1");
  check_arg(num_classes <= d_in, "gen_blobs: need num_classes <= d_in for simplex means");
  check_arg(separation >= 0.0, "gen_blobs: separation must be >= 0");

  // Mean of class c sits at (separation/sqrt(2)) * e_c: all pairwise mean
  // distances equal `separation`.
  const double radius = separation / std::sqrt(2.0);
  Rng rng(seed, "blobs");
  LabeledDataset ds;
  ds.d_in = d_in;
  ds.num_classes = num_classes;
  ds.features.reserve(num_classes * per_class * d_in);
  ds.labels.reserve(num_classes * per_class);
  for (std::size_t c = 0; c < num_classes; ++c) {
    for (std::size_t s = 0; s < per_class; ++s) {
      for (std::size_t k = 0; k < d_in; ++k) {
        double v = rng.normal();
        if (k == c) v += radius;
        ds.features.push_back(v);
      }
      ds.labels.push_back(static_cast<uint32_t>(c));
    }
  }
  return ds;
}

namespace {

// Contiguous near-equal split of `ids`: first (len mod n) shards get one extra.
std::vector<std::vector<uint32_t>> split_even(const std::vector<uint32_t>& ids, std::size_t n) {
  std::vector<std::vector<uint32_t>> shards(n);
  const std::size_t base = ids.size() / n, extra = ids.size() % n;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t len = base + (i < extra ? 1 : 0);
    shards[i].assign(ids.begin() + pos, ids.begin() + pos + len);
    pos += len;
  }
  return shards;
}

LabeledDataset gather(const LabeledDataset& ds, const std::vector<uint32_t>& ids) {
  LabeledDataset out;
  out.d_in = ds.d_in;
  out.num_classes = ds.num_classes;
  out.features.reserve(ids.size() * ds.d_in);
  out.labels.reserve(ids.size());
  for (uint32_t i : ids) {
    auto row = ds.row(i);
    out.features.insert(out.features.end(), row.begin(), row.end());
    out.labels.push_back(ds.labels[i]);
  }
  return out;
}

std::vector<LabeledDataset> gather_all(const LabeledDataset& ds,
                                       const std::vector<std::vector<uint32_t>>& shards) {
  std::vector<LabeledDataset> out;
  out.reserve(shards.size());
  for (const auto& ids : shards) out.push_back(gather(ds, ids));
  return out;
}

}  // namespace

std::vector<LabeledDataset> partition_iid(const LabeledDataset& ds, const PartitionSpec& spec) {
  spec.validate();
  ds.validate();
  check_arg(ds.size() >= spec.n_nodes, "partition: fewer samples than nodes");

  std::vector<uint32_t> ids(ds.size());
  std::iota(ids.begin(), ids.end(), 0u);
  Rng rng(spec.seed, "partition");
  std::shuffle(ids.begin(), ids.end(), rng.engine());
  return gather_all(ds, split_even(ids, spec.n_nodes));
}

std::vector<LabeledDataset> partition_skewed(const LabeledDataset& ds, const PartitionSpec& spec) {
  spec.validate();
  ds.validate();
  check_arg(ds.size() >= spec.n_nodes, "partition: fewer samples than nodes");
  if (spec.skew == 0.0) return partition_iid(ds, spec);
  const std::size_t n = spec.n_nodes;
  Rng rng(spec.seed, "partition");

  // Per class: shuffle the class's sample ids, draw floor(skew * count).
  std::vector<std::vector<uint32_t>> by_class(ds.num_classes);
  for (uint32_t i = 0; i < ds.size(); ++i) by_class[ds.labels[i]].push_back(i);

  std::vector<uint32_t> sorted_skewed;  // concatenation is label-sorted
  std::vector<uint32_t> pool;
  for (auto& ids : by_class) {
    std::shuffle(ids.begin(), ids.end(), rng.engine());
    const auto take = static_cast<std::size_t>(
        std::floor(spec.skew * static_cast<double>(ids.size())));
    if (spec.skew > 0.0)
      check_arg(take >= n, "partition: class too small for the skewed fraction");
    sorted_skewed.insert(sorted_skewed.end(), ids.begin(), ids.begin() + take);
    pool.insert(pool.end(), ids.begin() + take, ids.end());
  }

  auto shards = split_even(sorted_skewed, n);

  // Remainder (flooring leftovers included) is the IID pool.
  std::shuffle(pool.begin(), pool.end(), rng.engine());
  auto pool_shards = split_even(pool, n);
  for (std::size_t i = 0; i < n; ++i)
    shards[i].insert(shards[i].end(), pool_shards[i].begin(), pool_shards[i].end());

  return gather_all(ds, shards);
}

std::vector<LabeledDataset> partition(const LabeledDataset& ds, const PartitionSpec& spec) {
  return spec.skew == 0.0 ? partition_iid(ds, spec) : partition_skewed(ds, spec);
}

namespace {

[[noreturn]] void csv_fail(const std::string& path, std::size_t row, std::size_t col,
                           const std::string& what) {
  throw FormatError(path + ": row " + std::to_string(row) + ", column " + std::to_string(col) +
                    ": " + what);
}

}  // namespace

LabeledDataset load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError(path + ": cannot open file");

  LabeledDataset ds;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() && in.peek() == EOF) break;  // trailing newline

    std::vector<std::string_view> cells;
    std::string_view rest = line;
    while (true) {
      const auto comma = rest.find(',');
      cells.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
    if (cells.size() < 2) csv_fail(path, row, 1, "need at least one feature and a label");
    if (ds.d_in == 0)
      ds.d_in = cells.size() - 1;
    else if (cells.size() - 1 != ds.d_in)
      csv_fail(path, row, cells.size(), "inconsistent column count");

    for (std::size_t c = 0; c + 1 < cells.size(); ++c) {
      double v{};
      const auto* first = cells[c].data();
      const auto* last = first + cells[c].size();
      auto [p, ec] = std::from_chars(first, last, v);
      if (ec != std::errc() || p != last) csv_fail(path, row, c + 1, "not a number");
      ds.features.push_back(v);
    }
    const auto& lc = cells.back();
    uint32_t label{};
    const auto* first = lc.data();
    const auto* last = first + lc.size();
    auto [p, ec] = std::from_chars(first, last, label);
    if (ec != std::errc() || p != last)
      csv_fail(path, row, cells.size(), "label must be a non-negative integer");
    ds.labels.push_back(label);
    if (label + 1 > ds.num_classes) ds.num_classes = label + 1;
  }
  if (ds.labels.empty()) throw FormatError(path + ": empty file");
  ds.validate();
  return ds;
}

void save_csv(const LabeledDataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw FormatError(path + ": cannot open for writing");
  char buf[40];
  for (std::size_t i = 0; i < ds.size(); ++i) {
    auto row = ds.row(i);
    for (double v : row) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out << buf << ',';
    }
    out << ds.labels[i] << '\n';
  }
}

}  // namespace spx

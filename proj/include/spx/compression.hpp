#ifndef SPX_COMPRESSION_HPP
#define SPX_COMPRESSION_HPP

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "spx/common.hpp"
#include "spx/rng.hpp"

namespace spx {

enum class CompressionKind : uint8_t { identity = 0, top_k = 1, stochastic_quant = 2 };

/// Which compression operator to apply to outgoing updates.
struct CompressionSpec {
  CompressionKind kind = CompressionKind::identity;
  double k_fraction = 1.0;      // top_k only, in (0,1]
  int bits = 8;                 // stochastic_quant only, one of {1,2,4,8}
  uint32_t block_size = 1024;   // stochastic_quant only, elements per block

  static CompressionSpec identity();
  static CompressionSpec top_k(double k_fraction);
  static CompressionSpec stochastic_quant(int bits, uint32_t block_size = 1024);

  /// Throws ValidationError on out-of-range fields.
  void validate() const;
  /// Stable label used in sweep cells and CSV output, e.g. "top_k:0.01".
  std::string label() const;
  /// Fraction of raw entry payload kept (identity 1, top_k k, quant bits/32).
  double kept_fraction() const;
};

struct SparseEntry {
  uint32_t index;  // global index into the dense vector
  float value;
};

/// One compressed message. In-process payloads are exchanged as-is (identity
/// payloads keep full double precision so that C[v] == v exactly); the
/// canonical serialized form defines all byte accounting.
///
/// Canonical encoding, little-endian, 16-byte header:
///   u8 kind, u8 code (quant bits, or a log-scale k-fraction code for top_k),
///   u16 reserved, u32 dense_len, u32 block_size, u32 payload_len
/// followed by `payload_len` bytes of entry data:
///   identity: dense_len float32 values (4*d bytes)
///   top_k:    entries sorted by index, each a u16 gap code plus float32
///             value (6 bytes/entry). The gap code is index minus previous
///             index minus 1; a bare u16 0xFFFF escape advances the position
///             by 65535 so arbitrary gaps fit 16-bit codes.
///   quant:    one float32 max-magnitude scale per block (4*num_blocks),
///             then `bits`-bit level codes packed LSB-first, ceil(d*bits/8).
struct CompressedPayload {
  CompressionKind kind = CompressionKind::identity;
  uint32_t dense_len = 0;
  uint32_t block_size = 0;    // quant block size; 0 otherwise
  int bits = 0;               // quant only
  double k_fraction = 0.0;    // top_k only (informational)

  ParamVector dense;                 // identity
  std::vector<SparseEntry> entries;  // top_k
  std::vector<float> scales;         // quant, one per block
  std::vector<uint8_t> codes;        // quant, packed level codes
};

/// Apply the compression operator. top_k keeps the ceil(k_fraction*d)
/// largest-magnitude entries, ties broken toward the lower index.
/// stochastic_quant rounds each entry to one of 2^bits levels spaced
/// uniformly over [-s, +s] (s = block max magnitude), unbiased in
/// expectation; it draws from `rng`.
CompressedPayload compress(const ParamVector& v, const CompressionSpec& spec, Rng& rng);

/// Dense vector of length dense_len; dropped entries are exactly zero.
ParamVector decompress(const CompressedPayload& p);

/// Exact canonical serialized size in bytes (16-byte header included).
uint64_t wire_bytes(const CompressedPayload& p);

/// Canonical bytes (see CompressedPayload). serialize . deserialize is the
/// identity on top_k and quant payloads; identity payloads come back at
/// float32 precision.
std::vector<uint8_t> serialize(const CompressedPayload& p);
CompressedPayload deserialize(const std::vector<uint8_t>& bytes);

/// Mean over `trials` of ||C[v]-v||^2 / ||v||^2, the empirical
/// signal-to-noise bound on the compression error.
double empirical_snr(const ParamVector& v, const CompressionSpec& spec, int trials, Rng& rng);

}  // namespace spx

#endif

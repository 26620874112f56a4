#include "spx/compression.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <numeric>

namespace spx {

namespace {

constexpr uint64_t kHeaderBytes = 16;
constexpr uint32_t kGapEscape = 0xFFFF;  // advance 65535 positions, no entry

uint32_t checked_len(std::size_t d) {
  check_arg(d > 0, "compress: empty vector");
  check_arg(d <= 0xFFFFFFFFull, "compress: vector too long");
  return static_cast<uint32_t>(d);
}

std::size_t top_k_count(double k_fraction, std::size_t d) {
  return static_cast<std::size_t>(std::ceil(k_fraction * static_cast<double>(d)));
}

uint32_t quant_levels(int bits) { return 1u << bits; }

// Little-endian primitive writers/readers.
void put_u16(std::vector<uint8_t>& out, uint16_t v) {
  out.push_back(static_cast<uint8_t>(v & 0xFF));
  out.push_back(static_cast<uint8_t>(v >> 8));
}
void put_u32(std::vector<uint8_t>& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>((v >> (8 * i)) & 0xFF));
}
void put_f32(std::vector<uint8_t>& out, float v) {
  uint32_t bits;
  std::memcpy(&bits, &v, 4);
  put_u32(out, bits);
}

struct Reader {
  const std::vector<uint8_t>& buf;
  std::size_t pos = 0;
  uint16_t u16() {
    if (pos + 2 > buf.size()) throw DecodeError("payload: truncated u16");
    uint16_t v = static_cast<uint16_t>(buf[pos] | (buf[pos + 1] << 8));
    pos += 2;
    return v;
  }
  uint32_t u32() {
    if (pos + 4 > buf.size()) throw DecodeError("payload: truncated u32");
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(buf[pos + i]) << (8 * i);
    pos += 4;
    return v;
  }
  float f32() {
    uint32_t bits = u32();
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
  }
};

// Number of 0xFFFF escapes needed ahead of an entry whose gap from the
// previous index is `gap` (first entry: gap = index + 1 conceptually).
uint64_t escapes_for(uint64_t gap_minus_one) { return gap_minus_one / 65535; }

uint64_t top_k_stream_bytes(const CompressedPayload& p) {
  uint64_t bytes = 0;
  int64_t prev = -1;
  for (const auto& e : p.entries) {
    const uint64_t gap = static_cast<uint64_t>(static_cast<int64_t>(e.index) - prev - 1);
    bytes += 2 * escapes_for(gap) + 6;
    prev = e.index;
  }
  return bytes;
}

uint8_t kfrac_code(double k_fraction) {
  // Informational log-scale code: round(-20*log10(k)), clamped to u8.
  const double code = std::round(-20.0 * std::log10(k_fraction));
  return static_cast<uint8_t>(std::clamp(code, 0.0, 255.0));
}

}  // namespace

CompressionSpec CompressionSpec::identity() { return {}; }

CompressionSpec CompressionSpec::top_k(double k_fraction) {
  CompressionSpec s;
  s.kind = CompressionKind::top_k;
  s.k_fraction = k_fraction;
  return s;
}

CompressionSpec CompressionSpec::stochastic_quant(int bits, uint32_t block_size) {
  CompressionSpec s;
  s.kind = CompressionKind::stochastic_quant;
  s.bits = bits;
  s.block_size = block_size;
  return s;
}

void CompressionSpec::validate() const {
  switch (kind) {
    case CompressionKind::identity:
      return;
    case CompressionKind::top_k:
      check_arg(k_fraction > 0.0 && k_fraction <= 1.0,
                "compression: k_fraction must be in (0,1]");
      return;
    case CompressionKind::stochastic_quant:
      check_arg(bits == 1 || bits == 2 || bits == 4 || bits == 8,
                "compression: bits must be one of {1,2,4,8}");
      check_arg(block_size >= 1, "compression: block_size must be >= 1");
      return;
  }
  throw ValidationError("compression: unknown kind");
}

std::string CompressionSpec::label() const {
  switch (kind) {
    case CompressionKind::identity:
      return "identity";
    case CompressionKind::top_k: {
      char buf[48];
      std::snprintf(buf, sizeof buf, "top_k:%g", k_fraction);
      return buf;
    }
    case CompressionKind::stochastic_quant: {
      char buf[48];
      std::snprintf(buf, sizeof buf, "quant:%db%u", bits, block_size);
      return buf;
    }
  }
  return "?";
}

double CompressionSpec::kept_fraction() const {
  switch (kind) {
    case CompressionKind::identity:
      return 1.0;
    case CompressionKind::top_k:
      return k_fraction;
    case CompressionKind::stochastic_quant:
      return static_cast<double>(bits) / 32.0;
  }
  return 1.0;
}

CompressedPayload compress(const ParamVector& v, const CompressionSpec& spec, Rng& rng) {
  spec.validate();
  const uint32_t d = checked_len(v.size());
  CompressedPayload p;
  p.kind = spec.kind;
  p.dense_len = d;

  switch (spec.kind) {
    case CompressionKind::identity: {
      p.dense = v;
      break;
    }
    case CompressionKind::top_k: {
      p.k_fraction = spec.k_fraction;
      const std::size_t k = std::min<std::size_t>(top_k_count(spec.k_fraction, d), d);
      std::vector<uint32_t> order(d);
      std::iota(order.begin(), order.end(), 0u);
      // Largest magnitude first; ties go to the lower index.
      std::nth_element(order.begin(), order.begin() + (k - 1), order.end(),
                       [&](uint32_t a, uint32_t b) {
                         const double ma = std::abs(v[a]), mb = std::abs(v[b]);
                         if (ma != mb) return ma > mb;
                         return a < b;
                       });
      order.resize(k);
      std::sort(order.begin(), order.end());
      p.entries.reserve(k);
      for (uint32_t idx : order)
        p.entries.push_back({idx, static_cast<float>(v[idx])});
      break;
    }
    case CompressionKind::stochastic_quant: {
      p.bits = spec.bits;
      p.block_size = spec.block_size;
      const uint32_t levels = quant_levels(spec.bits);
      const std::size_t nblocks = (d + spec.block_size - 1) / spec.block_size;
      p.scales.reserve(nblocks);
      p.codes.assign((static_cast<std::size_t>(d) * spec.bits + 7) / 8, 0);
      std::size_t bitpos = 0;
      for (std::size_t b0 = 0; b0 < d; b0 += spec.block_size) {
        const std::size_t b1 = std::min<std::size_t>(b0 + spec.block_size, d);
        double s = 0.0;
        for (std::size_t i = b0; i < b1; ++i) s = std::max(s, std::abs(v[i]));
        const float scale = static_cast<float>(s);
        p.scales.push_back(scale);
        for (std::size_t i = b0; i < b1; ++i) {
          uint32_t code = 0;
          if (scale > 0.0f) {
            // Position within [-s, +s] mapped to [0, levels-1]; stochastic
            // rounding to the bracketing level keeps E[decoded] == v[i].
            const double t = (v[i] / scale + 1.0) * 0.5 * (levels - 1);
            const double lo = std::floor(t);
            const double frac = t - lo;
            code = static_cast<uint32_t>(lo);
            if (rng.uniform() < frac) ++code;
            code = std::min(code, levels - 1);
          }
          for (int bit = 0; bit < spec.bits; ++bit, ++bitpos)
            if (code & (1u << bit)) p.codes[bitpos >> 3] |= uint8_t(1u << (bitpos & 7));
        }
      }
      break;
    }
  }
  return p;
}

ParamVector decompress(const CompressedPayload& p) {
  if (p.dense_len == 0) throw DecodeError("payload: zero dense_len");
  switch (p.kind) {
    case CompressionKind::identity: {
      if (p.dense.size() != p.dense_len) throw DecodeError("payload: dense size mismatch");
      return p.dense;
    }
    case CompressionKind::top_k: {
      ParamVector out(p.dense_len, 0.0);
      for (const auto& e : p.entries) {
        if (e.index >= p.dense_len) throw DecodeError("payload: entry index out of range");
        out[e.index] = static_cast<double>(e.value);
      }
      return out;
    }
    case CompressionKind::stochastic_quant: {
      if (p.block_size == 0) throw DecodeError("payload: zero block size");
      const uint32_t levels = quant_levels(p.bits);
      const std::size_t nblocks = (p.dense_len + p.block_size - 1) / p.block_size;
      if (p.scales.size() != nblocks) throw DecodeError("payload: scale count mismatch");
      if (p.codes.size() != (static_cast<std::size_t>(p.dense_len) * p.bits + 7) / 8)
        throw DecodeError("payload: code bytes mismatch");
      ParamVector out(p.dense_len, 0.0);
      std::size_t bitpos = 0;
      for (std::size_t i = 0; i < p.dense_len; ++i) {
        uint32_t code = 0;
        for (int bit = 0; bit < p.bits; ++bit, ++bitpos)
          if (p.codes[bitpos >> 3] & (1u << (bitpos & 7))) code |= 1u << bit;
        if (code >= levels) throw DecodeError("payload: level code out of range");
        const double s = p.scales[i / p.block_size];
        out[i] = (s == 0.0)
                     ? 0.0
                     : -s + static_cast<double>(code) * (2.0 * s / (levels - 1));
      }
      return out;
    }
  }
  throw DecodeError("payload: unknown kind");
}

uint64_t wire_bytes(const CompressedPayload& p) {
  switch (p.kind) {
    case CompressionKind::identity:
      return kHeaderBytes + 4ull * p.dense_len;
    case CompressionKind::top_k:
      return kHeaderBytes + top_k_stream_bytes(p);
    case CompressionKind::stochastic_quant:
      return kHeaderBytes + 4ull * p.scales.size() +
             (static_cast<uint64_t>(p.dense_len) * p.bits + 7) / 8;
  }
  return 0;
}

std::vector<uint8_t> serialize(const CompressedPayload& p) {
  std::vector<uint8_t> out;
  const uint64_t total = wire_bytes(p);
  out.reserve(total);
  out.push_back(static_cast<uint8_t>(p.kind));
  uint8_t code = 0;
  if (p.kind == CompressionKind::top_k) code = kfrac_code(p.k_fraction);
  if (p.kind == CompressionKind::stochastic_quant) code = static_cast<uint8_t>(p.bits);
  out.push_back(code);
  put_u16(out, 0);  // reserved
  put_u32(out, p.dense_len);
  put_u32(out, p.kind == CompressionKind::stochastic_quant ? p.block_size : 0);
  put_u32(out, static_cast<uint32_t>(total - kHeaderBytes));

  switch (p.kind) {
    case CompressionKind::identity:
      for (double v : p.dense) put_f32(out, static_cast<float>(v));
      break;
    case CompressionKind::top_k: {
      int64_t prev = -1;
      for (const auto& e : p.entries) {
        uint64_t gap = static_cast<uint64_t>(static_cast<int64_t>(e.index) - prev - 1);
        while (gap >= 65535) {
          put_u16(out, static_cast<uint16_t>(kGapEscape));
          gap -= 65535;
        }
        put_u16(out, static_cast<uint16_t>(gap));
        put_f32(out, e.value);
        prev = e.index;
      }
      break;
    }
    case CompressionKind::stochastic_quant:
      for (float s : p.scales) put_f32(out, s);
      out.insert(out.end(), p.codes.begin(), p.codes.end());
      break;
  }
  if (out.size() != total) throw DecodeError("payload: serialized size mismatch");
  return out;
}

CompressedPayload deserialize(const std::vector<uint8_t>& bytes) {
  Reader r{bytes};
  if (bytes.size() < kHeaderBytes) throw DecodeError("payload: truncated header");
  const uint8_t kind_raw = bytes[r.pos++];
  const uint8_t code = bytes[r.pos++];
  r.u16();  // reserved
  CompressedPayload p;
  p.dense_len = r.u32();
  p.block_size = r.u32();
  const uint32_t payload_len = r.u32();
  if (bytes.size() != kHeaderBytes + payload_len)
    throw DecodeError("payload: length field disagrees with buffer");
  if (p.dense_len == 0) throw DecodeError("payload: zero dense_len");

  switch (kind_raw) {
    case static_cast<uint8_t>(CompressionKind::identity): {
      p.kind = CompressionKind::identity;
      if (payload_len != 4ull * p.dense_len) throw DecodeError("payload: dense length mismatch");
      p.dense.reserve(p.dense_len);
      for (uint32_t i = 0; i < p.dense_len; ++i) p.dense.push_back(r.f32());
      break;
    }
    case static_cast<uint8_t>(CompressionKind::top_k): {
      p.kind = CompressionKind::top_k;
      p.k_fraction = std::pow(10.0, -static_cast<double>(code) / 20.0);
      int64_t pos = -1;
      while (r.pos < bytes.size()) {
        const uint16_t gap = r.u16();
        if (gap == kGapEscape) {
          pos += 65535;
          continue;
        }
        pos += gap + 1;
        if (pos >= static_cast<int64_t>(p.dense_len))
          throw DecodeError("payload: entry index out of range");
        p.entries.push_back({static_cast<uint32_t>(pos), r.f32()});
      }
      break;
    }
    case static_cast<uint8_t>(CompressionKind::stochastic_quant): {
      p.kind = CompressionKind::stochastic_quant;
      p.bits = code;
      if (p.bits != 1 && p.bits != 2 && p.bits != 4 && p.bits != 8)
        throw DecodeError("payload: bad bit width");
      if (p.block_size == 0) throw DecodeError("payload: zero block size");
      const std::size_t nblocks = (p.dense_len + p.block_size - 1) / p.block_size;
      const std::size_t code_bytes = (static_cast<std::size_t>(p.dense_len) * p.bits + 7) / 8;
      if (payload_len != 4 * nblocks + code_bytes)
        throw DecodeError("payload: quant length mismatch");
      p.scales.reserve(nblocks);
      for (std::size_t i = 0; i < nblocks; ++i) p.scales.push_back(r.f32());
      p.codes.assign(bytes.begin() + r.pos, bytes.end());
      break;
    }
    default:
      throw DecodeError("payload: unknown kind");
  }
  return p;
}

double empirical_snr(const ParamVector& v, const CompressionSpec& spec, int trials, Rng& rng) {
  check_arg(!v.empty(), "empirical_snr: empty vector");
  check_arg(trials >= 1, "empirical_snr: trials must be >= 1");
  double norm2 = 0.0;
  for (double x : v) norm2 += x * x;
  check_arg(norm2 > 0.0, "empirical_snr: zero vector");

  double acc = 0.0;
  for (int t = 0; t < trials; ++t) {
    const ParamVector back = decompress(compress(v, spec, rng));
    double err2 = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double e = back[i] - v[i];
      err2 += e * e;
    }
    acc += err2 / norm2;
  }
  return acc / trials;
}

}  // namespace spx

#include "qrgd/lattice_quantizer.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

namespace qrgd {
namespace {

__extension__ using u128 = unsigned __int128;

constexpr double kMaxIndex = 4503599627370496.0;  // 2^52: lattice indices stay exact in a double
constexpr u128 kBlockLimit = ~u128(0);

int bit_length(u128 v) {
  const auto high = static_cast<std::uint64_t>(v >> 64);
  const auto low = static_cast<std::uint64_t>(v);
  return high != 0 ? 128 - std::countl_zero(high) : 64 - std::countl_zero(low);
}

/// Residues are packed in blocks of `digits` base-L digits, each block a
/// mixed-radix integer below 2^128 written with the fewest bits that hold L^digits - 1.
struct BlockLayout {
  int digits = 0;
  int bits_full = 0;
};

BlockLayout block_layout(std::uint64_t modulus) {
  BlockLayout layout;
  const u128 cap = kBlockLimit / modulus;
  u128 power = 1;
  while (power <= cap) {
    power *= modulus;
    ++layout.digits;
  }
  layout.bits_full = bit_length(power - 1);
  return layout;
}

int block_bits(std::uint64_t modulus, int digits) {
  u128 power = 1;
  for (int i = 0; i < digits; ++i) power *= modulus;
  return bit_length(power - 1);
}

std::int64_t payload_bits(std::uint64_t modulus, Eigen::Index dim) {
  const BlockLayout layout = block_layout(modulus);
  const Eigen::Index full = dim / layout.digits;
  const int tail = static_cast<int>(dim % layout.digits);
  return full * layout.bits_full + (tail > 0 ? block_bits(modulus, tail) : 0);
}

class BitWriter {
 public:
  void put(u128 value, int bits) {
    while (bits > 0) {
      const int used = static_cast<int>(count_ % 8);
      if (used == 0) bytes_.push_back(0);
      const int take = std::min(bits, 8 - used);
      const auto chunk = static_cast<unsigned>((value >> (bits - take)) & ((1U << take) - 1U));
      bytes_.back() |= static_cast<std::uint8_t>(chunk << (8 - used - take));
      bits -= take;
      count_ += take;
    }
  }
  std::vector<std::uint8_t> take() { return std::move(bytes_); }
  std::int64_t count() const { return count_; }

 private:
  std::vector<std::uint8_t> bytes_;
  std::int64_t count_ = 0;
};

class BitReader {
 public:
  explicit BitReader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}
  u128 get(int bits) {
    u128 value = 0;
    while (bits > 0) {
      if (pos_ / 8 >= static_cast<std::int64_t>(bytes_.size())) {
        throw std::invalid_argument("decode: payload shorter than its configuration implies");
      }
      const int used = static_cast<int>(pos_ % 8);
      const int take = std::min(bits, 8 - used);
      const unsigned chunk = (bytes_[pos_ / 8] >> (8 - used - take)) & ((1U << take) - 1U);
      value = (value << take) | chunk;
      bits -= take;
      pos_ += take;
    }
    return value;
  }

 private:
  const std::vector<std::uint8_t>& bytes_;
  std::int64_t pos_ = 0;
};

void validate(const QuantizerConfig& cfg) {
  if (cfg.dim < 1) throw std::invalid_argument("quantizer: dimension must be positive");
  if (!(cfg.input_radius > 0) || !std::isfinite(cfg.input_radius)) {
    throw std::invalid_argument("quantizer: input radius must be positive and finite");
  }
  if (!(cfg.output_radius > 0) || !std::isfinite(cfg.output_radius)) {
    throw std::invalid_argument("quantizer: output radius must be positive and finite");
  }
}

std::uint64_t mod_floor(std::int64_t k, std::uint64_t modulus) {
  const auto m = static_cast<std::int64_t>(modulus);
  const std::int64_t r = k % m;
  return static_cast<std::uint64_t>(r < 0 ? r + m : r);
}

}  // namespace

LatticeGeometry lattice_geometry(const QuantizerConfig& cfg) {
  validate(cfg);
  // Per-coordinate rounding error is at most cell/2, so the l2 error is at
  // most sqrt(dim) cell / 2 < w. The shrink keeps that strict under rounding.
  const double cell = 2.0 * cfg.output_radius / std::sqrt(static_cast<double>(cfg.dim)) *
                      (1.0 - 1e-12);
  // Decoding needs modulus * cell / 2 >= y + cell / 2 coordinatewise; the
  // relative margin covers callers that check ||x - ref|| <= y (1 + 1e-9).
  const double span = std::floor(2.0 * cfg.input_radius / cell * (1.0 + 1e-9));
  if (!(span < kMaxIndex)) {
    throw std::invalid_argument("quantizer: input/output radius ratio too large for exact indices");
  }
  return LatticeGeometry{cell, static_cast<std::uint64_t>(span) + 2};
}

EncodedMessage encode(const QuantizerConfig& cfg, const Eigen::Ref<const Eigen::VectorXd>& x) {
  const LatticeGeometry lattice = lattice_geometry(cfg);
  if (x.size() != cfg.dim) throw std::invalid_argument("encode: dimension mismatch");
  if (!x.allFinite()) throw std::invalid_argument("encode: non-finite input");

  const BlockLayout layout = block_layout(lattice.modulus);
  BitWriter writer;
  for (Eigen::Index start = 0; start < cfg.dim; start += layout.digits) {
    const int digits = static_cast<int>(std::min<Eigen::Index>(layout.digits, cfg.dim - start));
    u128 block = 0;
    for (int j = 0; j < digits; ++j) {
      const double scaled = std::round(x(start + j) / lattice.cell);
      if (!(std::abs(scaled) < kMaxIndex)) {
        throw std::invalid_argument("encode: value too large for the lattice index range");
      }
      block = block * lattice.modulus +
              mod_floor(static_cast<std::int64_t>(scaled), lattice.modulus);
    }
    writer.put(block, digits == layout.digits ? layout.bits_full
                                              : block_bits(lattice.modulus, digits));
  }
  EncodedMessage msg;
  msg.bit_count = writer.count();
  msg.payload = writer.take();
  msg.config = cfg;
  return msg;
}

std::vector<std::uint64_t> residues(const EncodedMessage& msg) {
  const LatticeGeometry lattice = lattice_geometry(msg.config);
  const Eigen::Index dim = msg.config.dim;
  const BlockLayout layout = block_layout(lattice.modulus);
  std::vector<std::uint64_t> out(static_cast<std::size_t>(dim));
  BitReader reader(msg.payload);
  for (Eigen::Index start = 0; start < dim; start += layout.digits) {
    const int digits = static_cast<int>(std::min<Eigen::Index>(layout.digits, dim - start));
    u128 block = reader.get(digits == layout.digits ? layout.bits_full
                                                    : block_bits(lattice.modulus, digits));
    for (int j = digits - 1; j >= 0; --j) {
      out[static_cast<std::size_t>(start + j)] = static_cast<std::uint64_t>(block % lattice.modulus);
      block /= lattice.modulus;
    }
  }
  return out;
}

Eigen::VectorXd decode(const EncodedMessage& msg,
                       const Eigen::Ref<const Eigen::VectorXd>& reference) {
  const LatticeGeometry lattice = lattice_geometry(msg.config);
  if (reference.size() != msg.config.dim) {
    throw std::invalid_argument("decode: reference dimension mismatch");
  }
  const std::vector<std::uint64_t> r = residues(msg);
  const auto modulus = static_cast<std::int64_t>(lattice.modulus);
  Eigen::VectorXd out(msg.config.dim);
  for (Eigen::Index j = 0; j < msg.config.dim; ++j) {
    const double target = reference(j) / lattice.cell;
    if (!(std::abs(target) < kMaxIndex)) {
      throw std::invalid_argument("decode: reference outside the lattice index range");
    }
    // Of the two indices congruent to r_j that bracket round(target), keep the nearer.
    const auto center = static_cast<std::int64_t>(std::round(target));
    const std::int64_t above =
        center + static_cast<std::int64_t>(mod_floor(static_cast<std::int64_t>(r[j]) - center,
                                                     lattice.modulus));
    const std::int64_t below = above - modulus;
    const double da = std::abs(static_cast<double>(above) - target);
    const double db = std::abs(static_cast<double>(below) - target);
    out(j) = static_cast<double>(da <= db ? above : below) * lattice.cell;
  }
  return out;
}

std::int64_t bit_cost(const QuantizerConfig& cfg) {
  validate(cfg);
  if (!(cfg.input_radius > cfg.output_radius)) {
    throw std::invalid_argument("bit_cost: input radius must exceed output radius");
  }
  return payload_bits(lattice_geometry(cfg).modulus, cfg.dim);
}

QuantizerConfig config_for_budget(double input_radius, Eigen::Index dim, int bits_per_coord) {
  if (bits_per_coord < 1 || bits_per_coord > 52) {
    throw std::invalid_argument("config_for_budget: bits per coordinate must be in [1, 52]");
  }
  const double levels = std::ldexp(1.0, bits_per_coord) - 1.0;
  QuantizerConfig cfg{input_radius,
                      std::sqrt(static_cast<double>(dim)) * input_radius / levels * (1.0 + 1e-6),
                      dim};
  validate(cfg);
  return cfg;
}

QuantizedTangent quantize_tangent(const QuantizerConfig& cfg, const TangentVectord& value,
                                  const TangentVectord& reference) {
  if (!same_point(value.base(), reference.base())) {
    throw std::invalid_argument("quantize_tangent: value and reference have different bases");
  }
  EncodedMessage msg = encode(cfg, value.coords());
  TangentVectord decoded = decode_tangent(msg, reference);
  return QuantizedTangent{std::move(msg), std::move(decoded)};
}

TangentVectord decode_tangent(const EncodedMessage& msg, const TangentVectord& reference) {
  return project_to_tangent(reference.base(), decode(msg, reference.coords()));
}

EncodedMessage encode_raw(const Eigen::Ref<const Eigen::VectorXd>& x) {
  BitWriter writer;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    writer.put(std::bit_cast<std::uint64_t>(x(j)), 64);
  }
  EncodedMessage msg;
  msg.bit_count = writer.count();
  msg.payload = writer.take();
  msg.config = QuantizerConfig{0, 0, x.size()};
  return msg;
}

Eigen::VectorXd decode_raw(const EncodedMessage& msg) {
  BitReader reader(msg.payload);
  Eigen::VectorXd out(msg.config.dim);
  for (Eigen::Index j = 0; j < out.size(); ++j) {
    out(j) = std::bit_cast<double>(static_cast<std::uint64_t>(reader.get(64)));
  }
  return out;
}

}  // namespace qrgd

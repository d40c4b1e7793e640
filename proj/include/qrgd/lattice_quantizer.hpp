#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "qrgd/sphere.hpp"

namespace qrgd {

/// Encoder and decoder agree on these from shared state; they never travel.
struct QuantizerConfig {
  double input_radius = 0;   // bound on ||x - reference|| at every decoder
  double output_radius = 0;  // guaranteed bound on ||decode - x||
  Eigen::Index dim = 0;
};

/// Cubic lattice s Z^dim with residues taken modulo `modulus`.
struct LatticeGeometry {
  double cell = 0;
  std::uint64_t modulus = 0;
};

LatticeGeometry lattice_geometry(const QuantizerConfig& cfg);

struct EncodedMessage {
  std::vector<std::uint8_t> payload;  // bitstream, MSB first, zero-padded to bytes
  std::int64_t bit_count = 0;
  QuantizerConfig config;
};

/// Rounds x to the nearest lattice point and transmits its residues.
EncodedMessage encode(const QuantizerConfig& cfg, const Eigen::Ref<const Eigen::VectorXd>& x);

/// The lattice point with the transmitted residues nearest to `reference`.
/// Correct whenever ||x - reference|| <= input_radius; a violated premise
/// cannot be detected here.
Eigen::VectorXd decode(const EncodedMessage& msg,
                       const Eigen::Ref<const Eigen::VectorXd>& reference);

/// Residues of an encoded message, mainly for inspection.
std::vector<std::uint64_t> residues(const EncodedMessage& msg);

/// Exact payload length for cfg. Requires input_radius / output_radius > 1.
std::int64_t bit_cost(const QuantizerConfig& cfg);

/// Config whose payload is at most bits_per_coord * dim bits for input
/// radius y (bits_per_coord in [1, 52]). The modulus is exactly
/// 2^bits_per_coord, and w = sqrt(dim) y / (2^bits_per_coord - 1), so w can
/// exceed y when the budget is below log2(sqrt(dim) + 1).
QuantizerConfig config_for_budget(double input_radius, Eigen::Index dim, int bits_per_coord);

struct QuantizedTangent {
  EncodedMessage message;
  TangentVectord decoded;
};

/// Quantizes a tangent vector; the decoder projects the lattice point back
/// onto the tangent space, which cannot increase the error.
QuantizedTangent quantize_tangent(const QuantizerConfig& cfg, const TangentVectord& value,
                                  const TangentVectord& reference);

/// Decodes a tangent message against a reference in the same tangent space.
TangentVectord decode_tangent(const EncodedMessage& msg, const TangentVectord& reference);

/// Uncompressed float64 transport: 64 bits per coordinate, big-endian.
EncodedMessage encode_raw(const Eigen::Ref<const Eigen::VectorXd>& x);
Eigen::VectorXd decode_raw(const EncodedMessage& msg);

}  // namespace qrgd

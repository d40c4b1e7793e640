#pragma once

#include <cstdint>
#include <vector>

namespace qrgd {

struct RoundBits {
  std::int64_t uplink = 0;
  std::int64_t downlink = 0;
};

/// Exact count of payload bits exchanged over a run. Every charge is the
/// length of an actual message (or of a 64-bit setup scalar).
class BitLedger {
 public:
  void charge_setup(std::int64_t bits);
  /// Starts a new round; subsequent link charges go to it.
  void open_round();
  void charge_uplink(std::int64_t bits);
  void charge_downlink(std::int64_t bits);

  std::int64_t setup_bits() const { return setup_bits_; }
  const std::vector<RoundBits>& rounds() const { return rounds_; }
  std::int64_t total() const { return total_; }
  /// Setup bits plus every round up to and including `round`.
  std::int64_t cumulative_through(std::size_t round) const;

 private:
  RoundBits& current();

  std::int64_t setup_bits_ = 0;
  std::int64_t total_ = 0;
  std::vector<RoundBits> rounds_;
};

}  // namespace qrgd

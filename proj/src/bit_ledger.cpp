#include "qrgd/bit_ledger.hpp"

#include <stdexcept>

namespace qrgd {
namespace {

void require_nonnegative(std::int64_t bits) {
  if (bits < 0) throw std::invalid_argument("BitLedger: negative bit charge");
}

}  // namespace

void BitLedger::charge_setup(std::int64_t bits) {
  require_nonnegative(bits);
  setup_bits_ += bits;
  total_ += bits;
}

void BitLedger::open_round() { rounds_.emplace_back(); }

RoundBits& BitLedger::current() {
  if (rounds_.empty()) throw std::logic_error("BitLedger: no open round");
  return rounds_.back();
}

void BitLedger::charge_uplink(std::int64_t bits) {
  require_nonnegative(bits);
  current().uplink += bits;
  total_ += bits;
}

void BitLedger::charge_downlink(std::int64_t bits) {
  require_nonnegative(bits);
  current().downlink += bits;
  total_ += bits;
}

std::int64_t BitLedger::cumulative_through(std::size_t round) const {
  std::int64_t sum = setup_bits_;
  for (std::size_t i = 0; i <= round && i < rounds_.size(); ++i) {
    sum += rounds_[i].uplink + rounds_[i].downlink;
  }
  return sum;
}

}  // namespace qrgd

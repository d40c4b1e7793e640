#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "qrgd/bit_ledger.hpp"
#include "qrgd/sphere.hpp"

namespace qrgd {

/// One row of a convergence trace. `budget` is the certified bound on
/// sum_error when the method provides one, NaN otherwise.
struct RoundRecord {
  int t = 0;
  double cost = 0;
  double dist = 0;
  double sum_error = 0;
  double budget = 0;
  std::int64_t uplink_bits = 0;
  std::int64_t downlink_bits = 0;
  std::int64_t cumulative_bits = 0;
};

struct Trajectory {
  std::string method;
  std::vector<RoundRecord> records;
  BitLedger ledger;
  UnitVectord final_point;
};

/// CSV with a header row; columns: method, then the RoundRecord fields.
void write_trace_csv(std::ostream& out, std::span<const Trajectory> traces);
/// One JSON object per line with the same fields.
void write_trace_jsonl(std::ostream& out, std::span<const Trajectory> traces);

/// Shortest decimal that round-trips; "nan"/"inf" spelled out.
std::string format_number(double value);

}  // namespace qrgd

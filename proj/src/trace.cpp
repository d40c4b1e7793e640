#include "qrgd/trace.hpp"

#include <array>
#include <charconv>
#include <cmath>

#include "json.hpp"

namespace qrgd {

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), res.ptr);
}

void write_trace_csv(std::ostream& out, std::span<const Trajectory> traces) {
  out << "method,t,cost,dist,sum_error,budget,uplink_bits,downlink_bits,cumulative_bits\n";
  for (const auto& trace : traces) {
    for (const auto& r : trace.records) {
      out << trace.method << ',' << r.t << ',' << format_number(r.cost) << ','
          << format_number(r.dist) << ',' << format_number(r.sum_error) << ','
          << format_number(r.budget) << ',' << r.uplink_bits << ',' << r.downlink_bits << ','
          << r.cumulative_bits << '\n';
    }
  }
}

namespace {

nlohmann::ordered_json number_or_null(double v) {
  return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr);
}

}  // namespace

void write_trace_jsonl(std::ostream& out, std::span<const Trajectory> traces) {
  for (const auto& trace : traces) {
    for (const auto& r : trace.records) {
      nlohmann::ordered_json row;
      row["method"] = trace.method;
      row["t"] = r.t;
      row["cost"] = number_or_null(r.cost);
      row["dist"] = number_or_null(r.dist);
      row["sum_error"] = number_or_null(r.sum_error);
      row["budget"] = number_or_null(r.budget);
      row["uplink_bits"] = r.uplink_bits;
      row["downlink_bits"] = r.downlink_bits;
      row["cumulative_bits"] = r.cumulative_bits;
      out << row.dump() << '\n';
    }
  }
}

}  // namespace qrgd

#include "qrgd/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "qrgd/initialization.hpp"
#include "qrgd/protocol.hpp"

namespace qrgd {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_cells(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.push_back(trim(line.substr(start, comma == std::string_view::npos ? comma : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

std::optional<double> parse_number(std::string_view cell) {
  if (cell.empty()) return std::nullopt;
  if (cell.front() == '+') cell.remove_prefix(1);
  double value = 0;
  const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (res.ec != std::errc() || res.ptr != cell.data() + cell.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

}  // namespace

Eigen::MatrixXd ingest_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("ingest_csv: cannot open " + path.string());
  std::vector<std::string> lines;
  std::vector<std::size_t> line_numbers;
  std::string line;
  for (std::size_t number = 1; std::getline(in, line); ++number) {
    if (trim(line).empty()) continue;
    lines.push_back(line);
    line_numbers.push_back(number);
  }
  if (lines.empty()) throw std::runtime_error("ingest_csv: " + path.string() + " is empty");

  std::size_t first = 0;
  {
    const auto cells = split_cells(lines[0]);
    const bool header = std::none_of(cells.begin(), cells.end(),
                                     [](std::string_view c) { return parse_number(c).has_value(); });
    if (header) first = 1;
  }
  if (first == lines.size()) throw std::runtime_error("ingest_csv: no data rows after the header");

  const std::size_t cols = split_cells(lines[first]).size();
  Eigen::MatrixXd rows(static_cast<Eigen::Index>(lines.size() - first),
                       static_cast<Eigen::Index>(cols));
  for (std::size_t r = first; r < lines.size(); ++r) {
    const auto cells = split_cells(lines[r]);
    if (cells.size() != cols) {
      std::ostringstream msg;
      msg << "ingest_csv: row " << line_numbers[r] << " has " << cells.size()
          << " columns, expected " << cols;
      throw std::runtime_error(msg.str());
    }
    for (std::size_t c = 0; c < cols; ++c) {
      const auto value = parse_number(cells[c]);
      if (!value) {
        std::ostringstream msg;
        msg << "ingest_csv: row " << line_numbers[r] << ", column " << c + 1
            << ": non-numeric cell '" << cells[c] << "'";
        throw std::runtime_error(msg.str());
      }
      rows(static_cast<Eigen::Index>(r - first), static_cast<Eigen::Index>(c)) = *value;
    }
  }
  return rows;
}

std::vector<Shard> partition_rows(const Eigen::MatrixXd& rows, int n_nodes, std::uint64_t seed,
                                  bool shuffle) {
  if (n_nodes < 1) throw std::invalid_argument("partition_rows: need at least one node");
  const Eigen::Index m = rows.rows();
  if (m < n_nodes) throw std::invalid_argument("partition_rows: fewer rows than nodes");

  std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  if (shuffle) {
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
  }
  std::vector<Shard> shards;
  const Eigen::Index base = m / n_nodes;
  const Eigen::Index extra = m % n_nodes;
  Eigen::Index start = 0;
  for (int i = 0; i < n_nodes; ++i) {
    const Eigen::Index size = base + (i < extra ? 1 : 0);
    Eigen::MatrixXd block(size, rows.cols());
    for (Eigen::Index r = 0; r < size; ++r) {
      block.row(r) = rows.row(order[static_cast<std::size_t>(start + r)]);
    }
    shards.push_back(Shard::from_rows(block));
    start += size;
  }
  return shards;
}

SyntheticSpec SyntheticSpec::with_gap(Eigen::Index dim, Eigen::Index rows, double lambda1,
                                      double gap_ratio, double tail_floor, std::uint64_t seed) {
  if (dim < 2) throw std::invalid_argument("SyntheticSpec: dimension must be at least 2");
  if (!(gap_ratio > 0 && gap_ratio < 1)) {
    throw std::invalid_argument("SyntheticSpec: gap ratio must lie in (0, 1)");
  }
  SyntheticSpec spec{dim, rows, std::vector<double>(static_cast<std::size_t>(dim)), seed};
  const double second = lambda1 * (1.0 - gap_ratio);
  const double last = std::min(tail_floor * lambda1, second);
  spec.eigenvalues[0] = lambda1;
  for (Eigen::Index i = 1; i < dim; ++i) {
    const double frac = dim == 2 ? 0.0 : static_cast<double>(i - 1) / static_cast<double>(dim - 2);
    spec.eigenvalues[static_cast<std::size_t>(i)] = second + frac * (last - second);
  }
  return spec;
}

SyntheticInstance synth_instance(const SyntheticSpec& spec) {
  const Eigen::Index d = spec.dim;
  if (d < 2 || static_cast<Eigen::Index>(spec.eigenvalues.size()) != d) {
    throw std::invalid_argument("synth_instance: need one eigenvalue per dimension, d >= 2");
  }
  if (spec.rows < 1) throw std::invalid_argument("synth_instance: need at least one row");
  if (!std::is_sorted(spec.eigenvalues.rbegin(), spec.eigenvalues.rend()) ||
      spec.eigenvalues.back() < 0) {
    throw std::invalid_argument("synth_instance: eigenvalues must be nonnegative, descending");
  }
  if (!(spec.eigenvalues[0] > spec.eigenvalues[1])) {
    throw std::invalid_argument("synth_instance: population eigengap must be positive");
  }
  Eigen::VectorXd scale(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    scale(i) = std::sqrt(spec.eigenvalues[static_cast<std::size_t>(i)] /
                         static_cast<double>(spec.rows));
  }

  constexpr int kMaxAttempts = 16;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    std::mt19937_64 rng(spec.seed + static_cast<std::uint64_t>(attempt) * 0x9E3779B97F4A7C15ULL);
    std::normal_distribution<double> normal;
    Eigen::MatrixXd g(d, d);
    for (Eigen::Index r = 0; r < d; ++r) {
      for (Eigen::Index c = 0; c < d; ++c) g(r, c) = normal(rng);
    }
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ();
    const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index c = 0; c < d; ++c) {
      if (r(c, c) < 0) q.col(c) = -q.col(c);
    }
    Eigen::MatrixXd z(spec.rows, d);
    for (Eigen::Index row = 0; row < spec.rows; ++row) {
      for (Eigen::Index c = 0; c < d; ++c) z(row, c) = normal(rng);
    }
    Eigen::MatrixXd rows = z * scale.asDiagonal() * q.transpose();
    const Eigen::MatrixXd gram = rows.transpose() * rows;
    Spectrumd spectrum = reference_spectrum(gram);
    if (spectrum.gap > 1e-12 * spectrum.eigenvalues(0)) {
      return SyntheticInstance{std::move(rows), std::move(q), std::move(spectrum), attempt + 1};
    }
  }
  throw std::runtime_error("synth_instance: realized covariance had no eigengap in " +
                           std::to_string(kMaxAttempts) + " draws");
}

}  // namespace qrgd

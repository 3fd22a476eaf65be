#include "psens/csv_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "psens/error.hpp"

namespace psens {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.push_back(trim(std::string_view(line).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return cells;
}

[[noreturn]] void fail(ErrorCode code, const std::string& source, std::size_t line,
                       const std::string& what) {
  throw Error(code, source + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

Sample parse_sample_csv(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) {
      header = split(line);
      break;
    }
  }
  if (header.empty()) throw Error(ErrorCode::Parse, source + ": missing header row");
  if (header.size() < 2)
    fail(ErrorCode::Parse, source, line_no, "header needs at least one input and one output column");
  for (const auto& h : header)
    if (h.empty()) fail(ErrorCode::Parse, source, line_no, "empty column name in header");

  const std::size_t cols = header.size();
  std::vector<double> values;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split(line);
    if (cells.size() != cols)
      fail(ErrorCode::Parse, source, line_no,
           "expected " + std::to_string(cols) + " fields, found " + std::to_string(cells.size()));
    for (std::size_t c = 0; c < cols; ++c) {
      const std::string& cell = cells[c];
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size())
        fail(ErrorCode::Parse, source, line_no,
             "column '" + header[c] + "': '" + cell + "' is not a number");
      if (!std::isfinite(v))
        fail(ErrorCode::InvalidSample, source, line_no,
             "column '" + header[c] + "': non-finite value '" + cell + "'");
      values.push_back(v);
    }
    ++rows;
  }
  if (rows == 0) throw Error(ErrorCode::EmptySample, source + ": no data rows");

  const auto n = Eigen::Index(rows);
  const auto k = Eigen::Index(cols - 1);
  Eigen::MatrixXd x(n, k);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) x(i, j) = values[std::size_t(i) * cols + std::size_t(j)];
    y[i] = values[std::size_t(i) * cols + cols - 1];
  }
  header.pop_back();
  return Sample(std::move(x), std::move(y), std::move(header));
}

Sample ingest_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "'");
  return parse_sample_csv(in, path.string());
}

void write_sample_csv(const Sample& sample, std::ostream& out) {
  for (const auto& name : sample.input_names()) out << name << ',';
  out << "y\n";
  char buf[32];
  for (Eigen::Index i = 0; i < sample.n(); ++i) {
    for (Eigen::Index j = 0; j < sample.k(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", sample.x()(i, j));
      out << buf << ',';
    }
    std::snprintf(buf, sizeof buf, "%.17g", sample.y()[i]);
    out << buf << '\n';
  }
}

void write_sample_csv(const Sample& sample, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path.string() + "'");
  write_sample_csv(sample, out);
  if (!out) throw Error(ErrorCode::Io, "write failed for '" + path.string() + "'");
}

}  // namespace psens

#include "udsub/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace udsub {

namespace {

std::string position(std::size_t line, std::size_t col) {
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.push_back(trim(line.substr(start)));
      return cells;
    }
    cells.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
}

}  // namespace

Dataset::Dataset(Matrix values, std::vector<std::string> column_names)
    : values_(std::move(values)), column_names_(std::move(column_names)) {
  if (values_.rows() < 1) throw std::invalid_argument("dataset has no rows");
  if (values_.cols() < 1) throw std::invalid_argument("dataset has no columns");
  if (!column_names_.empty() && static_cast<Index>(column_names_.size()) != values_.cols()) {
    throw std::invalid_argument("column name count does not match column count");
  }
  for (Index j = 0; j < values_.cols(); ++j) {
    for (Index i = 0; i < values_.rows(); ++i) {
      if (!std::isfinite(values_(i, j))) {
        throw std::invalid_argument("non-finite value at row " + std::to_string(i) +
                                    ", column " + std::to_string(j));
      }
    }
  }
}

Dataset Dataset::select_rows(std::span<const Index> rows) const {
  Matrix out(static_cast<Index>(rows.size()), cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] < 0 || rows[r] >= this->rows()) throw std::out_of_range("row index out of range");
    out.row(static_cast<Index>(r)) = values_.row(rows[r]);
  }
  return Dataset(std::move(out), column_names_);
}

Dataset Dataset::select_columns(std::span<const Index> cols) const {
  Matrix out(rows(), static_cast<Index>(cols.size()));
  std::vector<std::string> names;
  for (std::size_t c = 0; c < cols.size(); ++c) {
    if (cols[c] < 0 || cols[c] >= this->cols()) throw std::out_of_range("column index out of range");
    out.col(static_cast<Index>(c)) = values_.col(cols[c]);
    if (!column_names_.empty()) names.push_back(column_names_[static_cast<std::size_t>(cols[c])]);
  }
  return Dataset(std::move(out), std::move(names));
}

CsvError::CsvError(const std::string& what, std::size_t line, std::size_t column)
    : std::runtime_error(what), line_(line), column_(column) {}

Dataset parse_csv(std::istream& in, bool has_header) {
  std::vector<std::string> header;
  std::vector<double> cells;
  std::size_t width = 0;
  std::size_t n_rows = 0;
  std::size_t line_no = 0;
  std::string line;

  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = trim(line);
    if (view.empty()) continue;
    const auto fields = split(view);
    if (has_header && header.empty()) {
      for (auto f : fields) header.emplace_back(f);
      width = header.size();
      continue;
    }
    if (width == 0) width = fields.size();
    if (fields.size() != width) {
      throw CsvError("ragged row at line " + std::to_string(line_no) + ": expected " +
                         std::to_string(width) + " cells, found " + std::to_string(fields.size()),
                     line_no, 0);
    }
    for (std::size_t c = 0; c < fields.size(); ++c) {
      const std::string_view f = fields[c];
      double v = 0.0;
      const char* first = f.data();
      const char* last = f.data() + f.size();
      if (!f.empty() && *first == '+') ++first;
      const auto [ptr, ec] = std::from_chars(first, last, v);
      if (f.empty() || ec != std::errc() || ptr != last) {
        throw CsvError("cannot parse '" + std::string(f) + "' at " + position(line_no, c + 1),
                       line_no, c + 1);
      }
      if (!std::isfinite(v)) {
        throw CsvError("non-finite value '" + std::string(f) + "' at " + position(line_no, c + 1),
                       line_no, c + 1);
      }
      cells.push_back(v);
    }
    ++n_rows;
  }

  if (n_rows == 0) throw CsvError("no rows", line_no, 0);
  Matrix m(static_cast<Index>(n_rows), static_cast<Index>(width));
  for (std::size_t i = 0; i < n_rows; ++i) {
    for (std::size_t j = 0; j < width; ++j) {
      m(static_cast<Index>(i), static_cast<Index>(j)) = cells[i * width + j];
    }
  }
  return Dataset(std::move(m), std::move(header));
}

Dataset load_csv(const std::filesystem::path& path, bool has_header) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return parse_csv(in, has_header);
}

void write_csv(std::ostream& out, const Matrix& values, const std::vector<std::string>& header) {
  if (!header.empty()) {
    for (std::size_t j = 0; j < header.size(); ++j) out << (j ? "," : "") << header[j];
    out << '\n';
  }
  // Shortest text that round-trips exactly.
  char buf[32];
  for (Index i = 0; i < values.rows(); ++i) {
    for (Index j = 0; j < values.cols(); ++j) {
      const auto res = std::to_chars(buf, buf + sizeof buf, values(i, j));
      out << (j ? "," : "");
      out.write(buf, res.ptr - buf);
    }
    out << '\n';
  }
}

void write_csv(const std::filesystem::path& path, const Matrix& values,
               const std::vector<std::string>& header) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_csv(out, values, header);
}

std::vector<ColumnSummary> describe(const Dataset& d) {
  std::vector<ColumnSummary> out;
  out.reserve(static_cast<std::size_t>(d.cols()));
  std::vector<double> col(static_cast<std::size_t>(d.rows()));
  for (Index j = 0; j < d.cols(); ++j) {
    for (Index i = 0; i < d.rows(); ++i) col[static_cast<std::size_t>(i)] = d(i, j);
    std::sort(col.begin(), col.end());
    ColumnSummary s;
    s.min = col.front();
    s.max = col.back();
    s.mean = d.values().col(j).mean();
    s.distinct = static_cast<Index>(std::unique(col.begin(), col.end()) - col.begin());
    out.push_back(s);
  }
  return out;
}

std::vector<Index> read_index_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<Index> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view v = trim(line);
    if (v.empty()) continue;
    long long idx = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), idx);
    if (ec != std::errc() || ptr != v.data() + v.size() || idx < 0) {
      throw CsvError("invalid index '" + std::string(v) + "' at line " + std::to_string(line_no),
                     line_no, 1);
    }
    out.push_back(static_cast<Index>(idx));
  }
  return out;
}

void write_index_list(const std::filesystem::path& path, std::span<const Index> indices) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (Index i : indices) out << i << '\n';
}

}  // namespace udsub

#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "udsub/types.hpp"

namespace udsub {

/// N x s table of finite observations. Row i has identity i; the matrix is
/// immutable after construction and safe to share across threads.
class Dataset {
 public:
  explicit Dataset(Matrix values, std::vector<std::string> column_names = {});

  [[nodiscard]] Index rows() const { return values_.rows(); }
  [[nodiscard]] Index cols() const { return values_.cols(); }
  [[nodiscard]] const Matrix& values() const { return values_; }
  [[nodiscard]] double operator()(Index i, Index j) const { return values_(i, j); }
  [[nodiscard]] const std::vector<std::string>& column_names() const { return column_names_; }

  [[nodiscard]] Dataset select_rows(std::span<const Index> rows) const;
  [[nodiscard]] Dataset select_columns(std::span<const Index> cols) const;

 private:
  Matrix values_;
  std::vector<std::string> column_names_;
};

/// Parse failure with a 1-based file line and column (0 when not applicable).
class CsvError : public std::runtime_error {
 public:
  CsvError(const std::string& what, std::size_t line, std::size_t column);
  [[nodiscard]] std::size_t line() const { return line_; }
  [[nodiscard]] std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

Dataset parse_csv(std::istream& in, bool has_header);
Dataset load_csv(const std::filesystem::path& path, bool has_header);

/// Values are written with 17 significant digits so doubles round-trip.
void write_csv(std::ostream& out, const Matrix& values,
               const std::vector<std::string>& header = {});
void write_csv(const std::filesystem::path& path, const Matrix& values,
               const std::vector<std::string>& header = {});

struct ColumnSummary {
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
  Index distinct = 0;
};

std::vector<ColumnSummary> describe(const Dataset& d);

/// One non-negative row index per line.
std::vector<Index> read_index_list(const std::filesystem::path& path);
void write_index_list(const std::filesystem::path& path, std::span<const Index> indices);

}  // namespace udsub

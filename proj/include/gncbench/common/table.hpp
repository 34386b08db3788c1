#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace gncbench {

/// Whitespace-separated numeric table with a single header line naming the
/// columns. Numbers are written in shortest round-trip form with a '.'
/// decimal point regardless of locale, so identical data gives identical bytes.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  /// Index of `name` in columns, or -1.
  int column(const std::string& name) const;
};

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void write_table(std::ostream& out, const Table& table);
Table read_table(std::istream& in);

void save_table(const std::filesystem::path& path, const Table& table);
Table load_table(const std::filesystem::path& path);

/// Shortest round-trip decimal representation of `v`.
std::string format_number(double v);

}  // namespace gncbench

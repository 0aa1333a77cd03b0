#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hcfm::cli {

/// Rectangular numeric table with '#' comment lines above the header.
struct CsvTable {
  std::vector<std::string> comments;  ///< without the leading "# "
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  void add_row(std::vector<double> row);
  /// Index of a named column; throws hcfm::InvalidArgument when absent.
  std::size_t column(const std::string& name) const;
  std::vector<double> column_values(const std::string& name) const;
};

/// 17 significant digits, '.' separator, "nan"/"inf" for non-finite values.
std::string format_number(double v);

void write_csv(std::ostream& out, const CsvTable& t);
void write_csv(const std::string& path, const CsvTable& t);

/// Throws hcfm::InvalidArgument on ragged rows or unparseable numbers.
CsvTable read_csv(std::istream& in);
CsvTable read_csv(const std::string& path);

}  // namespace hcfm::cli

#pragma once

#include <string>
#include <vector>

namespace binlat {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

// Strict comma-separated reader: no quoting, tolerant of CRLF and a trailing
// newline, intolerant of ragged rows. Error messages carry 1-based line numbers.
CsvTable read_csv(const std::string& path);

// Throws unless the table header equals `expected` exactly (order included).
void require_header(const CsvTable& t, const std::vector<std::string>& expected,
                    const std::string& path);

double parse_double_field(const std::string& field, const std::string& context);

// Shortest text that round-trips the double exactly.
std::string format_double(double x);

// Writes text to `path` atomically (temp file + rename).
void write_text_file(const std::string& path, const std::string& content);

std::string join_csv_row(const std::vector<std::string>& fields);

}  // namespace binlat

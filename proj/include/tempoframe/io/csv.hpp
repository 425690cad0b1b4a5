#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tempoframe::io {

struct CsvRecord {
  std::size_t line = 0;  // 1-based line where the record starts
  std::vector<std::string> fields;
};

/// RFC 4180 style parsing (double-quote escaping, LF or CRLF). The first
/// record is returned like any other. Throws ParseError on an unterminated
/// quoted field.
std::vector<CsvRecord> parse_csv(std::string_view text, std::string_view source);

/// One record terminated by LF; fields quoted only when needed.
std::string format_csv_record(std::span<const std::string> fields);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace tempoframe::io

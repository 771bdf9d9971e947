#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace multiexec {

/// Fixed numeric format for every emitted file: 12 significant digits.
std::string format_number(double v);

void write_csv_row(std::ostream& out, const std::vector<std::string>& cells);
void write_csv_row(std::ostream& out, const std::vector<double>& cells);

/// Splits one CSV line on commas (no quoting; the emitted files never quote).
std::vector<std::string> split_csv_line(std::string_view line);

/// 64-bit FNV-1a hash, hex encoded; used as the integrity check of data files.
std::string fnv1a_hex(std::string_view bytes);

std::string read_file(const std::string& path);
/// Writes `content` to `path`, creating parent directories.
void write_file(const std::string& path, std::string_view content);

}  // namespace multiexec

#pragma once

#include <string>
#include <vector>

namespace ideoscale::csv {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    // column index by name, throws std::runtime_error if absent
    std::size_t col(const std::string& name) const;
    bool has_col(const std::string& name) const;
};

Table read_file(const std::string& path);
Table read_string(const std::string& text, const std::string& source_name = "<string>");

// Fixed-decimal rendering used by every emitted table: round half away
// from zero, no exponent notation, non-finite values become the empty
// field (the files' NaN convention).
std::string format_float(double x, int decimals);

// Empty field or "nan" parses to NaN; anything else must be a full,
// valid number.
double parse_double(const std::string& field, const std::string& context = "");
long long parse_int(const std::string& field, const std::string& context = "");

std::string join_row(const std::vector<std::string>& fields);

// Writes via temp file + rename so partially written outputs never land
// under the final name.
void write_file_atomic(const std::string& path, const std::string& contents);

std::string read_whole_file(const std::string& path);

} // namespace ideoscale::csv

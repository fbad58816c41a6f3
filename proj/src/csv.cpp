#include "ideoscale/csv.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ideoscale::csv {

std::size_t Table::col(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return i;
    throw std::runtime_error("csv: missing column '" + name + "'");
}

bool Table::has_col(const std::string& name) const {
    return std::find(header.begin(), header.end(), name) != header.end();
}

namespace {

// One line -> fields. Double quotes delimit fields that contain commas;
// "" inside a quoted field is a literal quote.
std::vector<std::string> split_line(const std::string& line, std::size_t line_no,
                                    const std::string& source) {
    std::vector<std::string> fields;
    std::string cur;
    bool in_quotes = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                cur.push_back(c);
            }
        } else if (c == '"' && cur.empty()) {
            in_quotes = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (in_quotes)
        throw std::runtime_error(source + ":" + std::to_string(line_no) + ": unterminated quote");
    fields.push_back(std::move(cur));
    return fields;
}

} // namespace

Table read_string(const std::string& text, const std::string& source_name) {
    Table t;
    std::size_t pos = 0, line_no = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string::npos) end = text.size();
        std::string line = text.substr(pos, end - pos);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        pos = end + 1;
        ++line_no;
        if (line.empty()) continue;
        auto fields = split_line(line, line_no, source_name);
        if (t.header.empty()) {
            t.header = std::move(fields);
        } else {
            if (fields.size() != t.header.size())
                throw std::runtime_error(source_name + ":" + std::to_string(line_no) + ": expected " +
                                         std::to_string(t.header.size()) + " fields, got " +
                                         std::to_string(fields.size()));
            t.rows.push_back(std::move(fields));
        }
    }
    if (t.header.empty()) throw std::runtime_error(source_name + ": empty csv (no header)");
    return t;
}

Table read_file(const std::string& path) {
    return read_string(read_whole_file(path), path);
}

std::string read_whole_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string format_float(double x, int decimals) {
    if (!std::isfinite(x)) return "";
    if (decimals < 0 || decimals > 9) throw std::invalid_argument("format_float: decimals out of range");
    static const long double pow10[] = {1e0L, 1e1L, 1e2L, 1e3L, 1e4L, 1e5L, 1e6L, 1e7L, 1e8L, 1e9L};
    const long double y = fabsl(static_cast<long double>(x)) * pow10[decimals];
    if (y >= 9.0e18L) {
        // out of the exact-integer range; positions/statistics never get here
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.*f", decimals, x);
        return buf;
    }
    unsigned long long r = static_cast<unsigned long long>(floorl(y + 0.5L));
    std::string digits = std::to_string(r);
    if (digits.size() <= static_cast<std::size_t>(decimals))
        digits.insert(0, static_cast<std::size_t>(decimals) + 1 - digits.size(), '0');
    std::string out;
    if (std::signbit(x) && r != 0) out.push_back('-');
    out.append(digits, 0, digits.size() - static_cast<std::size_t>(decimals));
    if (decimals > 0) {
        out.push_back('.');
        out.append(digits, digits.size() - static_cast<std::size_t>(decimals),
                   static_cast<std::size_t>(decimals));
    }
    return out;
}

double parse_double(const std::string& field, const std::string& context) {
    if (field.empty() || field == "nan" || field == "NaN" || field == "NAN")
        return std::nan("");
    errno = 0;
    char* endp = nullptr;
    const double v = std::strtod(field.c_str(), &endp);
    if (errno != 0 || endp == field.c_str() || *endp != '\0')
        throw std::runtime_error("invalid number '" + field + "'" +
                                 (context.empty() ? "" : " in " + context));
    return v;
}

long long parse_int(const std::string& field, const std::string& context) {
    errno = 0;
    char* endp = nullptr;
    const long long v = std::strtoll(field.c_str(), &endp, 10);
    if (errno != 0 || endp == field.c_str() || *endp != '\0')
        throw std::runtime_error("invalid integer '" + field + "'" +
                                 (context.empty() ? "" : " in " + context));
    return v;
}

std::string join_row(const std::vector<std::string>& fields) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out.push_back(',');
        const std::string& f = fields[i];
        if (f.find_first_of(",\"\n") != std::string::npos) {
            out.push_back('"');
            for (char c : f) {
                if (c == '"') out.push_back('"');
                out.push_back(c);
            }
            out.push_back('"');
        } else {
            out += f;
        }
    }
    out.push_back('\n');
    return out;
}

void write_file_atomic(const std::string& path, const std::string& contents) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write file: " + tmp);
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!out) throw std::runtime_error("write failed: " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw std::runtime_error("rename failed: " + tmp + " -> " + path);
}

} // namespace ideoscale::csv

#include "aidx/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>

#include "aidx/errors.hpp"

namespace aidx::csv {

Row split_line(std::string_view line) {
    Row out;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"' && field.empty()) {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(field));
            field.clear();
        } else {
            field += c;
        }
    }
    out.push_back(std::move(field));
    return out;
}

std::vector<Row> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("csv", "cannot open " + path.string());
    std::vector<Row> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        rows.push_back(split_line(line));
    }
    return rows;
}

std::string format_g12(double v) {
    if (v == 0.0) v = 0.0;  // drop the sign of -0
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

double parse_double(std::string_view field, const std::string& context) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || p != field.data() + field.size())
        throw DataError("csv", "bad number '" + std::string(field) + "' (" + context + ")");
    return v;
}

long parse_long(std::string_view field, const std::string& context) {
    long v = 0;
    auto [p, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || p != field.data() + field.size())
        throw DataError("csv", "bad integer '" + std::string(field) + "' (" + context + ")");
    return v;
}

}  // namespace aidx::csv

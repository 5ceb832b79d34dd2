#pragma once

#include <charconv>
#include <fstream>
#include <string>
#include <vector>

#include "hiforead/errors.hpp"

namespace hiforead::csv {

/// Splits one CSV line on commas. No quoting support; trailing '\r' stripped.
inline std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string current;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(current);
            current.clear();
        } else if (c != '\r') {
            current.push_back(c);
        }
    }
    fields.push_back(current);
    return fields;
}

inline std::size_t column_index(const std::vector<std::string>& header,
                                const std::string& name,
                                const std::string& path) {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return i;
    }
    throw DataError("column '" + name + "' not found in header of " + path);
}

inline double parse_double(const std::string& text, const std::string& path,
                           std::size_t line_number) {
    double value = 0.0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end) {
        throw DataError(path + ":" + std::to_string(line_number) +
                        ": non-numeric value '" + text + "'");
    }
    return value;
}

} // namespace hiforead::csv

#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "ntl/error.hpp"
#include "ntl/rng.hpp"

namespace ntl::csv {

inline constexpr char kDelimiter = ';';

inline std::vector<std::string> split_line(std::string_view line, char delim = kDelimiter) {
    std::vector<std::string> fields;
    std::size_t pos = 0;
    while (true) {
        const std::size_t sep = line.find(delim, pos);
        if (sep == std::string_view::npos) {
            fields.emplace_back(line.substr(pos));
            break;
        }
        fields.emplace_back(line.substr(pos, sep - pos));
        pos = sep + 1;
    }
    return fields;
}

// Shortest decimal form that round-trips the exact double.
inline std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

// Full-token parse; rejects trailing garbage, empty fields, NaN and infinities.
inline std::optional<double> parse_double(std::string_view s) {
    if (s.empty()) return std::nullopt;
    double v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) return std::nullopt;
    if (!std::isfinite(v)) return std::nullopt;
    return v;
}

inline std::optional<std::int64_t> parse_int(std::string_view s) {
    if (s.empty()) return std::nullopt;
    std::int64_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    // Index of a required header column.
    std::size_t column(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        throw Error(ErrorCode::header_mismatch, "missing column '" + name + "'");
    }
};

inline Table read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::file_unreadable, path);
    Table t;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (first) {
            t.header = split_line(line);
            first = false;
            continue;
        }
        if (line.empty()) continue;
        t.rows.push_back(split_line(line));
    }
    if (first) throw Error(ErrorCode::header_mismatch, "empty file: " + path);
    return t;
}

class Writer {
public:
    explicit Writer(const std::string& path) : out_(path, std::ios::binary) {
        if (!out_) throw Error(ErrorCode::file_unwritable, path);
    }

    void row(const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) out_ << kDelimiter;
            out_ << fields[i];
        }
        out_ << '\n';
    }

private:
    std::ofstream out_;
};

inline std::uint64_t file_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::file_unreadable, path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return fnv1a64(ss.str());
}

}  // namespace ntl::csv

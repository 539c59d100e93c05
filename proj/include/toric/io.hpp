// Copyright 2026 The Toric Learn Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TORIC_IO_HPP
#define TORIC_IO_HPP

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "toric/common.hpp"

namespace toric {

/// Shortest decimal form that parses back to the same double.
inline std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\r' || s.back() == '\t')) s.remove_suffix(1);
    double v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw IoError("cannot parse number '" + std::string(s) + "'");
    }
    return v;
}

inline std::string read_file(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("error reading " + path.string());
    return ss.str();
}

/// Writes to a sibling temporary file and renames it over `path`, so
/// readers never observe a partially written file.
inline void atomic_write(const std::filesystem::path &path, std::string_view content) {
    namespace fs = std::filesystem;
    std::error_code ec;
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path(), ec);
        if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
    }
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) throw IoError("error writing " + tmp.string());
    }
    fs::rename(tmp, path, ec);
    if (ec) throw IoError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

/// Numeric table with a named header row.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    std::string to_string() const {
        std::string out;
        for (size_t j = 0; j < header.size(); ++j) out += (j ? "," : "") + header[j];
        out += '\n';
        for (const auto &row : rows) {
            for (size_t j = 0; j < row.size(); ++j) out += (j ? "," : "") + format_double(row[j]);
            out += '\n';
        }
        return out;
    }

    static CsvTable parse(std::string_view text, const std::vector<std::string> &expected_header) {
        CsvTable t;
        size_t line_no = 0;
        while (!text.empty()) {
            const size_t nl = text.find('\n');
            std::string_view line = text.substr(0, nl);
            text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
            if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
            ++line_no;
            if (line.empty()) continue;
            std::vector<std::string_view> cells;
            size_t pos = 0;
            while (true) {
                const size_t comma = line.find(',', pos);
                cells.push_back(line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
                if (comma == std::string_view::npos) break;
                pos = comma + 1;
            }
            if (t.header.empty()) {
                for (auto c : cells) t.header.emplace_back(c);
                if (t.header != expected_header) throw IoError("unexpected CSV header on line 1");
                continue;
            }
            if (cells.size() != t.header.size()) {
                throw IoError("CSV line " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                              " fields, expected " + std::to_string(t.header.size()));
            }
            std::vector<double> row;
            row.reserve(cells.size());
            for (auto c : cells) row.push_back(parse_double(c));
            t.rows.push_back(std::move(row));
        }
        if (t.header.empty()) throw IoError("empty CSV file");
        return t;
    }
};

}  // namespace toric

#endif  // TORIC_IO_HPP

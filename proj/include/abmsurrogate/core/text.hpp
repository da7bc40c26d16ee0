#pragma once

// Small text utilities shared by the file formats: shortest round-trip
// number formatting, CSV tables and `key = value` configuration files.

#include <abmsurrogate/core/error.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace abmsurrogate {

/// Shortest decimal that parses back to exactly the same double.
inline std::string format_number(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buffer[64];
    const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
    return std::string(buffer, result.ptr);
}

inline std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

inline std::vector<std::string> split(std::string_view line, char sep) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        fields.emplace_back(trim(line.substr(start, pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return fields;
}

inline double parse_number(std::string_view text, std::string_view context = {}) {
    text = trim(text);
    double value = 0.0;
    const auto* end = text.data() + text.size();
    const auto result = std::from_chars(text.data(), end, value);
    if (result.ec != std::errc{} || result.ptr != end) {
        throw DataError("cannot parse number '" + std::string(text) + "'" +
                        (context.empty() ? "" : " in " + std::string(context)));
    }
    return value;
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    [[nodiscard]] std::size_t column(std::string_view name) const {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw DataError("missing CSV column '" + std::string(name) + "'");
        return static_cast<std::size_t>(it - header.begin());
    }
};

inline CsvTable parse_csv(std::istream& in, std::string_view source = "csv") {
    CsvTable table;
    std::string line;
    bool have_header = false;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto fields = split(line, ',');
        if (!have_header) {
            table.header = std::move(fields);
            have_header = true;
            continue;
        }
        if (fields.size() != table.header.size()) {
            throw DataError(std::string(source) + ":" + std::to_string(line_no) + ": expected " +
                            std::to_string(table.header.size()) + " fields, got " +
                            std::to_string(fields.size()));
        }
        table.rows.push_back(std::move(fields));
    }
    if (!have_header) throw DataError(std::string(source) + ": empty CSV file");
    return table;
}

inline CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    return parse_csv(in, path);
}

inline std::string join(const std::vector<std::string>& fields, char sep = ',') {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out.push_back(sep);
        out += fields[i];
    }
    return out;
}

/// Parsed `key = value` file. Lines starting with '#' are comments.
class KeyValueConfig {
public:
    KeyValueConfig() = default;

    static KeyValueConfig parse(std::istream& in, std::string_view source = "config") {
        KeyValueConfig config;
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            auto body = trim(std::string_view(line).substr(0, line.find('#')));
            if (body.empty()) continue;
            const auto eq = body.find('=');
            if (eq == std::string_view::npos) {
                throw DataError(std::string(source) + ":" + std::to_string(line_no) +
                                ": expected 'key = value'");
            }
            config.values_[std::string(trim(body.substr(0, eq)))] = std::string(trim(body.substr(eq + 1)));
        }
        return config;
    }

    static KeyValueConfig load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw DataError("cannot open config '" + path + "'");
        return parse(in, path);
    }

    [[nodiscard]] bool contains(const std::string& key) const { return values_.count(key) != 0; }

    [[nodiscard]] const std::map<std::string, std::string>& entries() const { return values_; }

    void set(const std::string& key, std::string value) { values_[key] = std::move(value); }

    [[nodiscard]] std::string get_string(const std::string& key, const std::string& fallback) const {
        const auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }

    [[nodiscard]] double get_number(const std::string& key, double fallback) const {
        const auto it = values_.find(key);
        return it == values_.end() ? fallback : parse_number(it->second, key);
    }

    [[nodiscard]] std::vector<std::string> get_list(const std::string& key,
                                                    const std::vector<std::string>& fallback) const {
        const auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        std::vector<std::string> out;
        for (auto& item : split(it->second, ',')) {
            if (!item.empty()) out.push_back(item);
        }
        return out;
    }

private:
    std::map<std::string, std::string> values_;
};

}  // namespace abmsurrogate

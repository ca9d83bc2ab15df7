// csv.hpp -- small CSV reader/writer (comma, header row, UTF-8, LF).

#ifndef NORQ_CSV_HPP_
#define NORQ_CSV_HPP_

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "norq/errors.hpp"

namespace norq {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t col(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        throw BadInputFile("missing column '" + name + "'");
    }

    std::optional<std::size_t> find_col(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        return std::nullopt;
    }
};

namespace detail {

// true when the text ends inside an open quoted field; mirrors the state
// machine in split_csv_line
inline bool has_open_quote(const std::string& text) {
    bool quoted = false;
    std::string field;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"' && field.empty()) {
            quoted = true;
        } else if (c == ',') {
            field.clear();
        } else if (c != '\r') {
            field.push_back(c);
        }
    }
    return quoted;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"' && field.empty()) {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else if (c != '\r') {
            field.push_back(c);
        }
    }
    fields.push_back(std::move(field));
    return fields;
}

}  // namespace detail

inline CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw BadInputFile("cannot open " + path);
    CsvTable table;

    // a record spans physical lines while a quoted field stays open
    auto next_record = [&in](std::string& record) {
        if (!std::getline(in, record)) return false;
        std::string more;
        while (detail::has_open_quote(record) && std::getline(in, more))
            record += "\n" + more;
        return true;
    };

    std::string record;
    if (!next_record(record)) throw BadInputFile("empty file " + path);
    table.header = detail::split_csv_line(record);
    while (next_record(record)) {
        if (record.empty()) continue;
        auto fields = detail::split_csv_line(record);
        if (fields.size() != table.header.size())
            throw BadInputFile(path + ": row with " + std::to_string(fields.size()) +
                               " fields, expected " + std::to_string(table.header.size()));
        table.rows.push_back(std::move(fields));
    }
    return table;
}

inline double parse_double(std::string_view s) {
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw BadInputFile("bad number: '" + std::string(s) + "'");
    return value;
}

inline std::optional<double> parse_double_opt(std::string_view s) {
    if (s.empty() || s == "NA" || s == "nan" || s == "NaN") return std::nullopt;
    return parse_double(s);
}

inline long parse_long(std::string_view s) {
    long value = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw BadInputFile("bad integer: '" + std::string(s) + "'");
    return value;
}

// Writer: quotes only when needed, LF line endings.
class CsvWriter {
public:
    explicit CsvWriter(const std::string& path) : out_(path, std::ios::binary) {
        if (!out_) throw Error("cannot write " + path);
    }

    void row(const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) out_ << ',';
            write_field(fields[i]);
        }
        out_ << '\n';
    }

private:
    void write_field(const std::string& f) {
        if (f.find_first_of(",\"\n") == std::string::npos) {
            out_ << f;
            return;
        }
        out_ << '"';
        for (char c : f) {
            if (c == '"') out_ << "\"\"";
            else out_ << c;
        }
        out_ << '"';
    }

    std::ofstream out_;
};

inline std::string fmt_double(double v, int precision = 12) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
    return buf;
}

}  // namespace norq

#endif  // NORQ_CSV_HPP_

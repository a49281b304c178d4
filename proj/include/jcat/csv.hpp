#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "jcat/errors.hpp"

namespace jcat {

// Minimal RFC-4180 CSV: comma delimiter, double-quote quoting, "" escapes,
// quoted fields may contain commas and newlines. Tolerates CRLF input.
inline std::vector<std::vector<std::string>> parse_csv(std::istream& in) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool in_quotes = false;
    bool row_started = false;
    int c;
    while ((c = in.get()) != EOF) {
        const char ch = static_cast<char>(c);
        if (in_quotes) {
            if (ch == '"') {
                if (in.peek() == '"') {
                    field.push_back('"');
                    in.get();
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(ch);
            }
            continue;
        }
        switch (ch) {
            case '"':
                in_quotes = true;
                row_started = true;
                break;
            case ',':
                row.push_back(field);
                field.clear();
                row_started = true;
                break;
            case '\r':
                break;
            case '\n':
                if (row_started || !field.empty() || !row.empty()) {
                    row.push_back(field);
                    field.clear();
                    rows.push_back(row);
                    row.clear();
                }
                row_started = false;
                break;
            default:
                field.push_back(ch);
                row_started = true;
                break;
        }
    }
    if (in_quotes) {
        throw CsvFormatError("unterminated quoted field at end of input");
    }
    if (row_started || !field.empty() || !row.empty()) {
        row.push_back(field);
        rows.push_back(row);
    }
    return rows;
}

inline bool csv_needs_quoting(const std::string& s) {
    for (char ch : s) {
        if (ch == ',' || ch == '"' || ch == '\n' || ch == '\r') return true;
    }
    return false;
}

inline void write_csv_field(std::ostream& out, const std::string& s) {
    if (!csv_needs_quoting(s)) {
        out << s;
        return;
    }
    out << '"';
    for (char ch : s) {
        if (ch == '"') out << "\"\"";
        else out << ch;
    }
    out << '"';
}

inline void write_csv_row(std::ostream& out, const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) out << ',';
        write_csv_field(out, row[i]);
    }
    out << '\n';
}

inline void write_csv(std::ostream& out, const std::vector<std::vector<std::string>>& rows) {
    for (const auto& row : rows) write_csv_row(out, row);
}

}  // namespace jcat

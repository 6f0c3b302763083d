#pragma once

// Minimal RFC-4180 reader/writer for the log and matrix files.

#include <string>
#include <string_view>
#include <vector>

namespace cpctx::csv {

struct Row {
    std::size_t line_no = 0;  // 1-based line where the row starts
    std::vector<std::string> fields;
    bool malformed = false;   // unterminated quote or stray quote
};

/// Splits `content` into rows. Quoted fields may contain commas, doubled
/// quotes and line breaks. Blank lines are skipped. CRLF is accepted.
inline std::vector<Row> parse(std::string_view content) {
    std::vector<Row> rows;
    std::size_t i = 0;
    std::size_t line = 1;
    const std::size_t n = content.size();
    while (i < n) {
        Row row;
        row.line_no = line;
        std::string field;
        bool in_quotes = false;
        bool field_was_quoted = false;
        bool row_done = false;
        while (i < n && !row_done) {
            char c = content[i];
            if (in_quotes) {
                if (c == '"') {
                    if (i + 1 < n && content[i + 1] == '"') {
                        field.push_back('"');
                        i += 2;
                    } else {
                        in_quotes = false;
                        ++i;
                    }
                } else {
                    if (c == '\n') ++line;
                    field.push_back(c);
                    ++i;
                }
                continue;
            }
            switch (c) {
                case ',':
                    row.fields.push_back(std::move(field));
                    field.clear();
                    field_was_quoted = false;
                    ++i;
                    break;
                case '"':
                    if (field.empty() && !field_was_quoted) {
                        in_quotes = true;
                        field_was_quoted = true;
                    } else {
                        row.malformed = true;
                        field.push_back(c);
                    }
                    ++i;
                    break;
                case '\r':
                    ++i;
                    break;
                case '\n':
                    ++line;
                    ++i;
                    row_done = true;
                    break;
                default:
                    if (field_was_quoted) row.malformed = true;
                    field.push_back(c);
                    ++i;
            }
        }
        if (in_quotes) row.malformed = true;
        row.fields.push_back(std::move(field));
        bool blank = row.fields.size() == 1 && row.fields[0].empty() && !field_was_quoted;
        if (!blank) rows.push_back(std::move(row));
    }
    return rows;
}

inline std::string quote(std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

inline std::string join(const std::vector<std::string>& fields) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out.push_back(',');
        out += quote(fields[i]);
    }
    return out;
}

}  // namespace cpctx::csv

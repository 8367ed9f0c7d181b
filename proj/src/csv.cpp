#include "miaudit/csv.hpp"

namespace miaudit::csv {

std::vector<Row> parse(std::string_view source, char delim) {
    // tolerate a UTF-8 byte order mark
    if (source.substr(0, 3) == "\xEF\xBB\xBF") source.remove_prefix(3);
    std::vector<Row> rows;
    Row row;
    std::string field;
    bool in_quotes = false;
    bool at_record_start = true;
    bool comment = false;
    bool field_was_quoted = false;
    bool record_has_content = false;

    auto end_field = [&] {
        row.push_back(field);
        field.clear();
        field_was_quoted = false;
        record_has_content = true;
    };
    auto end_record = [&] {
        if (!comment && (record_has_content || !field.empty() || !row.empty())) {
            end_field();
            rows.push_back(std::move(row));
        }
        row.clear();
        field.clear();
        comment = false;
        at_record_start = true;
        record_has_content = false;
        field_was_quoted = false;
    };

    for (std::size_t i = 0; i < source.size(); ++i) {
        char c = source[i];
        if (comment) {
            if (c == '\n') end_record();
            continue;
        }
        if (at_record_start && c == '#') {
            comment = true;
            continue;
        }
        at_record_start = false;
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < source.size() && source[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(c);
            }
            continue;
        }
        if (c == '"' && field.empty() && !field_was_quoted) {
            in_quotes = true;
            field_was_quoted = true;
        } else if (c == delim) {
            end_field();
        } else if (c == '\r') {
            // swallow; handled by the following '\n' (or end of input)
        } else if (c == '\n') {
            end_record();
        } else {
            field.push_back(c);
        }
    }
    if (!field.empty() || !row.empty() || field_was_quoted) end_record();
    return rows;
}

std::string escape_field(std::string_view field, char delim) {
    bool needs_quotes = !field.empty() && field.front() == '#';
    for (char c : field) {
        if (c == delim || c == '"' || c == '\n' || c == '\r') {
            needs_quotes = true;
            break;
        }
    }
    if (!needs_quotes) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out += '"';
    return out;
}

std::string format_row(const Row& row, char delim) {
    std::string out;
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) out.push_back(delim);
        out += escape_field(row[i], delim);
    }
    out.push_back('\n');
    return out;
}

}  // namespace miaudit::csv

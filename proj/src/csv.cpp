#include "circtz/csv.hpp"

#include "circtz/common.hpp"

#include <zlib.h>

#include <charconv>
#include <cmath>
#include <cstring>

namespace circtz::csv {

std::vector<std::string> split_line(std::string_view line) {
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
        } else if (c == '"') {
            in_quotes = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    fields.push_back(std::move(cur));
    return fields;
}

LineReader::LineReader(const std::filesystem::path& path) : buf_(1 << 16) {
    gzFile f = gzopen(path.string().c_str(), "rb");
    if (f == nullptr) {
        throw DataError("cannot open " + path.string());
    }
    gzbuffer(f, 1 << 17);
    handle_ = f;
}

LineReader::~LineReader() {
    if (handle_ != nullptr) {
        gzclose(static_cast<gzFile>(handle_));
    }
}

std::optional<std::string> LineReader::next() {
    auto* f = static_cast<gzFile>(handle_);
    std::string line;
    bool got_any = false;
    while (gzgets(f, buf_.data(), static_cast<int>(buf_.size())) != nullptr) {
        got_any = true;
        const std::size_t n = std::strlen(buf_.data());
        line.append(buf_.data(), n);
        if (n > 0 && buf_[n - 1] == '\n') {
            break;
        }
    }
    if (!got_any) {
        return std::nullopt;
    }
    while (!line.empty() && (line.back() == '\n' || line.back() == '\r')) {
        line.pop_back();
    }
    ++line_no_;
    return line;
}

std::optional<std::size_t> Table::find_column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) {
            return i;
        }
    }
    return std::nullopt;
}

std::size_t Table::column(std::string_view name, const std::filesystem::path& origin) const {
    if (auto idx = find_column(name)) {
        return *idx;
    }
    throw DataError(origin.string() + ": missing column '" + std::string(name) + "'");
}

Table read_table(const std::filesystem::path& path) {
    LineReader reader(path);
    Table table;
    bool have_header = false;
    while (auto line = reader.next()) {
        if (line->empty()) {
            continue;
        }
        auto fields = split_line(*line);
        if (!have_header) {
            table.header = std::move(fields);
            have_header = true;
            continue;
        }
        if (fields.size() != table.header.size()) {
            throw DataError(path.string() + ":" + std::to_string(reader.line_number()) + ": expected " +
                            std::to_string(table.header.size()) + " fields, got " +
                            std::to_string(fields.size()));
        }
        table.rows.push_back(std::move(fields));
        table.line_numbers.push_back(reader.line_number());
    }
    return table;
}

std::string format_double(double v) {
    if (std::isnan(v)) {
        return "NaN";
    }
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    if (v == 0.0) {
        return "0";
    }
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

std::int64_t parse_int(std::string_view field, std::string_view what) {
    std::int64_t value = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size()) {
        throw DataError("invalid integer for " + std::string(what) + ": '" + std::string(field) + "'");
    }
    return value;
}

double parse_double(std::string_view field, std::string_view what) {
    if (field == "NaN" || field == "nan") {
        return std::nan("");
    }
    double value = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size()) {
        throw DataError("invalid number for " + std::string(what) + ": '" + std::string(field) + "'");
    }
    return value;
}

std::string quote_if_needed(std::string_view field) {
    if (field.find_first_of(",\"\n") == std::string_view::npos) {
        return std::string(field);
    }
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') {
            out += "\"\"";
        } else {
            out.push_back(c);
        }
    }
    out += '"';
    return out;
}

Writer::Writer(const std::filesystem::path& path) : path_(path) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    out_.open(path, std::ios::binary | std::ios::trunc);
    if (!out_) {
        throw DataError("cannot write " + path.string());
    }
}

void Writer::row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i > 0) {
            out_ << ',';
        }
        out_ << quote_if_needed(fields[i]);
    }
    out_ << '\n';
}

void Writer::close() {
    out_.close();
    if (!out_) {
        throw DataError("failed writing " + path_.string());
    }
}

}  // namespace circtz::csv

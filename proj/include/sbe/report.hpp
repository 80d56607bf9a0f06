#pragma once

// CSV tables (header row, LF endings, doubles as %.17g) and the JSON-lines
// audit log with one {name, lhs, rhs, ok, se} record per check.

#include "json.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

namespace sbe {

inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

class CsvTable {
public:
    using Cell = std::variant<std::string, double, long long>;

    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

    void add(const std::vector<Cell>& cells) {
        std::vector<std::string> row;
        for (const auto& c : cells) {
            if (const auto* s = std::get_if<std::string>(&c)) row.push_back(quote(*s));
            else if (const auto* d = std::get_if<double>(&c)) row.push_back(format_double(*d));
            else row.push_back(std::to_string(std::get<long long>(c)));
        }
        rows_.push_back(std::move(row));
    }

    std::size_t size() const { return rows_.size(); }
    const std::vector<std::string>& header() const { return header_; }

    void write(std::ostream& os) const {
        line(os, header_);
        for (const auto& r : rows_) line(os, r);
    }

private:
    static std::string quote(const std::string& s) {
        if (s.find_first_of(",\"\n") == std::string::npos) return s;
        std::string out = "\"";
        for (char ch : s) {
            if (ch == '"') out += '"';
            out += ch;
        }
        return out + "\"";
    }

    static void line(std::ostream& os, const std::vector<std::string>& cells) {
        for (std::size_t k = 0; k < cells.size(); ++k) {
            if (k) os << ',';
            os << cells[k];
        }
        os << '\n';
    }

    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

struct CheckRecord {
    std::string name;
    double lhs = 0;
    double rhs = 0;
    bool ok = true;
    double se = 0;
};

inline nlohmann::json to_json(const CheckRecord& r) {
    auto num = [](double v) -> nlohmann::json {
        if (std::isfinite(v)) return v;
        return format_double(v);
    };
    nlohmann::json j;
    j["name"] = r.name;
    j["lhs"] = num(r.lhs);
    j["rhs"] = num(r.rhs);
    j["ok"] = r.ok;
    j["se"] = num(r.se);
    return j;
}

inline void write_jsonl(std::ostream& os, const std::vector<CheckRecord>& records) {
    for (const auto& r : records) os << to_json(r).dump() << '\n';
}

}  // namespace sbe

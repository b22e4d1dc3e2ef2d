#pragma once

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "msub/core.hpp"

namespace msub {

enum class Transform { log_return, square, raw };

inline const char* to_string(Transform t) {
    switch (t) {
        case Transform::log_return: return "log-return";
        case Transform::square: return "square";
        case Transform::raw: return "raw";
    }
    return "?";
}

inline Transform transform_from_string(std::string_view s) {
    for (Transform t : {Transform::log_return, Transform::square, Transform::raw})
        if (s == to_string(t)) return t;
    throw config_error("unknown transform '" + std::string(s) + "' (expected log-return, square or raw)");
}

struct ReturnSeries {
    std::vector<std::string> dates;
    std::vector<double> values;
    Transform transform = Transform::raw;
    std::string units;
    std::size_t count() const { return values.size(); }
};

inline std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace detail {
inline bool iso_date(std::string_view s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
    int y = 0;
    unsigned m = 0, d = 0;
    if (std::from_chars(s.data(), s.data() + 4, y).ptr != s.data() + 4) return false;
    if (std::from_chars(s.data() + 5, s.data() + 7, m).ptr != s.data() + 7) return false;
    if (std::from_chars(s.data() + 8, s.data() + 10, d).ptr != s.data() + 10) return false;
    return std::chrono::year_month_day{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}}.ok();
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    return s;
}

[[noreturn]] inline void fail(const std::string& source, std::size_t line, const std::string& what) {
    throw data_error(source + ":" + std::to_string(line) + ": " + what);
}
}  // namespace detail

/// Reads "date,value" rows and applies the transform. Dates must be ISO-8601 and strictly
/// increasing; log returns are dated at the later observation.
inline ReturnSeries ingest(std::istream& in, Transform transform, const std::string& source = "<input>") {
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(in, line)) detail::fail(source, 1, "empty file");
    ++lineno;
    {
        const auto h = detail::trim(line);
        const std::string_view header = h.substr(0, 3) == "\xEF\xBB\xBF" ? h.substr(3) : h;
        if (header != "date,value") detail::fail(source, lineno, "expected header 'date,value'");
    }
    std::vector<std::string> dates;
    std::vector<double> raw;
    std::vector<std::size_t> lines;
    while (std::getline(in, line)) {
        ++lineno;
        const auto row = detail::trim(line);
        if (row.empty()) continue;
        const auto comma = row.find(',');
        if (comma == std::string_view::npos || row.find(',', comma + 1) != std::string_view::npos)
            detail::fail(source, lineno, "expected two comma-separated fields");
        const auto date = detail::trim(row.substr(0, comma));
        const auto value = detail::trim(row.substr(comma + 1));
        if (!detail::iso_date(date)) detail::fail(source, lineno, "invalid ISO-8601 date '" + std::string(date) + "'");
        if (!dates.empty() && !(std::string(date) > dates.back()))
            detail::fail(source, lineno, "date " + std::string(date) + " is not after " + dates.back());
        double x = 0.0;
        const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), x);
        if (value.empty() || ec != std::errc() || ptr != value.data() + value.size() || !std::isfinite(x))
            detail::fail(source, lineno, "missing or invalid value '" + std::string(value) + "'");
        dates.emplace_back(date);
        raw.push_back(x);
        lines.push_back(lineno);
    }
    ReturnSeries s;
    s.transform = transform;
    switch (transform) {
        case Transform::raw:
            s.dates = std::move(dates);
            s.values = std::move(raw);
            s.units = "raw";
            break;
        case Transform::square:
            s.dates = std::move(dates);
            s.values.reserve(raw.size());
            for (double x : raw) s.values.push_back(x * x);
            s.units = "squared level";
            break;
        case Transform::log_return:
            for (std::size_t i = 0; i < raw.size(); ++i)
                if (!(raw[i] > 0.0)) detail::fail(source, lines[i], "nonpositive price in log-return mode");
            for (std::size_t i = 1; i < raw.size(); ++i) {
                s.dates.push_back(dates[i]);
                s.values.push_back(std::log(raw[i] / raw[i - 1]));
            }
            s.units = "log-return";
            break;
    }
    if (s.values.empty()) throw data_error(source + ": no observations after transform");
    return s;
}

inline ReturnSeries ingest(const std::string& path, Transform transform) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("cannot open " + path);
    return ingest(in, transform, path);
}

/// ISO dates counting forward in days from 2000-01-03, for synthetic series.
inline std::vector<std::string> synthetic_dates(std::size_t n) {
    using namespace std::chrono;
    std::vector<std::string> out;
    out.reserve(n);
    sys_days d{year_month_day{year{2000}, month{1}, day{3}}};
    for (std::size_t i = 0; i < n; ++i, d += days{1}) {
        const year_month_day ymd{d};
        char buf[16];
        std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                      static_cast<unsigned>(ymd.day()));
        out.emplace_back(buf);
    }
    return out;
}

inline void write_series(std::ostream& out, const std::vector<std::string>& dates, const std::vector<double>& values) {
    require(dates.size() == values.size(), "write_series: dates and values differ in length");
    out << "date,value\n";
    for (std::size_t i = 0; i < values.size(); ++i) out << dates[i] << ',' << format_double(values[i]) << '\n';
}

inline void write_series(const std::string& path, const std::vector<std::string>& dates, const std::vector<double>& values) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot write " + path);
    write_series(out, dates, values);
    if (!out) throw data_error("write failed for " + path);
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t h) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline std::string file_hash(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return hex64(fnv1a(ss.str()));
}

}  // namespace msub

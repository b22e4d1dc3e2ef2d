#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "msub/core.hpp"
#include "msub/diagnostics.hpp"

namespace msub {

using json = nlohmann::ordered_json;

struct MomentRow {
    std::string name;
    Moment model;
    double sample = nan;
};

struct MomentTable {
    std::vector<MomentRow> rows;
    std::vector<std::string> notes;
};

struct Report {
    int schema = 1;
    std::string version = msub::version;
    std::string command;
    std::string model;
    std::string status;
    std::string message;
    std::map<std::string, double> params;
    std::map<std::string, double> init;
    std::string init_source;
    int best_start = 0;
    int evaluations = 0;
    double objective = nan;
    double loglik = nan;
    std::size_t n = 0;
    std::string transform;
    std::vector<TestResult> diagnostics;
    MomentTable moments;
    std::string density_table;
    std::string input_hash;
    std::string config_hash;
    std::uint64_t seed = 0;
    std::string timestamp;
};

namespace detail {
inline json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }
inline double num(const json& j) { return j.is_null() ? nan : j.get<double>(); }

inline MomentStatus moment_status_from(const std::string& s) {
    if (s == "finite") return MomentStatus::finite;
    if (s == "numeric-only") return MomentStatus::numeric_only;
    if (s == "undefined") return MomentStatus::undefined;
    throw data_error("report: unknown moment status '" + s + "'");
}

inline json params_json(const std::map<std::string, double>& p) {
    json j = json::object();
    for (const auto& [k, v] : p) j[k] = num(v);
    return j;
}

inline std::map<std::string, double> params_from(const json& j) {
    std::map<std::string, double> p;
    for (const auto& [k, v] : j.items()) p[k] = num(v);
    return p;
}
}  // namespace detail

inline json moment_table_json(const MomentTable& t) {
    json rows = json::array();
    for (const auto& r : t.rows)
        rows.push_back({{"moment", r.name},
                        {"model", detail::num(r.model.value)},
                        {"status", to_string(r.model.status)},
                        {"sample", detail::num(r.sample)}});
    return {{"rows", rows}, {"notes", t.notes}};
}

inline MomentTable moment_table_from(const json& j) {
    MomentTable t;
    for (const auto& r : j.at("rows"))
        t.rows.push_back({r.at("moment").get<std::string>(),
                          Moment{detail::moment_status_from(r.at("status").get<std::string>()), detail::num(r.at("model"))},
                          detail::num(r.at("sample"))});
    t.notes = j.at("notes").get<std::vector<std::string>>();
    return t;
}

/// Everything except the timestamp; two runs with equal inputs produce equal payloads.
inline json report_payload(const Report& r) {
    json diags = json::array();
    for (const auto& d : r.diagnostics)
        diags.push_back({{"method", d.method}, {"statistic", detail::num(d.statistic)}, {"p_value", detail::num(d.p_value)}, {"n", d.n}});
    return {{"schema", r.schema},
            {"version", r.version},
            {"command", r.command},
            {"model", r.model},
            {"status", r.status},
            {"message", r.message},
            {"params", detail::params_json(r.params)},
            {"init", {{"source", r.init_source}, {"best_start", r.best_start}, {"params", detail::params_json(r.init)}}},
            {"evaluations", r.evaluations},
            {"objective", detail::num(r.objective)},
            {"loglik", detail::num(r.loglik)},
            {"data", {{"n", r.n}, {"transform", r.transform}}},
            {"diagnostics", diags},
            {"moments", moment_table_json(r.moments)},
            {"density_table", r.density_table},
            {"provenance", {{"input_hash", r.input_hash}, {"config_hash", r.config_hash}, {"seed", r.seed}, {"version", r.version}}}};
}

inline json to_json(const Report& r) {
    json j = report_payload(r);
    j["timestamp"] = r.timestamp;
    return j;
}

inline Report report_from_json(const json& j) {
    Report r;
    r.schema = j.at("schema").get<int>();
    if (r.schema != 1) throw data_error("report: unsupported schema " + std::to_string(r.schema));
    r.version = j.at("version").get<std::string>();
    r.command = j.at("command").get<std::string>();
    r.model = j.at("model").get<std::string>();
    r.status = j.at("status").get<std::string>();
    r.message = j.at("message").get<std::string>();
    r.params = detail::params_from(j.at("params"));
    r.init_source = j.at("init").at("source").get<std::string>();
    r.best_start = j.at("init").at("best_start").get<int>();
    r.init = detail::params_from(j.at("init").at("params"));
    r.evaluations = j.at("evaluations").get<int>();
    r.objective = detail::num(j.at("objective"));
    r.loglik = detail::num(j.at("loglik"));
    r.n = j.at("data").at("n").get<std::size_t>();
    r.transform = j.at("data").at("transform").get<std::string>();
    for (const auto& d : j.at("diagnostics"))
        r.diagnostics.push_back({detail::num(d.at("statistic")), detail::num(d.at("p_value")), d.at("n").get<std::size_t>(),
                                 d.at("method").get<std::string>()});
    r.moments = moment_table_from(j.at("moments"));
    r.density_table = j.at("density_table").get<std::string>();
    r.input_hash = j.at("provenance").at("input_hash").get<std::string>();
    r.config_hash = j.at("provenance").at("config_hash").get<std::string>();
    r.seed = j.at("provenance").at("seed").get<std::uint64_t>();
    r.timestamp = j.value("timestamp", "");
    return r;
}

inline std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline void write_report(const std::string& path, const Report& r) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot write " + path);
    out << to_json(r).dump(2) << '\n';
    if (!out) throw data_error("write failed for " + path);
}

inline Report read_report(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("cannot open " + path);
    try {
        return report_from_json(json::parse(in));
    } catch (const json::exception& e) {
        throw data_error(path + ": " + e.what());
    }
}

}  // namespace msub

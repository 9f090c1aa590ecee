#pragma once

// Run reports: convergence tables plus verdicts, emitted as stable-key-order
// JSON or CSV with identical numeric cells. The wall-time field is the only
// run-dependent cell; everything else is a pure function of config + seed.

#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "meandim/core.hpp"
#include "meandim/dimension.hpp"

namespace meandim {

struct Verdict {
    std::string name;
    std::optional<double> target;
    double achieved = 0;
    double deviation = 0;  // |achieved - target| when the target is known
};

struct Report {
    std::string subcommand;
    std::string tool_version{version};
    std::uint64_t config_hash = 0;
    std::uint64_t seed = 0;
    double wall_ms = 0;
    std::vector<std::pair<std::string, std::string>> notes;  // ordered metadata
    std::vector<ConvergenceTable> tables;
    std::vector<Verdict> verdicts;
};

namespace detail {

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace detail

inline nlohmann::ordered_json report_to_json(const Report& r, bool include_timing = true) {
    nlohmann::ordered_json j;
    j["tool"] = "meandim";
    j["version"] = r.tool_version;
    j["subcommand"] = r.subcommand;
    j["config_hash"] = r.config_hash;
    j["seed"] = r.seed;
    if (include_timing) j["wall_ms"] = r.wall_ms;
    if (!r.notes.empty()) {
        nlohmann::ordered_json notes;
        for (const auto& [k, v] : r.notes) notes[k] = v;
        j["notes"] = notes;
    }
    nlohmann::ordered_json tables = nlohmann::ordered_json::array();
    for (const ConvergenceTable& t : r.tables) {
        nlohmann::ordered_json jt;
        jt["estimator"] = t.estimator;
        if (t.target) {
            jt["target"] = *t.target;
            if (!t.target_note.empty()) jt["target_note"] = t.target_note;
        }
        nlohmann::ordered_json rows = nlohmann::ordered_json::array();
        for (const TableRow& row : t.rows) {
            nlohmann::ordered_json jr;
            jr["N"] = row.n;
            jr["M"] = row.m;
            jr["value"] = row.value;
            jr["exact"] = row.exact;
            rows.push_back(std::move(jr));
        }
        jt["rows"] = std::move(rows);
        tables.push_back(std::move(jt));
    }
    j["tables"] = std::move(tables);
    if (!r.verdicts.empty()) {
        nlohmann::ordered_json verdicts = nlohmann::ordered_json::array();
        for (const Verdict& v : r.verdicts) {
            nlohmann::ordered_json jv;
            jv["name"] = v.name;
            if (v.target) jv["target"] = *v.target;
            jv["achieved"] = v.achieved;
            if (v.target) jv["deviation"] = v.deviation;
            verdicts.push_back(std::move(jv));
        }
        j["verdicts"] = std::move(verdicts);
    }
    return j;
}

// CSV: header row, then one row per table cell, then one row per verdict.
inline std::string report_to_csv(const Report& r) {
    std::ostringstream os;
    os << "estimator,N,M,value,exact_flag,target\n";
    for (const ConvergenceTable& t : r.tables)
        for (const TableRow& row : t.rows) {
            os << t.estimator << ',' << row.n << ',' << row.m << ','
               << detail::format_double(row.value) << ',' << (row.exact ? 1 : 0) << ',';
            if (t.target) os << detail::format_double(*t.target);
            os << '\n';
        }
    for (const Verdict& v : r.verdicts) {
        os << "verdict:" << v.name << ",,," << detail::format_double(v.achieved) << ",1,";
        if (v.target) os << detail::format_double(*v.target);
        os << '\n';
    }
    return os.str();
}

inline std::string emit_report(const Report& r, const std::string& format,
                               bool include_timing = true) {
    if (format == "json") return report_to_json(r, include_timing).dump(2) + "\n";
    if (format == "csv") return report_to_csv(r);
    throw precondition_error("unknown output format '" + format + "' (expected csv or json)");
}

}  // namespace meandim

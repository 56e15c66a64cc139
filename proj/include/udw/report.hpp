#pragma once

// Machine-readable experiment reports. Check values carry exact rationals
// as decimal strings next to advisory float views. Wall-clock timings are
// kept in a separate section so that the canonical form of a report is a
// pure function of (config, seed); determinism checks and diffs operate on
// the canonical form.

#include <chrono>
#include <string>
#include <vector>

#include "udw/json_io.hpp"
#include "udw/rational.hpp"

namespace udw {

enum class Verdict { Pass, Fail, Report };

inline const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Pass: return "pass";
        case Verdict::Fail: return "fail";
        default: return "report";
    }
}

struct Check {
    std::string name;
    Verdict verdict = Verdict::Report;
    Json details = Json::object();
};

struct Report {
    std::string experiment;
    Json config = Json::object();
    std::vector<Check> checks;
    double wall_ms = 0.0;

    void pass(const std::string& name, Json details = Json::object()) {
        checks.push_back({name, Verdict::Pass, std::move(details)});
    }
    void fail(const std::string& name, Json details = Json::object()) {
        checks.push_back({name, Verdict::Fail, std::move(details)});
    }
    void note(const std::string& name, Json details = Json::object()) {
        checks.push_back({name, Verdict::Report, std::move(details)});
    }
    void check(bool ok, const std::string& name, Json details = Json::object()) {
        checks.push_back({name, ok ? Verdict::Pass : Verdict::Fail, std::move(details)});
    }

    std::size_t failures() const {
        std::size_t f = 0;
        for (const auto& c : checks)
            if (c.verdict == Verdict::Fail) ++f;
        return f;
    }
    bool ok() const { return failures() == 0; }
};

inline Json rat_json(const Rat& r) {
    Json j;
    j["exact"] = rat_to_string(r);
    j["float"] = to_double(r);
    return j;
}

// deterministic content: everything except timings
inline Json report_canonical_json(const Report& rep) {
    Json j;
    j["experiment"] = rep.experiment;
    j["config"] = rep.config;
    Json checks = Json::array();
    for (const auto& c : rep.checks) {
        Json cj;
        cj["name"] = c.name;
        cj["verdict"] = verdict_name(c.verdict);
        cj["details"] = c.details;
        checks.push_back(cj);
    }
    j["checks"] = checks;
    Json summary;
    summary["total"] = rep.checks.size();
    summary["failed"] = rep.failures();
    j["summary"] = summary;
    return j;
}

inline Json report_to_json(const Report& rep) {
    Json j = report_canonical_json(rep);
    j["timings_ms"] = Json::object({{"wall", rep.wall_ms}});
    return j;
}

inline std::string report_to_csv(const Report& rep) {
    std::string out = "check,verdict,details\n";
    for (const auto& c : rep.checks) {
        std::string d = c.details.dump();
        for (auto& ch : d)
            if (ch == ',') ch = ';';
        out += c.name + "," + verdict_name(c.verdict) + "," + d + "\n";
    }
    return out;
}

//--------------------------------------------------------------------------
// field-wise diff on canonical report content

inline void diff_json(const Json& a, const Json& b, const std::string& path,
                      std::vector<std::string>& out) {
    if (a == b) return;
    if (a.type() != b.type() || (!a.is_object() && !a.is_array())) {
        out.push_back(path + ": " + a.dump() + " != " + b.dump());
        return;
    }
    if (a.is_object()) {
        for (auto it = a.begin(); it != a.end(); ++it) {
            if (!b.contains(it.key()))
                out.push_back(path + "/" + it.key() + ": only in first");
            else
                diff_json(it.value(), b.at(it.key()), path + "/" + it.key(), out);
        }
        for (auto it = b.begin(); it != b.end(); ++it)
            if (!a.contains(it.key())) out.push_back(path + "/" + it.key() + ": only in second");
        return;
    }
    if (a.size() != b.size()) {
        out.push_back(path + ": array sizes " + std::to_string(a.size()) + " != " +
                      std::to_string(b.size()));
        return;
    }
    for (std::size_t i = 0; i < a.size(); ++i)
        diff_json(a[i], b[i], path + "/" + std::to_string(i), out);
}

inline std::vector<std::string> report_diff(const Json& a, const Json& b) {
    if (a.at("experiment") != b.at("experiment"))
        throw std::invalid_argument("report_diff: experiment names differ");
    Json ca = a, cb = b;
    ca.erase("timings_ms");
    cb.erase("timings_ms");
    std::vector<std::string> out;
    diff_json(ca, cb, "", out);
    return out;
}

class Stopwatch {
public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                         start_)
            .count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

}  // namespace udw

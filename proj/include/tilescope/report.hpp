#pragma once

// Ordered JSON report plumbing. Reports carry a schema tag, the rule identity
// with a content hash, and a result payload. Key order is insertion order and
// nothing time-dependent enters the payload unless explicitly requested, so
// identical inputs produce identical bytes.

#include <cstdio>
#include <string>

#include <json.hpp>

#include <tilescope/core.hpp>

namespace tilescope {

using Json = nlohmann::ordered_json;

namespace detail {

inline std::string hex16(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

}  // namespace detail

inline Json report_header(const std::string& command, const std::string& rule_name,
                          const std::string& rule_text) {
    Json j;
    j["schema"] = "tilescope-report/1";
    j["tool"] = Json{{"name", "tilescope"}, {"version", "0.1.0"}};
    j["rule"] = Json{{"name", rule_name},
                     {"content_fnv1a64", detail::hex16(fnv1a64(rule_text))}};
    j["command"] = command;
    j["params"] = Json::object();
    return j;
}

inline std::string report_text(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace tilescope

#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "flowlab/arcs.hpp"
#include "flowlab/tracer.hpp"

namespace flowlab {

// One verification record.  `anchor` is the stable identifier of the
// inequality or identity being checked (the report schema requires it to be
// non-empty so no record can go out unattributed).
struct CheckRecord {
    std::string name;
    std::string anchor;
    nlohmann::json inputs = nlohmann::json::object();
    double measured = 0.0;
    double bound = 0.0;
    bool pass = false;
};

struct Report {
    std::string tool_version;
    std::string schema_version = "1";
    nlohmann::json config = nlohmann::json::object();
    std::vector<CheckRecord> checks;

    bool all_pass() const;
    nlohmann::json to_json() const; // throws if any record lacks an anchor
};

extern const char* kToolVersion;

// Serialized form: sorted keys, LF line endings, shortest round-trip floats.
std::string dump_json(const nlohmann::json& j);
void write_json_file(const nlohmann::json& j, const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

// CSV with header "t,x1,x2,v1,v2,u"; events appended as '#' comment lines.
std::string csv_from_trajectory(const Trajectory& traj);

// Reads a tracer CSV back into a Curve (velocities become tangents).
Curve curve_from_csv_text(const std::string& text);
Curve curve_from_csv_file(const std::string& path);

} // namespace flowlab

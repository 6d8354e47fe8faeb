#include "flowlab/report.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "flowlab/expr.hpp"

namespace flowlab {

const char* kToolVersion = "0.1.0";

bool Report::all_pass() const {
    for (const auto& c : checks)
        if (!c.pass) return false;
    return true;
}

nlohmann::json Report::to_json() const {
    nlohmann::json j;
    j["schema_version"] = schema_version;
    j["tool_version"] = tool_version.empty() ? kToolVersion : tool_version;
    j["config"] = config;
    j["all_pass"] = all_pass();
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& c : checks) {
        if (c.anchor.empty())
            throw std::logic_error("check record '" + c.name + "' has no anchor");
        nlohmann::json rec;
        rec["name"] = c.name;
        rec["anchor"] = c.anchor;
        rec["inputs"] = c.inputs;
        rec["measured"] = c.measured;
        rec["bound"] = c.bound;
        rec["pass"] = c.pass;
        arr.push_back(rec);
    }
    j["checks"] = arr;
    return j;
}

std::string dump_json(const nlohmann::json& j) {
    return j.dump(2) + "\n";
}

void write_json_file(const nlohmann::json& j, const std::string& path) {
    write_text_file(path, dump_json(j));
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary); // binary keeps LF endings everywhere
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << content;
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

std::string csv_from_trajectory(const Trajectory& traj) {
    std::ostringstream os;
    os << "t,x1,x2,v1,v2,u\n";
    for (const auto& s : traj.samples) {
        os << format_double(s.t) << ',' << format_double(s.x.x) << ',' << format_double(s.x.y)
           << ',' << format_double(s.velocity.x) << ',' << format_double(s.velocity.y) << ','
           << format_double(s.u) << '\n';
    }
    for (const auto& e : traj.events) {
        const char* kind = "event";
        switch (e.kind) {
            case EventKind::BoxExit: kind = "box_exit"; break;
            case EventKind::BallExit: kind = "ball_exit"; break;
            case EventKind::LevelHit: kind = "level_hit"; break;
            case EventKind::ArclengthReached: kind = "arclength_reached"; break;
            case EventKind::Stagnation: kind = "stagnation"; break;
            case EventKind::StepUnderflow: kind = "step_underflow"; break;
        }
        os << "# event: " << kind << " t=" << format_double(e.t) << " x=("
           << format_double(e.at.x) << "," << format_double(e.at.y) << ")\n";
    }
    return os.str();
}

Curve curve_from_csv_text(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::vector<double> ts;
    std::vector<Vec2> pts, tangents;
    bool header_seen = false;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line.front() == '#') continue;
        if (!header_seen) {
            header_seen = true; // "t,x1,x2,v1,v2,u"
            continue;
        }
        std::istringstream row(line);
        std::string cell;
        std::vector<double> vals;
        while (std::getline(row, cell, ',')) {
            try {
                vals.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw std::runtime_error("csv line " + std::to_string(lineno) +
                                         ": bad number '" + cell + "'");
            }
        }
        if (vals.size() < 5)
            throw std::runtime_error("csv line " + std::to_string(lineno) +
                                     ": expected t,x1,x2,v1,v2[,u]");
        ts.push_back(vals[0]);
        pts.push_back({vals[1], vals[2]});
        tangents.push_back({vals[3], vals[4]});
    }
    Curve c = Curve::from_points(std::move(ts), std::move(pts));
    c.tangents = std::move(tangents);
    c.validate();
    return c;
}

Curve curve_from_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open curve file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return curve_from_csv_text(ss.str());
}

} // namespace flowlab

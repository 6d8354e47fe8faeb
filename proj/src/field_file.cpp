#include "flowlab/field_file.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

namespace flowlab {

namespace {

struct Entry {
    std::string value;
    int line = 0;
    bool quoted = false;
};

using Sections = std::map<std::string, std::map<std::string, Entry>>;

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

Sections parse_sections(const std::string& text, const std::string& file) {
    Sections out;
    std::string section; // "" = top level
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        // strip comments outside quotes
        std::string line;
        bool quoted = false;
        for (char ch : raw) {
            if (ch == '"') quoted = !quoted;
            if (ch == '#' && !quoted) break;
            line.push_back(ch);
        }
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw FieldFileError(file, lineno, "unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw FieldFileError(file, lineno, "expected key = value");
        const std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw FieldFileError(file, lineno, "empty key");
        Entry entry;
        entry.line = lineno;
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
            entry.quoted = true;
            value = value.substr(1, value.size() - 2);
        }
        entry.value = value;
        out[section][key] = entry;
    }
    return out;
}

double parse_number(const Entry& e, const std::string& file) {
    const std::string& s = e.value;
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw FieldFileError(file, e.line, "expected a number, got '" + s + "'");
    return v;
}

} // namespace

BuiltinField parse_field_text(const std::string& text, const std::string& file) {
    const Sections sections = parse_sections(text, file);

    auto section = [&](const std::string& name) -> const std::map<std::string, Entry>* {
        auto it = sections.find(name);
        return it == sections.end() ? nullptr : &it->second;
    };
    auto lookup = [&](const std::string& sec,
                      const std::string& key) -> const Entry* {
        const auto* s = section(sec);
        if (!s) return nullptr;
        auto it = s->find(key);
        return it == s->end() ? nullptr : &it->second;
    };

    const auto* domain = section("domain");
    if (!domain) throw FieldFileError(file, 1, "missing [domain] section");
    Box box;
    for (const auto& [key, target] :
         {std::pair<const char*, double*>{"xmin", &box.xmin}, {"xmax", &box.xmax},
          {"ymin", &box.ymin}, {"ymax", &box.ymax}}) {
        auto it = domain->find(key);
        if (it == domain->end())
            throw FieldFileError(file, 1, std::string("missing domain key '") + key + "'");
        *target = parse_number(it->second, file);
    }
    if (!(box.xmin < box.xmax && box.ymin < box.ymax))
        throw FieldFileError(file, 1, "domain box must have positive extent");

    ParamEnv env;
    if (const auto* params = section("params"))
        for (const auto& [key, entry] : *params) env.set(key, parse_number(entry, file));

    std::string name = "field";
    if (const Entry* e = lookup("", "name")) name = e->value;

    if (const Entry* bi = lookup("", "builtin")) {
        std::string profile;
        double angle = 0.0;
        if (const Entry* p = lookup("shear", "profile")) profile = p->value;
        if (const Entry* a = lookup("shear", "angle")) angle = parse_number(*a, file);
        try {
            BuiltinField out = builtin(bi->value, env, box, profile, angle);
            out.field.name = name;
            return out;
        } catch (const std::exception& ex) {
            throw FieldFileError(file, bi->line, ex.what());
        }
    }

    const auto* fs = section("field");
    if (!fs) throw FieldFileError(file, 1, "need either 'builtin = ...' or a [field] section");

    auto parse_expr_entry = [&](const Entry& e) {
        try {
            return parse(e.value);
        } catch (const ParseError& pe) {
            throw FieldFileError(file, e.line, pe.what());
        }
    };

    BuiltinField out;
    out.field.env = env;
    out.field.name = name;
    out.field.domain_box = box;

    const auto it_stream = fs->find("stream");
    const auto it_v1 = fs->find("v1");
    const auto it_v2 = fs->find("v2");
    if (it_v1 != fs->end() && it_v2 != fs->end()) {
        out.field.v1 = parse_expr_entry(it_v1->second);
        out.field.v2 = parse_expr_entry(it_v2->second);
        if (it_stream != fs->end()) {
            const Expr u = parse_expr_entry(it_stream->second);
            out.stream = StreamFunction::symbolic(u, out.field);
        } else {
            out.stream = StreamFunction::quadrature(out.field);
        }
    } else if (it_stream != fs->end()) {
        const Expr u = parse_expr_entry(it_stream->second);
        out.field.v1 = simplify(-differentiate(u, Var::X2));
        out.field.v2 = simplify(differentiate(u, Var::X1));
        out.stream = StreamFunction::symbolic(u, out.field);
    } else {
        throw FieldFileError(file, 1, "[field] needs v1 and v2, or a stream expression");
    }
    if (auto it = fs->find("pressure"); it != fs->end())
        out.pressure.p = parse_expr_entry(it->second);

    // reject unbound parameters before any computation starts
    try {
        (void)out.field.velocity(box.center());
    } catch (const std::exception& ex) {
        throw FieldFileError(file, 1, ex.what());
    }
    return out;
}

BuiltinField load_field_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open field file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_field_text(ss.str(), path);
}

} // namespace flowlab

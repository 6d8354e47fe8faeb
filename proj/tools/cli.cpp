#include "cli.hpp"

#include <cmath>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "flowlab/arcs.hpp"
#include "flowlab/argument.hpp"
#include "flowlab/constants.hpp"
#include "flowlab/field.hpp"
#include "flowlab/field_file.hpp"
#include "flowlab/lemma_lab.hpp"
#include "flowlab/report.hpp"
#include "flowlab/rng.hpp"
#include "flowlab/tracer.hpp"

namespace flowlab {

namespace {

using nlohmann::json;

// ---------------------------------------------------------------------------
// small helpers
// ---------------------------------------------------------------------------

Vec2 parse_vec2(const std::string& s) {
    const auto comma = s.find(',');
    if (comma == std::string::npos)
        throw CLI::ValidationError("expected 'x,y', got '" + s + "'");
    return {std::stod(s.substr(0, comma)), std::stod(s.substr(comma + 1))};
}

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    std::istringstream in(s);
    std::string cell;
    while (std::getline(in, cell, ',')) out.push_back(std::stod(cell));
    if (out.empty()) throw CLI::ValidationError("empty list");
    return out;
}

void emit(const json& j, const std::string& out_path) {
    if (out_path.empty())
        std::cout << dump_json(j);
    else
        write_json_file(j, out_path);
}

json to_json(const FieldBounds& b) {
    return json{{"eta_lo", b.eta_lo},
                {"eta_hi", b.eta_hi},
                {"eta", b.eta()},
                {"grid_spacing", b.grid_spacing},
                {"admissible", b.admissible},
                {"min_at", {b.min_at.x, b.min_at.y}},
                {"max_at", {b.max_at.x, b.max_at.y}}};
}

json to_json(const OscillationResult& o) {
    return json{{"center", {o.center.x, o.center.y}},
                {"radius", o.radius},
                {"grid", o.n},
                {"grid_spacing", o.grid_spacing},
                {"osc", o.osc},
                {"min_at", {o.min_at.x, o.min_at.y}},
                {"max_at", {o.max_at.x, o.max_at.y}},
                {"stable", o.stable},
                {"refinement_delta", o.refinement_delta}};
}

json to_json(const ArcCensus& c) {
    json intervals = json::array();
    for (const auto& iv : c.intervals) {
        intervals.push_back(json{{"index", iv.index},
                                 {"t_begin", iv.t_begin},
                                 {"t_end", iv.t_end},
                                 {"class", arc_class_name(iv.cls)}});
    }
    return json{{"n_left", c.n_left},
                {"n_right", c.n_right},
                {"n_double", c.n_double},
                {"n_middle", c.n_middle},
                {"n_exterior", c.n_exterior},
                {"theta_delta", c.theta_delta},
                {"bound_value", c.bound_value},
                {"bound_holds", c.bound_holds},
                {"intervals", intervals}};
}

json to_json(const ConstantsReport& r) {
    return json{{"eta", r.eta},
                {"omega", r.omega},
                {"c1", r.c1},
                {"c1_argmax", r.c1_argmax},
                {"c1_tail_limit", r.c1_tail_limit},
                {"c2", r.c2},
                {"c2_sup_h2", r.c2_sup_h2},
                {"c2_argmax", r.c2_argmax},
                {"c2_tail_limit", r.c2_tail_limit},
                {"c2_floor", r.c2_floor},
                {"c_eta", r.c_eta},
                {"c_eta_argmax", r.c_eta_argmax},
                {"bracket_rel_accuracy", r.bracket_rel_accuracy}};
}

json to_json(const GrowthCheck& g) {
    return json{{"radius", g.radius},
                {"measured_osc", g.measured_osc},
                {"bound", g.bound},
                {"bound_holds", g.bound_holds},
                {"hypothesis_ok", g.hypothesis_ok},
                {"hypothesis_worst_osc", g.hypothesis_worst_osc},
                {"hypothesis_fail_at", {g.hypothesis_fail_at.x, g.hypothesis_fail_at.y}},
                {"claimed", g.claimed},
                {"grid", g.grid_n}};
}

json to_json(const ShearVerdict& v) {
    json j;
    switch (v.kind) {
        case ShearVerdictKind::Shear: j["verdict"] = "shear"; break;
        case ShearVerdictKind::NonShear: j["verdict"] = "non-shear"; break;
        case ShearVerdictKind::HypothesisViolated: j["verdict"] = "hypothesis-violated"; break;
    }
    j["osc"] = v.osc;
    j["bounds"] = to_json(v.bounds);
    j["boundedness_suspect"] = v.boundedness_suspect;
    if (!v.reason.empty()) j["reason"] = v.reason;
    if (!v.notes.empty()) j["notes"] = v.notes;
    if (v.kind == ShearVerdictKind::Shear) {
        j["direction_angle"] = v.direction_angle;
        j["e"] = {v.e.x, v.e.y};
        j["profile_constant_sign"] = v.profile_constant_sign;
        j["profile_min_abs"] = v.profile_min_abs;
        json prof = json::array();
        for (const auto& [s, V] : v.profile) prof.push_back(json::array({s, V}));
        j["profile"] = prof;
    }
    return j;
}

// symbolic stream-gradient consistency: max |grad u - (v2, -v1)| on a grid
double stream_consistency(const BuiltinField& bf, int n) {
    if (!bf.stream.is_symbolic()) return 0.0;
    const Expr du1 = differentiate(bf.stream.expr(), Var::X1);
    const Expr du2 = differentiate(bf.stream.expr(), Var::X2);
    const Box& box = bf.field.domain_box;
    double worst = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const Vec2 p{box.xmin + box.width() * i / (n - 1),
                         box.ymin + box.height() * j / (n - 1)};
            const Vec2 g{eval(du1, p, bf.field.env), eval(du2, p, bf.field.env)};
            const Vec2 v = bf.field.velocity(p);
            worst = std::max(worst, norm(g - Vec2{v.y, -v.x}));
        }
    return worst;
}

double divergence_max(const VectorField& f, int n) {
    const Expr div = divergence(f);
    const Box& box = f.domain_box;
    double worst = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const Vec2 p{box.xmin + box.width() * i / (n - 1),
                         box.ymin + box.height() * j / (n - 1)};
            worst = std::max(worst, std::fabs(eval(div, p, f.env)));
        }
    return worst;
}

Vec2 random_point(Rng& rng, const Box& box) {
    return {rng.uniform(box.xmin, box.xmax), rng.uniform(box.ymin, box.ymax)};
}

// ---------------------------------------------------------------------------
// verify suites
// ---------------------------------------------------------------------------

struct SuiteContext {
    BuiltinField bf;
    double eta = 0.0;
    std::uint64_t seed = 42;
    bool quiet = false;

    void progress(const std::string& msg) const {
        if (!quiet) std::cerr << "[flowlab] " << msg << "\n";
    }
};

void suite_elliptic(SuiteContext& ctx, Report& report) {
    ctx.progress("suite elliptic: reconstructing f along the base gradient orbit");
    IntegratorConfig cfg;
    cfg.t_begin = -40.0;
    cfg.t_end = 40.0;
    const ReconstructedF rf = reconstruct_f(ctx.bf.field, ctx.bf.stream, cfg);

    Rng rng(ctx.seed ^ 0x5eedULL);
    std::vector<Vec2> pts;
    const Box inner = ctx.bf.field.domain_box.scaled(0.75);
    for (int i = 0; i < 1000; ++i) pts.push_back(random_point(rng, inner));
    const SemilinearCheck check = verify_semilinear(ctx.bf.field, ctx.bf.stream, rf, pts);

    CheckRecord rec;
    rec.name = "semilinear residual max |lap(u) + f(u)|";
    rec.anchor = "semilinear-equation";
    rec.inputs = json{{"points", pts.size()},
                      {"evaluated", check.evaluated},
                      {"skipped", check.skipped},
                      {"s_range", {rf.s_min(), rf.s_max()}},
                      {"s_range_small", rf.range_small}};
    rec.measured = check.max_residual;
    rec.bound = 1e-5;
    rec.pass = check.max_residual <= rec.bound && check.evaluated > 0;
    report.checks.push_back(rec);
}

void suite_patterns(SuiteContext& ctx, Report& report) {
    ctx.progress("suite patterns: scanning traced orbits for forbidden quadruples");
    Rng rng(ctx.seed ^ 0x9a77eULL);
    const Box inner = ctx.bf.field.domain_box.scaled(0.6);
    IntegratorConfig cfg;
    cfg.t_begin = -8.0;
    cfg.t_end = 8.0;
    cfg.clip_box = ctx.bf.field.domain_box.scaled(2.0);

    long grad_viol = 0, grad_quads = 0, line_viol = 0, line_quads = 0;
    const int orbits = 50;
    for (int i = 0; i < orbits; ++i) {
        const Vec2 seed_pt = random_point(rng, inner);
        const Trajectory sigma = trace_gradient(ctx.bf.field, ctx.bf.stream, seed_pt, cfg);
        const PatternScanReport rg = scan_oneleft(ctx.bf.field, sigma, ctx.eta, 200);
        grad_viol += static_cast<long>(rg.violations.size());
        grad_quads += rg.quadruples_scanned;
        const Trajectory gamma = trace_streamline(ctx.bf.field, ctx.bf.stream, seed_pt, cfg);
        const PatternScanReport rl = scan_oneleftbis(ctx.bf.field, gamma, ctx.eta, 200);
        line_viol += static_cast<long>(rl.violations.size());
        line_quads += rl.quadruples_scanned;
    }

    CheckRecord rec;
    rec.name = "gradient-orbit pattern violations";
    rec.anchor = "gradient-pattern-exclusion";
    rec.inputs = json{{"orbits", orbits}, {"quadruples", grad_quads}, {"threshold_eta4",
                      std::pow(ctx.eta, 4.0)}};
    rec.measured = static_cast<double>(grad_viol);
    rec.bound = 0.0;
    rec.pass = grad_viol == 0;
    report.checks.push_back(rec);

    CheckRecord rec2;
    rec2.name = "streamline pattern violations";
    rec2.anchor = "streamline-pattern-exclusion";
    rec2.inputs = json{{"orbits", orbits}, {"quadruples", line_quads},
                       {"threshold_eta2_4", 0.25 * ctx.eta * ctx.eta}};
    rec2.measured = static_cast<double>(line_viol);
    rec2.bound = 0.0;
    rec2.pass = line_viol == 0;
    report.checks.push_back(rec2);
}

void suite_foliation(SuiteContext& ctx, Report& report) {
    ctx.progress("suite foliation: probing the streamline cover");
    Rng rng(ctx.seed ^ 0xf01abULL);
    const Box inner = ctx.bf.field.domain_box;
    std::vector<Vec2> samples;
    for (int i = 0; i < 100; ++i) samples.push_back(random_point(rng, inner));

    IntegratorConfig sigma_cfg;
    sigma_cfg.t_begin = -80.0;
    sigma_cfg.t_end = 80.0;
    sigma_cfg.clip_box = ctx.bf.field.domain_box.scaled(4.0);
    IntegratorConfig gamma_cfg = sigma_cfg;
    gamma_cfg.max_step = 0.05;

    const auto probes = foliation_probe(ctx.bf.field, ctx.bf.stream, samples, sigma_cfg,
                                        gamma_cfg);
    double worst = 0.0;
    int reached = 0;
    for (const auto& p : probes) {
        if (!p.reached) continue;
        ++reached;
        worst = std::max(worst, p.min_distance);
    }
    CheckRecord rec;
    rec.name = "foliation probe max distance to matching streamline";
    rec.anchor = "streamline-foliation";
    rec.inputs = json{{"samples", samples.size()}, {"reached", reached}};
    rec.measured = worst;
    rec.bound = 1e-4;
    rec.pass = reached > 0 && worst <= rec.bound;
    report.checks.push_back(rec);
}

void suite_constants(SuiteContext& ctx, Report& report) {
    ctx.progress("suite constants: evaluating the explicit constants");
    const ConstantsReport c = constants(ctx.eta);
    const double eta = ctx.eta;

    CheckRecord r1;
    r1.name = "c1 supremum dominates its tail limit and floor";
    r1.anchor = "constant-c1-bounds";
    r1.inputs = json{{"eta", eta}, {"argmax", c.c1_argmax}};
    r1.measured = c.c1;
    r1.bound = c.c1_tail_limit;
    r1.pass = c.c1 >= c.c1_tail_limit && c.c1 > 96.0 * M_PI / (eta * eta);
    report.checks.push_back(r1);

    CheckRecord r2;
    r2.name = "c2 dominates both floors";
    r2.anchor = "constant-c2-bounds";
    r2.inputs = json{{"eta", eta}, {"tail_limit", c.c2_tail_limit}, {"floor", c.c2_floor}};
    r2.measured = c.c2;
    r2.bound = std::max(c.c2_tail_limit, c.c2_floor);
    r2.pass = c.c2 >= r2.bound;
    report.checks.push_back(r2);

    const PartitionParams p = partition_params(1.0, eta);
    CheckRecord r3;
    r3.name = "partition tails beat the pattern thresholds (d=1)";
    r3.anchor = "partition-integers";
    r3.inputs = json{{"m_dyadic", p.m_dyadic},
                     {"m_geometric", p.m_geometric},
                     {"n_cap", p.n_cap},
                     {"dyadic_tail", p.dyadic_tail},
                     {"geometric_tail", p.geometric_tail}};
    r3.measured = p.dyadic_tail;
    r3.bound = std::pow(eta, 4.0);
    r3.pass = p.dyadic_tail_ok && p.geometric_tail_ok && p.n_cap >= 3;
    report.checks.push_back(r3);
}

void suite_log_growth(SuiteContext& ctx, Report& report, const std::vector<double>& radii) {
    ctx.progress("suite log-growth: oscillation vs c_eta ln R");
    const auto checks = check_log_growth(ctx.bf.field, radii, ctx.eta);
    for (const auto& g : checks) {
        CheckRecord rec;
        std::ostringstream name;
        name << "argument oscillation over B(0," << g.radius << ")";
        rec.name = name.str();
        rec.anchor = "log-growth-bound";
        rec.inputs = json{{"radius", g.radius},
                          {"hypothesis_ok", g.hypothesis_ok},
                          {"hypothesis_worst_osc", g.hypothesis_worst_osc},
                          {"claimed", g.claimed},
                          {"grid", g.grid_n}};
        rec.measured = g.measured_osc;
        rec.bound = g.bound;
        rec.pass = g.bound_holds;
        report.checks.push_back(rec);
    }
}

// ---------------------------------------------------------------------------
// demo fixtures (the worked examples shipped with the tool)
// ---------------------------------------------------------------------------

constexpr const char* kCellularToml = R"cfg(name = "cellular"
builtin = "cellular"

[params]
alpha = 1.0
beta = 1.0

[domain]
xmin = -2
xmax = 2
ymin = -2
ymax = 2
)cfg";

constexpr const char* kCoshToml = R"cfg(name = "cosh"
builtin = "cosh"

[domain]
xmin = -2
xmax = 2
ymin = -2
ymax = 2
)cfg";

constexpr const char* kShearToml = R"cfg(name = "shear"
builtin = "shear"

[shear]
profile = "2+sin(x2)"
angle = 0.0

[domain]
xmin = -2
xmax = 2
ymin = -2
ymax = 2
)cfg";

void demo_fixture_records(const std::string& name, const std::string& toml,
                          ShearVerdictKind expected, Rng& rng, Report& report, bool quiet) {
    if (!quiet) std::cerr << "[flowlab] demo fixture: " << name << "\n";
    BuiltinField bf = parse_field_text(toml, name);
    const Box& box = bf.field.domain_box;

    CheckRecord residual;
    residual.name = name + ": steady Euler residual";
    residual.anchor = "euler-residual";
    residual.measured = euler_residual(bf.field, bf.pressure, box, 41);
    residual.bound = 1e-10;
    residual.pass = residual.measured <= residual.bound;
    residual.inputs = json{{"grid", 41}};
    report.checks.push_back(residual);

    CheckRecord stream_rec;
    stream_rec.name = name + ": stream-function gradient identity";
    stream_rec.anchor = "stream-gradient-identity";
    stream_rec.measured = stream_consistency(bf, 41);
    stream_rec.bound = 1e-10;
    stream_rec.pass = stream_rec.measured <= stream_rec.bound;
    stream_rec.inputs = json{{"grid", 41}};
    report.checks.push_back(stream_rec);

    // quadrature route vs the symbolic stream function
    if (bf.stream.is_symbolic()) {
        StreamFunction quad = StreamFunction::quadrature(bf.field);
        double worst = 0.0;
        for (int i = 0; i < 100; ++i) {
            const Vec2 p = random_point(rng, box);
            worst = std::max(worst, std::fabs(quad(p) - bf.stream(p)));
        }
        CheckRecord q;
        q.name = name + ": quadrature vs symbolic stream function";
        q.anchor = "stream-quadrature-agreement";
        q.measured = worst;
        q.bound = 1e-8;
        q.pass = worst <= q.bound;
        q.inputs = json{{"points", 100}};
        report.checks.push_back(q);
    }

    const ShearVerdict verdict = detect_shear(bf.field, box);
    CheckRecord v;
    v.name = name + ": shear rigidity verdict";
    v.anchor = "shear-rigidity";
    v.inputs = to_json(verdict);
    v.measured = verdict.osc;
    v.bound = 1e-6;
    v.pass = verdict.kind == expected;
    report.checks.push_back(v);

    if (name == "cosh") {
        IntegratorConfig cfg;
        cfg.t_begin = -8.0;
        cfg.t_end = 8.0;
        const ReconstructedF rf = reconstruct_f(bf.field, bf.stream, cfg);
        double worst = 0.0;
        for (std::size_t i = 0; i < rf.s.size(); ++i)
            worst = std::max(worst, std::fabs(rf.f[i] + rf.s[i]));
        CheckRecord r;
        r.name = "cosh: reconstructed f(s) equals -s";
        r.anchor = "semilinear-equation";
        r.measured = worst;
        r.bound = 1e-6;
        r.pass = worst <= r.bound;
        r.inputs = json{{"table_size", rf.s.size()}, {"s_range", {rf.s_min(), rf.s_max()}}};
        report.checks.push_back(r);
    }
}

int run_demo(std::uint64_t seed, const std::string& out_path, bool quiet) {
    Report report;
    report.config = json{{"command", "demo"}, {"seed", seed}};
    Rng rng(seed);
    demo_fixture_records("cellular", kCellularToml, ShearVerdictKind::HypothesisViolated, rng,
                         report, quiet);
    demo_fixture_records("cosh", kCoshToml, ShearVerdictKind::NonShear, rng, report, quiet);
    demo_fixture_records("shear", kShearToml, ShearVerdictKind::Shear, rng, report, quiet);

    const ConstantsReport c = constants(1.0);
    CheckRecord rec;
    rec.name = "constants at eta = 1";
    rec.anchor = "constant-c1-bounds";
    rec.measured = c.c1;
    rec.bound = 288.0 * M_PI / std::log(2.0);
    rec.pass = c.c1 >= rec.bound && c.c2 >= c.c2_floor;
    rec.inputs = to_json(c);
    report.checks.push_back(rec);

    emit(report.to_json(), out_path);
    if (!quiet) std::cerr << "[flowlab] demo " << (report.all_pass() ? "passed" : "FAILED")
                          << "\n";
    return report.all_pass() ? 0 : 1;
}

} // namespace

// ---------------------------------------------------------------------------
// command wiring
// ---------------------------------------------------------------------------

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"flowlab: planar steady Euler flow geometry lab"};
    app.require_subcommand(1);
    app.fallthrough(); // global flags may follow the subcommand
    bool quiet = false;
    app.add_flag("--quiet", quiet, "suppress progress output");

    // --- field check ---
    auto* field_cmd = app.add_subcommand("field", "field file utilities");
    auto* check_cmd = field_cmd->add_subcommand("check", "validate a field definition");
    std::string check_file;
    check_cmd->add_option("file", check_file, "field definition file")->required();
    std::string check_out;
    check_cmd->add_option("--out", check_out, "output path (stdout by default)");

    // --- trace ---
    auto* trace_cmd = app.add_subcommand("trace", "integrate an orbit and emit CSV");
    std::string trace_field, trace_kind = "streamline", trace_from = "0,0",
                trace_tspan = "0,10", trace_out;
    double trace_rel = 1e-9, trace_abs = 1e-11, trace_maxstep = 0.25;
    std::string trace_stop_ball, trace_stop_level, trace_stop_length;
    trace_cmd->add_option("--field", trace_field, "field definition file")->required();
    trace_cmd->add_option("--kind", trace_kind,
                          "streamline|gradient|streamline-arclength|gradient-arclength");
    trace_cmd->add_option("--from", trace_from, "start point x,y");
    trace_cmd->add_option("--tspan", trace_tspan, "t range a,b (a <= 0 <= b)");
    trace_cmd->add_option("--rel-tol", trace_rel, "relative tolerance");
    trace_cmd->add_option("--abs-tol", trace_abs, "absolute tolerance");
    trace_cmd->add_option("--max-step", trace_maxstep, "max step size");
    trace_cmd->add_option("--stop-ball", trace_stop_ball, "stop on exiting cx,cy,r");
    trace_cmd->add_option("--stop-level", trace_stop_level, "stop when u reaches level");
    trace_cmd->add_option("--stop-length", trace_stop_length, "stop at arc length L");
    trace_cmd->add_option("--out", trace_out, "CSV path (stdout by default)");

    // --- osc ---
    auto* osc_cmd = app.add_subcommand("osc", "argument oscillation over a ball");
    std::string osc_field, osc_center = "0,0", osc_out;
    double osc_radius = 1.0;
    int osc_grid = 201;
    osc_cmd->add_option("--field", osc_field)->required();
    osc_cmd->add_option("--center", osc_center, "ball center x,y");
    osc_cmd->add_option("--radius", osc_radius, "ball radius");
    osc_cmd->add_option("--grid", osc_grid, "grid points per side");
    osc_cmd->add_option("--out", osc_out);

    // --- arcs ---
    auto* arcs_cmd = app.add_subcommand("arcs", "arc census of a traced curve");
    std::string arcs_curve, arcs_out;
    double arcs_a = 0.0, arcs_b = 0.0;
    arcs_cmd->add_option("--curve", arcs_curve, "tracer CSV file")->required();
    arcs_cmd->add_option("--a", arcs_a, "window start parameter")->required();
    arcs_cmd->add_option("--b", arcs_b, "window end parameter")->required();
    arcs_cmd->add_option("--out", arcs_out);

    // --- growth ---
    auto* growth_cmd = app.add_subcommand("growth", "log-growth oscillation checks");
    std::string growth_field, growth_radii = "2,4,8", growth_out;
    double growth_eta = 0.0;
    growth_cmd->add_option("--field", growth_field)->required();
    growth_cmd->add_option("--radii", growth_radii, "comma-separated radii (each >= 2)");
    growth_cmd->add_option("--eta", growth_eta, "admissibility constant (0 = estimate)");
    growth_cmd->add_option("--out", growth_out);

    // --- constants ---
    auto* const_cmd = app.add_subcommand("constants", "explicit constants for a given eta");
    double const_eta = 1.0, const_d = 1.0;
    std::string const_out;
    const_cmd->add_option("--eta", const_eta, "eta in (0,1]");
    const_cmd->add_option("--d", const_d, "endpoint gap for the partition integers");
    const_cmd->add_option("--out", const_out);

    // --- verify ---
    auto* verify_cmd = app.add_subcommand("verify", "run verification suites");
    std::string verify_field, verify_suite = "all", verify_out, verify_radii = "2,4,8";
    double verify_eta = 0.0;
    std::uint64_t verify_seed = 42;
    verify_cmd->add_option("--field", verify_field)->required();
    verify_cmd->add_option("--suite", verify_suite,
                           "all|elliptic|patterns|foliation|constants|log-growth");
    verify_cmd->add_option("--eta", verify_eta, "admissibility constant (0 = estimate)");
    verify_cmd->add_option("--seed", verify_seed, "rng seed");
    verify_cmd->add_option("--radii", verify_radii, "radii for the log-growth suite");
    verify_cmd->add_option("--out", verify_out, "report path (stdout by default)");

    // --- demo ---
    auto* demo_cmd = app.add_subcommand("demo", "run the worked example flows end to end");
    std::uint64_t demo_seed = 42;
    std::string demo_out = "flowlab_demo_report.json";
    demo_cmd->add_option("--seed", demo_seed);
    demo_cmd->add_option("--out", demo_out, "report path");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        app.exit(e);
        return 2;
    }

    try {
        if (check_cmd->parsed()) {
            const BuiltinField bf = load_field_file(check_file);
            json j;
            j["name"] = bf.field.name;
            j["divergence_max"] = divergence_max(bf.field, 41);
            const FieldBounds bounds = estimate_eta(bf.field, bf.field.domain_box, 101);
            j["eta_lo"] = bounds.eta_lo;
            j["eta_hi"] = bounds.eta_hi;
            j["eta"] = bounds.eta();
            j["admissible"] = bounds.admissible;
            if (bf.pressure.present())
                j["euler_residual"] = euler_residual(bf.field, bf.pressure,
                                                     bf.field.domain_box, 41);
            else
                j["euler_residual"] = nullptr;
            emit(j, check_out);
            return 0;
        }

        if (trace_cmd->parsed()) {
            const BuiltinField bf = load_field_file(trace_field);
            IntegratorConfig cfg;
            cfg.rel_tol = trace_rel;
            cfg.abs_tol = trace_abs;
            cfg.max_step = trace_maxstep;
            const auto span = parse_vec2(trace_tspan);
            cfg.t_begin = span.x;
            cfg.t_end = span.y;
            if (!trace_stop_ball.empty()) {
                const auto parts = parse_list(trace_stop_ball);
                if (parts.size() != 3) throw CLI::ValidationError("--stop-ball needs cx,cy,r");
                cfg.stop = StopBall{{parts[0], parts[1]}, parts[2]};
            } else if (!trace_stop_level.empty()) {
                cfg.stop = StopLevel{std::stod(trace_stop_level)};
            } else if (!trace_stop_length.empty()) {
                cfg.stop = StopArclength{std::stod(trace_stop_length)};
            }
            const Vec2 x0 = parse_vec2(trace_from);
            Trajectory traj;
            if (trace_kind == "streamline")
                traj = trace_streamline(bf.field, bf.stream, x0, cfg);
            else if (trace_kind == "gradient")
                traj = trace_gradient(bf.field, bf.stream, x0, cfg);
            else if (trace_kind == "streamline-arclength")
                traj = trace_arclength(bf.field, bf.stream, x0,
                                       TraceKind::StreamlineArclength, cfg);
            else if (trace_kind == "gradient-arclength")
                traj = trace_arclength(bf.field, bf.stream, x0, TraceKind::GradientArclength,
                                       cfg);
            else
                throw CLI::ValidationError("unknown trace kind '" + trace_kind + "'");
            const std::string csv = csv_from_trajectory(traj);
            if (trace_out.empty())
                std::cout << csv;
            else
                write_text_file(trace_out, csv);
            return 0;
        }

        if (osc_cmd->parsed()) {
            const BuiltinField bf = load_field_file(osc_field);
            const OscillationResult r =
                oscillation(bf.field, Ball{parse_vec2(osc_center), osc_radius}, osc_grid);
            emit(to_json(r), osc_out);
            return 0;
        }

        if (arcs_cmd->parsed()) {
            const Curve curve = curve_from_csv_file(arcs_curve);
            const ArcCensus c = census(curve, arcs_a, arcs_b);
            emit(to_json(c), arcs_out);
            return c.bound_holds ? 0 : 1;
        }

        if (growth_cmd->parsed()) {
            const BuiltinField bf = load_field_file(growth_field);
            double eta = growth_eta;
            if (eta <= 0.0) {
                const FieldBounds b = estimate_eta(bf.field, bf.field.domain_box, 101);
                if (!b.admissible) {
                    std::cerr << "hypothesis violated: stagnation on the box\n";
                    return 2;
                }
                eta = b.eta();
            }
            const auto checks = check_log_growth(bf.field, parse_list(growth_radii), eta);
            json arr = json::array();
            bool ok = true;
            for (const auto& g : checks) {
                arr.push_back(to_json(g));
                ok = ok && g.bound_holds;
            }
            emit(arr, growth_out);
            return ok ? 0 : 1;
        }

        if (const_cmd->parsed()) {
            json j = to_json(constants(const_eta));
            const PartitionParams p = partition_params(const_d, const_eta);
            j["partition"] = json{{"d", const_d},
                                  {"m_dyadic", p.m_dyadic},
                                  {"m_geometric", p.m_geometric},
                                  {"n_cap", p.n_cap},
                                  {"dyadic_tail", p.dyadic_tail},
                                  {"geometric_tail", p.geometric_tail},
                                  {"dyadic_tail_ok", p.dyadic_tail_ok},
                                  {"geometric_tail_ok", p.geometric_tail_ok}};
            emit(j, const_out);
            return 0;
        }

        if (verify_cmd->parsed()) {
            SuiteContext ctx;
            ctx.bf = load_field_file(verify_field);
            ctx.seed = verify_seed;
            ctx.quiet = quiet;
            const FieldBounds bounds =
                estimate_eta(ctx.bf.field, ctx.bf.field.domain_box, 101);
            const bool needs_field = verify_suite != "constants";
            if (needs_field && !bounds.admissible) {
                std::cerr << "hypothesis violated: min |v| = " << bounds.eta_lo
                          << " on the domain box (stagnation)\n";
                return 2;
            }
            ctx.eta = verify_eta > 0.0 ? verify_eta : bounds.eta();

            Report report;
            report.config = json{{"command", "verify"},
                                 {"field", ctx.bf.field.name},
                                 {"suite", verify_suite},
                                 {"eta", ctx.eta},
                                 {"seed", ctx.seed}};
            const bool all = verify_suite == "all";
            if (all || verify_suite == "elliptic") suite_elliptic(ctx, report);
            if (all || verify_suite == "patterns") suite_patterns(ctx, report);
            if (all || verify_suite == "foliation") suite_foliation(ctx, report);
            if (all || verify_suite == "constants") suite_constants(ctx, report);
            if (all || verify_suite == "log-growth")
                suite_log_growth(ctx, report, parse_list(verify_radii));
            if (report.checks.empty()) {
                std::cerr << "unknown suite '" << verify_suite << "'\n";
                return 2;
            }
            emit(report.to_json(), verify_out);
            return report.all_pass() ? 0 : 1;
        }

        if (demo_cmd->parsed()) return run_demo(demo_seed, demo_out, quiet);
    } catch (const HypothesisError& e) {
        std::cerr << "hypothesis violated: " << e.what() << "\n";
        return 2;
    } catch (const FieldFileError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const ParseError& e) {
        std::cerr << "expression error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}

} // namespace flowlab

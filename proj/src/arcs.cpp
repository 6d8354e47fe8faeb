#include "flowlab/arcs.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "flowlab/argument.hpp"

namespace flowlab {

const char* arc_class_name(ArcClass c) {
    switch (c) {
        case ArcClass::Middle: return "middle";
        case ArcClass::Left: return "left";
        case ArcClass::Right: return "right";
        case ArcClass::Double: return "double";
        case ArcClass::Exterior: return "exterior";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Curve
// ---------------------------------------------------------------------------

Curve Curve::from_trajectory(const Trajectory& traj) {
    Curve c;
    c.t.reserve(traj.samples.size());
    c.points.reserve(traj.samples.size());
    c.tangents.reserve(traj.samples.size());
    for (const auto& s : traj.samples) {
        c.t.push_back(s.t);
        c.points.push_back(s.x);
        c.tangents.push_back(s.velocity);
    }
    c.validate();
    return c;
}

Curve Curve::from_points(std::vector<Vec2> pts) {
    std::vector<double> ts(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) ts[i] = static_cast<double>(i);
    return from_points(std::move(ts), std::move(pts));
}

Curve Curve::from_points(std::vector<double> ts, std::vector<Vec2> pts) {
    Curve c;
    c.t = std::move(ts);
    c.points = std::move(pts);
    c.validate();
    return c;
}

void Curve::validate() const {
    if (points.size() < 2) throw std::invalid_argument("curve needs at least two points");
    if (t.size() != points.size())
        throw std::invalid_argument("curve parameter/point count mismatch");
    if (!tangents.empty() && tangents.size() != points.size())
        throw std::invalid_argument("curve tangent/point count mismatch");
    for (std::size_t i = 1; i < points.size(); ++i) {
        if (!(t[i] > t[i - 1]))
            throw std::invalid_argument("curve parameters must increase strictly");
        if (points[i] == points[i - 1])
            throw std::invalid_argument("curve has coincident consecutive points");
    }
}

namespace {

std::size_t bracket_index(const std::vector<double>& t, double tp) {
    auto it = std::upper_bound(t.begin(), t.end(), tp);
    std::size_t hi = static_cast<std::size_t>(it - t.begin());
    if (hi == 0) return 0;
    if (hi >= t.size()) return t.size() - 2;
    return hi - 1;
}

} // namespace

Vec2 Curve::point_at(double tp) const {
    if (tp <= t.front()) return points.front();
    if (tp >= t.back()) return points.back();
    const std::size_t i = bracket_index(t, tp);
    const double w = (tp - t[i]) / (t[i + 1] - t[i]);
    return points[i] + (points[i + 1] - points[i]) * w;
}

Vec2 Curve::tangent_at(double tp) const {
    if (!tangents.empty()) {
        if (tp <= t.front()) return tangents.front();
        if (tp >= t.back()) return tangents.back();
        const std::size_t i = bracket_index(t, tp);
        const double w = (tp - t[i]) / (t[i + 1] - t[i]);
        return tangents[i] + (tangents[i + 1] - tangents[i]) * w;
    }
    const std::size_t i = tp >= t.back() ? t.size() - 2 : bracket_index(t, std::max(tp, t.front()));
    return points[i + 1] - points[i];
}

// ---------------------------------------------------------------------------
// Chord-line walk
// ---------------------------------------------------------------------------

namespace {

struct WorkingCurve {
    std::vector<double> t;
    std::vector<Vec2> p;
    Vec2 a, b;          // chord endpoints xi(a), xi(b)
    Vec2 dir;           // unit chord direction
    double chord_len = 0.0;
    double snap = 0.0;

    double offset(const Vec2& q) const { return cross(dir, q - a); }
    double proj(const Vec2& q) const { return dot(q - a, dir); }
};

WorkingCurve make_working(const Curve& c, double a, double b) {
    if (!(a < b)) throw std::invalid_argument("need a < b");
    if (a < c.t_begin() - 1e-12 || b > c.t_end() + 1e-12)
        throw std::invalid_argument("parameters outside the curve range");
    WorkingCurve w;
    w.t.push_back(a);
    w.p.push_back(c.point_at(a));
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (c.t[i] > a && c.t[i] < b) {
            w.t.push_back(c.t[i]);
            w.p.push_back(c.points[i]);
        }
    }
    w.t.push_back(b);
    w.p.push_back(c.point_at(b));
    w.a = w.p.front();
    w.b = w.p.back();
    w.chord_len = dist(w.a, w.b);
    if (w.chord_len <= 0.0)
        throw std::invalid_argument("degenerate chord: xi(a) == xi(b)");
    w.dir = (w.b - w.a) / w.chord_len;
    w.snap = kChordSnapRel * w.chord_len;
    return w;
}

// Parameter/point pairs where the working curve meets the chord line.
struct LinePoint {
    double t;
    Vec2 p;
};

// Walks the working polyline, splitting it at on-line vertices and at sign
// crossings.  Produces the on-line points and the strictly-off intervals.
void walk_line(const WorkingCurve& w, std::vector<LinePoint>& on_line,
               std::vector<ArcInterval>& intervals) {
    const std::size_t n = w.p.size();
    std::vector<double> s(n);
    std::vector<bool> on(n);
    for (std::size_t i = 0; i < n; ++i) {
        s[i] = w.offset(w.p[i]);
        on[i] = std::fabs(s[i]) <= w.snap;
    }
    // xi(a), xi(b) lie on the line by construction
    on.front() = on.back() = true;

    bool open = false;
    ArcInterval current;
    auto open_interval = [&](double t, const Vec2& p) {
        current = ArcInterval{};
        current.t_begin = t;
        current.enter = p;
        open = true;
    };
    auto close_interval = [&](double t, const Vec2& p) {
        current.t_end = t;
        current.exit = p;
        current.index = static_cast<int>(intervals.size());
        intervals.push_back(current);
        open = false;
    };

    on_line.push_back({w.t.front(), w.p.front()});
    for (std::size_t i = 0; i + 1 < n; ++i) {
        // edge i -> i+1
        if (on[i] && on[i + 1]) {
            // collinear-run edge: stays on the line
        } else if (on[i] && !on[i + 1]) {
            open_interval(w.t[i], w.p[i]);
        } else if (!on[i] && on[i + 1]) {
            // interval closes at the on-line vertex
        } else if ((s[i] > 0.0) != (s[i + 1] > 0.0)) {
            // strict sign change inside the edge
            const double frac = s[i] / (s[i] - s[i + 1]);
            const double tc = w.t[i] + frac * (w.t[i + 1] - w.t[i]);
            const Vec2 pc = w.p[i] + (w.p[i + 1] - w.p[i]) * frac;
            on_line.push_back({tc, pc});
            close_interval(tc, pc);
            open_interval(tc, pc);
        }
        if (on[i + 1]) {
            on_line.push_back({w.t[i + 1], w.p[i + 1]});
            if (open) close_interval(w.t[i + 1], w.p[i + 1]);
        }
    }
}

ArcClass classify_projections(double p1, double p2, double chord_len, double snap) {
    auto snap_to = [&](double v) {
        if (std::fabs(v) <= snap) return 0.0;
        if (std::fabs(v - chord_len) <= snap) return chord_len;
        return v;
    };
    const double q1 = snap_to(p1), q2 = snap_to(p2);
    const double lo = std::min(q1, q2), hi = std::max(q1, q2);
    if (hi <= 0.0 || lo >= chord_len) return ArcClass::Exterior;
    if (lo < 0.0 && hi > chord_len) return ArcClass::Double;
    if (lo < 0.0) return ArcClass::Left;
    if (hi > chord_len) return ArcClass::Right;
    return ArcClass::Middle;
}

} // namespace

std::vector<ArcInterval> crossing_intervals(const Curve& c, double a, double b) {
    const WorkingCurve w = make_working(c, a, b);
    std::vector<LinePoint> on_line;
    std::vector<ArcInterval> intervals;
    walk_line(w, on_line, intervals);
    return intervals;
}

ArcClass classify(const ArcInterval& interval, const Curve& c, double a, double b) {
    const WorkingCurve w = make_working(c, a, b);
    return classify_projections(w.proj(interval.enter), w.proj(interval.exit), w.chord_len,
                                w.snap);
}

double tangent_argument_delta(const Curve& c, double a, double b) {
    std::vector<double> knots;
    knots.push_back(a);
    for (double tv : c.t)
        if (tv > a && tv < b) knots.push_back(tv);
    knots.push_back(b);
    const bool refinable = !c.tangents.empty();
    const ArgumentTrace arg =
        unwrap_tangents(knots, [&](double tv) { return c.tangent_at(tv); }, refinable);
    return arg.delta_abs();
}

ArcCensus census(const Curve& c, double a, double b) {
    if (has_self_intersection(c))
        throw std::invalid_argument("curve is self-intersecting; arc calculus needs an embedding");
    const WorkingCurve w = make_working(c, a, b);
    std::vector<LinePoint> on_line;
    ArcCensus out;
    walk_line(w, on_line, out.intervals);
    for (auto& iv : out.intervals) {
        iv.cls = classify_projections(w.proj(iv.enter), w.proj(iv.exit), w.chord_len, w.snap);
        switch (iv.cls) {
            case ArcClass::Middle: ++out.n_middle; break;
            case ArcClass::Left: ++out.n_left; break;
            case ArcClass::Right: ++out.n_right; break;
            case ArcClass::Double: ++out.n_double; break;
            case ArcClass::Exterior: ++out.n_exterior; break;
        }
    }
    out.theta_delta = tangent_argument_delta(c, a, b);
    out.bound_value = 16.0 * M_PI * out.turning_count() + 4.0 * M_PI;
    out.bound_holds = out.theta_delta <= out.bound_value;
    return out;
}

bool is_nonintersecting(const Curve& c, double a, double b) {
    const WorkingCurve w = make_working(c, a, b);
    std::vector<LinePoint> on_line;
    std::vector<ArcInterval> intervals;
    walk_line(w, on_line, intervals);

    bool avoids_open_chord = true;  // xi([a,b]) misses (xi(a), xi(b))
    bool avoids_outside = true;     // xi([a,b]) misses L minus [xi(a), xi(b)]
    for (const auto& lp : on_line) {
        const double p = w.proj(lp.p);
        if (p > w.snap && p < w.chord_len - w.snap) avoids_open_chord = false;
        if (p < -w.snap || p > w.chord_len + w.snap) avoids_outside = false;
    }
    return avoids_open_chord || avoids_outside;
}

// ---------------------------------------------------------------------------
// Self-intersection scan
// ---------------------------------------------------------------------------

namespace {

double orient(const Vec2& a, const Vec2& b, const Vec2& c) {
    return cross(b - a, c - a);
}

bool proper_crossing(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
    const double o1 = orient(a, b, c);
    const double o2 = orient(a, b, d);
    const double o3 = orient(c, d, a);
    const double o4 = orient(c, d, b);
    return ((o1 > 0.0) != (o2 > 0.0)) && o1 != 0.0 && o2 != 0.0 &&
           ((o3 > 0.0) != (o4 > 0.0)) && o3 != 0.0 && o4 != 0.0;
}

} // namespace

bool has_self_intersection(const Curve& c) {
    const std::size_t n = c.points.size();
    for (std::size_t i = 0; i + 1 < n; ++i) {
        for (std::size_t j = i + 2; j + 1 < n; ++j) {
            if (proper_crossing(c.points[i], c.points[i + 1], c.points[j], c.points[j + 1]))
                return true;
        }
    }
    return false;
}

} // namespace flowlab

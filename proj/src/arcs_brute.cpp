// Exhaustive arc-census oracle.  Every geometric decision (on-line snap,
// crossing location, projection ordering, class ties) is made in exact
// rational arithmetic on the polyline vertices, independently of the
// floating-point walk in arcs.cpp.

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "flowlab/arcs.hpp"

namespace flowlab {

namespace {

using Rat = boost::multiprecision::cpp_rational;

struct RPoint {
    Rat x, y;
};

RPoint to_rat(const Vec2& p) { return {Rat(p.x), Rat(p.y)}; }

Vec2 to_double(const RPoint& p) {
    return {static_cast<double>(p.x), static_cast<double>(p.y)};
}

Rat rcross(const RPoint& o, const RPoint& a, const RPoint& b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

Rat rdot_along(const RPoint& a, const RPoint& b, const RPoint& q) {
    return (q.x - a.x) * (b.x - a.x) + (q.y - a.y) * (b.y - a.y);
}

struct Event {
    Rat param;     // position along the working polyline (vertex index scale)
    RPoint point;  // exact location on the chord line
};

} // namespace

ArcCensus brute_census(const Curve& c, double a, double b) {
    if (!(a < b)) throw std::invalid_argument("need a < b");

    // Same working vertex list as the main path (double interpolation for the
    // window endpoints); everything after this is exact.
    std::vector<Vec2> pts;
    pts.push_back(c.point_at(a));
    for (std::size_t i = 0; i < c.size(); ++i)
        if (c.t[i] > a && c.t[i] < b) pts.push_back(c.points[i]);
    pts.push_back(c.point_at(b));

    const std::size_t n = pts.size();
    std::vector<RPoint> rp(n);
    for (std::size_t i = 0; i < n; ++i) rp[i] = to_rat(pts[i]);
    const RPoint A = rp.front(), B = rp.back();

    const Rat chord2 = (B.x - A.x) * (B.x - A.x) + (B.y - A.y) * (B.y - A.y);
    if (chord2 == 0) throw std::invalid_argument("degenerate chord: xi(a) == xi(b)");
    // |offset| <= snap_rel * |chord|  <=>  cross^2 <= snap_rel^2 * chord2^2
    const Rat snap2 = Rat(kChordSnapRel) * Rat(kChordSnapRel) * chord2 * chord2;

    std::vector<Rat> cr(n);       // cross products (signed offset * |chord|)
    std::vector<bool> on(n);
    for (std::size_t i = 0; i < n; ++i) {
        cr[i] = rcross(A, B, rp[i]);
        on[i] = cr[i] * cr[i] <= snap2;
    }
    on.front() = on.back() = true;

    // enumerate every segment-vs-line intersection event plus on-line vertices
    std::vector<Event> events;
    for (std::size_t i = 0; i < n; ++i)
        if (on[i]) events.push_back({Rat(static_cast<long>(i)), rp[i]});
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (on[i] || on[i + 1]) continue;
        const bool neg_i = cr[i] < 0, neg_j = cr[i + 1] < 0;
        if (neg_i == neg_j) continue;
        const Rat frac = cr[i] / (cr[i] - cr[i + 1]);
        RPoint e{rp[i].x + frac * (rp[i + 1].x - rp[i].x),
                 rp[i].y + frac * (rp[i + 1].y - rp[i].y)};
        events.push_back({Rat(static_cast<long>(i)) + frac, e});
    }
    std::sort(events.begin(), events.end(),
              [](const Event& l, const Event& r) { return l.param < r.param; });

    // a gap between consecutive events is an off-line arc iff it contains an
    // off-line vertex
    ArcCensus out;
    const Rat snap_dot = Rat(kChordSnapRel) * chord2; // proj tie band, chord-length scale
    for (std::size_t e = 0; e + 1 < events.size(); ++e) {
        const Rat& lo = events[e].param;
        const Rat& hi = events[e + 1].param;
        bool off_witness = false;
        for (std::size_t i = static_cast<std::size_t>(lo.convert_to<long>()); i < n; ++i) {
            const Rat pi(static_cast<long>(i));
            if (pi <= lo) continue;
            if (pi >= hi) break;
            if (!on[i]) { off_witness = true; break; }
        }
        if (!off_witness) continue;

        // exact projections of the two on-line endpoints, in units of
        // dot(., chord); 0 maps to xi(a) and chord2 to xi(b)
        Rat p1 = rdot_along(A, B, events[e].point);
        Rat p2 = rdot_along(A, B, events[e + 1].point);
        auto snap_proj = [&](Rat& p) {
            if (p * p <= snap_dot * snap_dot) p = 0;
            else if ((p - chord2) * (p - chord2) <= snap_dot * snap_dot) p = chord2;
        };
        snap_proj(p1);
        snap_proj(p2);
        const Rat plo = std::min(p1, p2), phi = std::max(p1, p2);

        ArcInterval iv;
        iv.index = static_cast<int>(out.intervals.size());
        iv.t_begin = events[e].param.convert_to<double>();
        iv.t_end = events[e + 1].param.convert_to<double>();
        iv.enter = to_double(events[e].point);
        iv.exit = to_double(events[e + 1].point);
        if (phi <= 0 || plo >= chord2) {
            iv.cls = ArcClass::Exterior;
            ++out.n_exterior;
        } else if (plo < 0 && phi > chord2) {
            iv.cls = ArcClass::Double;
            ++out.n_double;
        } else if (plo < 0) {
            iv.cls = ArcClass::Left;
            ++out.n_left;
        } else if (phi > chord2) {
            iv.cls = ArcClass::Right;
            ++out.n_right;
        } else {
            iv.cls = ArcClass::Middle;
            ++out.n_middle;
        }
        out.intervals.push_back(iv);
    }

    out.theta_delta = tangent_argument_delta(c, a, b);
    out.bound_value = 16.0 * M_PI * out.turning_count() + 4.0 * M_PI;
    out.bound_holds = out.theta_delta <= out.bound_value;
    return out;
}

} // namespace flowlab

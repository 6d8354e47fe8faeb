#pragma once

#include <string>
#include <vector>

#include "flowlab/geom.hpp"
#include "flowlab/tracer.hpp"

namespace flowlab {

// Sampled C1 embedding restricted to a parameter window.  Tangents are
// optional; when absent, segment directions stand in for them.
struct Curve {
    std::vector<double> t;
    std::vector<Vec2> points;
    std::vector<Vec2> tangents; // empty, or one per point

    static Curve from_trajectory(const Trajectory& traj);
    static Curve from_points(std::vector<Vec2> pts);
    static Curve from_points(std::vector<double> ts, std::vector<Vec2> pts);

    std::size_t size() const { return points.size(); }
    double t_begin() const { return t.front(); }
    double t_end() const { return t.back(); }
    Vec2 point_at(double tp) const;   // piecewise-linear
    Vec2 tangent_at(double tp) const; // interpolated tangent, or segment direction

    void validate() const; // strictly increasing t, distinct consecutive points
};

// Classification of an off-chord excursion relative to the chord [xi(a), xi(b)]:
// both excursion endpoints lie on the chord line; the class records how the
// line segment between them sits relative to the chord.
enum class ArcClass { Middle, Left, Right, Double, Exterior };

const char* arc_class_name(ArcClass c);

struct ArcInterval {
    int index = 0;
    double t_begin = 0.0;
    double t_end = 0.0;
    Vec2 enter;           // on-line point where the excursion starts
    Vec2 exit;            // on-line point where it ends
    ArcClass cls = ArcClass::Middle;
};

struct ArcCensus {
    int n_left = 0;
    int n_right = 0;
    int n_double = 0;
    int n_middle = 0;
    int n_exterior = 0;
    double theta_delta = 0.0;  // |theta(a) - theta(b)| from the unwrapped tangent
    double bound_value = 0.0;  // 16 pi (Nl + Nr + Nd) + 4 pi
    bool bound_holds = false;
    std::vector<ArcInterval> intervals;

    int turning_count() const { return n_left + n_right + n_double; }
};

// Snap tolerance (relative to chord length) deciding "on the line".
inline constexpr double kChordSnapRel = 1e-9;

// Maximal open parameter intervals on which the curve stays strictly off the
// chord line of [a, b], endpoints located on the line (crossings by linear
// interpolation, tangential touches as on-line points).  Unclassified.
std::vector<ArcInterval> crossing_intervals(const Curve& c, double a, double b);

ArcClass classify(const ArcInterval& interval, const Curve& c, double a, double b);

// Full decomposition: intervals, five-way counts, tangent-argument delta and
// the 16 pi N + 4 pi bound.  Rejects self-intersecting curves.
ArcCensus census(const Curve& c, double a, double b);

// True when the sub-curve avoids the open chord (xi(a), xi(b)) or avoids the
// chord line outside the closed chord; such arcs turn by at most 4 pi.
bool is_nonintersecting(const Curve& c, double a, double b);

// Independent oracle: exhaustive segment-vs-line enumeration with exact
// rational predicates on the polyline vertices.  Same contract as census.
ArcCensus brute_census(const Curve& c, double a, double b);

// Pairwise proper-crossing scan over non-adjacent segments.
bool has_self_intersection(const Curve& c);

// theta(a)..theta(b) helper shared by census and brute_census.
double tangent_argument_delta(const Curve& c, double a, double b);

} // namespace flowlab

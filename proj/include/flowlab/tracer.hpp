#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "flowlab/field.hpp"
#include "flowlab/geom.hpp"

namespace flowlab {

enum class TraceKind { Streamline, Gradient, StreamlineArclength, GradientArclength };

enum class EventKind { BoxExit, BallExit, LevelHit, ArclengthReached, Stagnation, StepUnderflow };

struct TraceEvent {
    EventKind kind;
    double t = 0.0;
    Vec2 at;
};

struct StopBall { Vec2 center; double radius; };
struct StopBox { Box box; };
struct StopLevel { double level; };
struct StopArclength { double length; };
using StopCondition = std::variant<std::monostate, StopBall, StopBox, StopLevel, StopArclength>;

struct IntegratorConfig {
    double rel_tol = 1e-9;
    double abs_tol = 1e-11;
    double max_step = 0.25;
    double t_begin = 0.0;
    double t_end = 1.0;
    StopCondition stop;
    // when set, the trace stops (with a BoxExit event) on leaving this box;
    // defaults to the field's domain_box
    std::optional<Box> clip_box;
};

struct TrajectorySample {
    double t = 0.0;
    Vec2 x;
    Vec2 velocity;    // dx/dt of the traced ODE at x
    double u = 0.0;   // stream function value, stored once at trace time
    double arclength = 0.0;
};

struct Trajectory {
    TraceKind kind = TraceKind::Streamline;
    std::vector<TrajectorySample> samples;
    std::vector<TraceEvent> events;
    VectorField field;

    std::size_t size() const { return samples.size(); }
    const TrajectorySample& front() const { return samples.front(); }
    const TrajectorySample& back() const { return samples.back(); }

    // cubic Hermite interpolation between the two samples bracketing t
    Vec2 position_at(double t) const;
    Vec2 velocity_at(double t) const;

    bool has_event(EventKind kind) const;
    std::optional<TraceEvent> first_event(EventKind kind) const;

    double polyline_length() const;
};

// gamma' = v(gamma), gamma(0) = x0
Trajectory trace_streamline(const VectorField& f, const StreamFunction& u, const Vec2& x0,
                            const IntegratorConfig& cfg);

// sigma' = grad u(sigma) = (v2, -v1), sigma(0) = x0
Trajectory trace_gradient(const VectorField& f, const StreamFunction& u, const Vec2& x0,
                          const IntegratorConfig& cfg);

// unit-speed variants
Trajectory trace_arclength(const VectorField& f, const StreamFunction& u, const Vec2& x0,
                           TraceKind kind, const IntegratorConfig& cfg);

// The unique point on the gradient trajectory through start where u equals
// level.  Monotonicity of u along gradient orbits makes the hit unique; it is
// located by integrate-until-bracket plus bisection on the dense output.
Vec2 level_hit(const VectorField& f, const StreamFunction& u, const Vec2& start, double level,
               const IntegratorConfig& cfg);

struct ExitPoint {
    double t = 0.0;
    Vec2 x;
};

// First boundary crossing of a ball or box by a trajectory that starts
// inside.  Throws if the trajectory never leaves the region.
ExitPoint first_exit(const Trajectory& traj, const Ball& ball);
ExitPoint first_exit(const Trajectory& traj, const Box& box);

} // namespace flowlab

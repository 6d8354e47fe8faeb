#include "flowlab/tracer.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace flowlab {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double A21 = 1.0 / 5;
constexpr double A31 = 3.0 / 40, A32 = 9.0 / 40;
constexpr double A41 = 44.0 / 45, A42 = -56.0 / 15, A43 = 32.0 / 9;
constexpr double A51 = 19372.0 / 6561, A52 = -25360.0 / 2187, A53 = 64448.0 / 6561,
                 A54 = -212.0 / 729;
constexpr double A61 = 9017.0 / 3168, A62 = -355.0 / 33, A63 = 46732.0 / 5247,
                 A64 = 49.0 / 176, A65 = -5103.0 / 18656;
constexpr double A71 = 35.0 / 384, A73 = 500.0 / 1113, A74 = 125.0 / 192,
                 A75 = -2187.0 / 6784, A76 = 11.0 / 84;
constexpr double E1 = 71.0 / 57600, E3 = -71.0 / 16695, E4 = 71.0 / 1920,
                 E5 = -17253.0 / 339200, E6 = 22.0 / 525, E7 = -1.0 / 40;

// integration state: position plus accumulated arc length
struct State {
    Vec2 x;
    double s = 0.0;

    State operator+(const State& o) const { return {x + o.x, s + o.s}; }
    State operator*(double k) const { return {x * k, s * k}; }
};

struct Deriv {
    Vec2 dx;
    double ds = 0.0;
};

State axpy(const State& y, double h, const Deriv& d) {
    return {y.x + d.dx * h, y.s + d.ds * h};
}

struct Rhs {
    const VectorField* field;
    TraceKind kind;

    Vec2 direction(const Vec2& p) const {
        const Vec2 v = field->velocity(p);
        switch (kind) {
            case TraceKind::Streamline: return v;
            case TraceKind::Gradient: return {v.y, -v.x};
            case TraceKind::StreamlineArclength: {
                const double m = norm(v);
                return v / m;
            }
            case TraceKind::GradientArclength: {
                const Vec2 g{v.y, -v.x};
                return g / norm(g);
            }
        }
        return v;
    }

    Deriv operator()(const State& y) const {
        const Vec2 d = direction(y.x);
        return {d, norm(d)};
    }
};

struct HermiteStep {
    double t0 = 0.0, t1 = 0.0;
    State y0, y1;
    Deriv f0, f1;

    State at(double t) const {
        const double h = t1 - t0;
        const double th = (t - t0) / h;
        const double th2 = th * th, th3 = th2 * th;
        const double h00 = 2 * th3 - 3 * th2 + 1;
        const double h10 = th3 - 2 * th2 + th;
        const double h01 = -2 * th3 + 3 * th2;
        const double h11 = th3 - th2;
        State out;
        out.x = y0.x * h00 + f0.dx * (h10 * h) + y1.x * h01 + f1.dx * (h11 * h);
        out.s = y0.s * h00 + f0.ds * (h10 * h) + y1.s * h01 + f1.ds * (h11 * h);
        return out;
    }

    Vec2 velocity_at(double t) const {
        const double h = t1 - t0;
        const double th = (t - t0) / h;
        const double th2 = th * th;
        const double d00 = (6 * th2 - 6 * th) / h;
        const double d10 = 3 * th2 - 4 * th + 1;
        const double d01 = (-6 * th2 + 6 * th) / h;
        const double d11 = 3 * th2 - 2 * th;
        return y0.x * d00 + f0.dx * d10 + y1.x * d01 + f1.dx * d11;
    }
};

// Signed clearance from the boundary: positive strictly inside.
double box_clearance(const Box& b, const Vec2& p) {
    return std::min(std::min(p.x - b.xmin, b.xmax - p.x), std::min(p.y - b.ymin, b.ymax - p.y));
}

double ball_clearance(const Ball& b, const Vec2& p) { return b.radius - dist(p, b.center); }

// Bisection for g(t) = 0 on [lo, hi] where g(lo) and g(hi) have opposite
// signs; returns the root to ~1e-13 relative in t (dense output is smooth, so
// position error tracks the t error).
template <typename G>
double bisect(const G& g, double lo, double hi) {
    double glo = g(lo);
    for (int i = 0; i < 90; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        const double gm = g(mid);
        if ((glo <= 0.0) == (gm <= 0.0)) {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
        if (std::fabs(hi - lo) <= 1e-14 * std::max(1.0, std::fabs(hi))) break;
    }
    return 0.5 * (lo + hi);
}

class Integrator {
public:
    Integrator(const VectorField& f, const StreamFunction& u, TraceKind kind,
               const IntegratorConfig& cfg)
        : field_(f), stream_(&u), kind_(kind), cfg_(cfg), rhs_{&f, kind} {
        clip_ = cfg.clip_box.value_or(f.domain_box);
    }

    // integrates from t=0 towards t_target (either sign), appending samples
    void run(const Vec2& x0, double t_target, Trajectory& out, bool record_initial) {
        const double dir = t_target >= 0.0 ? 1.0 : -1.0;
        double t = 0.0;
        State y{x0, 0.0};
        if (record_initial) append_sample(out, t, y);
        if (t_target == 0.0) return;

        Deriv f0;
        if (!stagnation_guard(out, t, y, f0)) return;

        double h = initial_step(y, f0, std::fabs(t_target));
        while (dir * (t_target - t) > 1e-14 * std::max(1.0, std::fabs(t))) {
            h = std::min(h, std::fabs(t_target - t));
            if (h < 1e-13 * std::max(1.0, std::fabs(t))) {
                out.events.push_back({EventKind::StepUnderflow, t, y.x});
                return;
            }
            State y1;
            Deriv f1;
            double err;
            step(y, f0, dir * h, y1, f1, err);
            if (!(err <= 1.0)) { // NaN (stagnant stage point) also lands here
                h *= std::isfinite(err) ? std::max(0.2, 0.9 * std::pow(err, -0.2)) : 0.2;
                continue;
            }
            const HermiteStep dense{t, t + dir * h, y, y1, f0, f1};
            if (handle_events(out, dense)) return;
            t += dir * h;
            y = y1;
            f0 = f1;
            append_sample(out, t, y);
            if (!stagnation_guard(out, t, y, f0)) return;
            const double grow = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
            h = std::min(cfg_.max_step, h * std::clamp(grow, 0.2, 5.0));
        }
    }

private:
    void step(const State& y, const Deriv& k1, double h, State& y_out, Deriv& k_last,
              double& err_norm) const {
        const Deriv k2 = rhs_(axpy(y, h * A21, k1));
        const Deriv k3 = rhs_({y.x + (k1.dx * A31 + k2.dx * A32) * h,
                               y.s + (k1.ds * A31 + k2.ds * A32) * h});
        const Deriv k4 = rhs_({y.x + (k1.dx * A41 + k2.dx * A42 + k3.dx * A43) * h,
                               y.s + (k1.ds * A41 + k2.ds * A42 + k3.ds * A43) * h});
        const Deriv k5 =
            rhs_({y.x + (k1.dx * A51 + k2.dx * A52 + k3.dx * A53 + k4.dx * A54) * h,
                  y.s + (k1.ds * A51 + k2.ds * A52 + k3.ds * A53 + k4.ds * A54) * h});
        const Deriv k6 = rhs_(
            {y.x + (k1.dx * A61 + k2.dx * A62 + k3.dx * A63 + k4.dx * A64 + k5.dx * A65) * h,
             y.s + (k1.ds * A61 + k2.ds * A62 + k3.ds * A63 + k4.ds * A64 + k5.ds * A65) * h});
        y_out = {y.x + (k1.dx * A71 + k3.dx * A73 + k4.dx * A74 + k5.dx * A75 + k6.dx * A76) * h,
                 y.s + (k1.ds * A71 + k3.ds * A73 + k4.ds * A74 + k5.ds * A75 + k6.ds * A76) * h};
        k_last = rhs_(y_out); // FSAL stage doubles as the error stage k7

        const double ex =
            h * (E1 * k1.dx.x + E3 * k3.dx.x + E4 * k4.dx.x + E5 * k5.dx.x + E6 * k6.dx.x +
                 E7 * k_last.dx.x);
        const double ey =
            h * (E1 * k1.dx.y + E3 * k3.dx.y + E4 * k4.dx.y + E5 * k5.dx.y + E6 * k6.dx.y +
                 E7 * k_last.dx.y);
        const double es =
            h * (E1 * k1.ds + E3 * k3.ds + E4 * k4.ds + E5 * k5.ds + E6 * k6.ds + E7 * k_last.ds);
        auto scale = [&](double a, double b) {
            return cfg_.abs_tol + cfg_.rel_tol * std::max(std::fabs(a), std::fabs(b));
        };
        const double rx = ex / scale(y.x.x, y_out.x.x);
        const double ry = ey / scale(y.x.y, y_out.x.y);
        const double rs = es / scale(y.s, y_out.s);
        err_norm = std::sqrt((rx * rx + ry * ry + rs * rs) / 3.0);
    }

    double initial_step(const State& y, const Deriv& f, double span) const {
        const double speed = std::max(norm(f.dx), 1e-8);
        const double h = 0.01 * std::max(1.0, norm(y.x)) / speed;
        return std::min({cfg_.max_step, span, std::max(h, 1e-8)});
    }

    bool stagnation_guard(Trajectory& out, double t, const State& y, Deriv& f) {
        const double speed = norm(field_.velocity(y.x));
        if (speed < kStagnationTol) {
            out.events.push_back({EventKind::Stagnation, t, y.x});
            return false;
        }
        f = rhs_(y);
        return true;
    }

    void append_sample(Trajectory& out, double t, const State& y) const {
        TrajectorySample s;
        s.t = t;
        s.x = y.x;
        s.velocity = rhs_.direction(y.x);
        s.u = (*stream_)(y.x);
        s.arclength = y.s;
        out.samples.push_back(s);
    }

    // Locates the earliest stop/clip crossing inside the step, if any.
    // Returns true when the trace must stop.
    bool handle_events(Trajectory& out, const HermiteStep& dense) {
        struct Hit {
            double t;
            EventKind kind;
        };
        std::optional<Hit> best;
        auto consider = [&](EventKind kind, auto&& clearance) {
            const double g0 = clearance(dense.t0);
            const double g1 = clearance(dense.t1);
            if (g0 > 0.0 && g1 <= 0.0) {
                const double te = bisect(clearance, dense.t0, dense.t1);
                if (!best || std::fabs(te) < std::fabs(best->t)) best = Hit{te, kind};
            }
        };

        consider(EventKind::BoxExit,
                 [&](double t) { return box_clearance(clip_, dense.at(t).x); });
        if (const auto* ball = std::get_if<StopBall>(&cfg_.stop)) {
            const Ball region{ball->center, ball->radius};
            consider(EventKind::BallExit,
                     [&](double t) { return ball_clearance(region, dense.at(t).x); });
        } else if (const auto* box = std::get_if<StopBox>(&cfg_.stop)) {
            consider(EventKind::BoxExit,
                     [&](double t) { return box_clearance(box->box, dense.at(t).x); });
        } else if (const auto* lv = std::get_if<StopLevel>(&cfg_.stop)) {
            // |u - level| has no sign change; use the signed gap instead
            const double u0 = (*stream_)(dense.at(dense.t0).x) - lv->level;
            const double u1 = (*stream_)(dense.at(dense.t1).x) - lv->level;
            if ((u0 <= 0.0) != (u1 <= 0.0)) {
                const double te = bisect(
                    [&](double t) { return (*stream_)(dense.at(t).x) - lv->level; }, dense.t0,
                    dense.t1);
                if (!best || std::fabs(te) < std::fabs(best->t))
                    best = Hit{te, EventKind::LevelHit};
            }
        } else if (const auto* arc = std::get_if<StopArclength>(&cfg_.stop)) {
            consider(EventKind::ArclengthReached,
                     [&](double t) { return arc->length - dense.at(t).s; });
        }

        if (!best) return false;
        const State ye = dense.at(best->t);
        out.events.push_back({best->kind, best->t, ye.x});
        append_sample(out, best->t, ye);
        return true;
    }

    const VectorField& field_;
    const StreamFunction* stream_;
    TraceKind kind_;
    IntegratorConfig cfg_;
    Rhs rhs_;
    Box clip_;
};

Trajectory trace(const VectorField& f, const StreamFunction& u, const Vec2& x0, TraceKind kind,
                 const IntegratorConfig& cfg) {
    if (cfg.rel_tol <= 0.0 || cfg.abs_tol <= 0.0)
        throw std::invalid_argument("integrator tolerances must be positive");
    if (!(cfg.t_begin <= 0.0 && cfg.t_end >= 0.0))
        throw std::invalid_argument("t span must contain 0");

    Trajectory out;
    out.kind = kind;
    out.field = f;

    Integrator backward(f, u, kind, cfg);
    Trajectory tail;
    tail.field = f;
    backward.run(x0, cfg.t_begin, tail, false);

    std::reverse(tail.samples.begin(), tail.samples.end());
    out.samples = std::move(tail.samples);
    out.events = std::move(tail.events);

    Integrator forward(f, u, kind, cfg);
    forward.run(x0, cfg.t_end, out, true);
    return out;
}

} // namespace

Vec2 Trajectory::position_at(double t) const {
    if (samples.empty()) throw std::logic_error("empty trajectory");
    if (t <= samples.front().t) return samples.front().x;
    if (t >= samples.back().t) return samples.back().x;
    auto it = std::lower_bound(samples.begin(), samples.end(), t,
                               [](const TrajectorySample& s, double v) { return s.t < v; });
    const auto& hi = *it;
    const auto& lo = *(it - 1);
    const HermiteStep dense{lo.t, hi.t, {lo.x, lo.arclength}, {hi.x, hi.arclength},
                            {lo.velocity, 0.0},  {hi.velocity, 0.0}};
    return dense.at(t).x;
}

Vec2 Trajectory::velocity_at(double t) const {
    if (samples.empty()) throw std::logic_error("empty trajectory");
    if (t <= samples.front().t) return samples.front().velocity;
    if (t >= samples.back().t) return samples.back().velocity;
    auto it = std::lower_bound(samples.begin(), samples.end(), t,
                               [](const TrajectorySample& s, double v) { return s.t < v; });
    const auto& hi = *it;
    const auto& lo = *(it - 1);
    const HermiteStep dense{lo.t, hi.t, {lo.x, 0.0}, {hi.x, 0.0},
                            {lo.velocity, 0.0}, {hi.velocity, 0.0}};
    return dense.velocity_at(t);
}

bool Trajectory::has_event(EventKind kind) const {
    for (const auto& e : events)
        if (e.kind == kind) return true;
    return false;
}

std::optional<TraceEvent> Trajectory::first_event(EventKind kind) const {
    std::optional<TraceEvent> best;
    for (const auto& e : events)
        if (e.kind == kind && (!best || std::fabs(e.t) < std::fabs(best->t))) best = e;
    return best;
}

double Trajectory::polyline_length() const {
    double len = 0.0;
    for (std::size_t i = 1; i < samples.size(); ++i)
        len += dist(samples[i].x, samples[i - 1].x);
    return len;
}

Trajectory trace_streamline(const VectorField& f, const StreamFunction& u, const Vec2& x0,
                            const IntegratorConfig& cfg) {
    return trace(f, u, x0, TraceKind::Streamline, cfg);
}

Trajectory trace_gradient(const VectorField& f, const StreamFunction& u, const Vec2& x0,
                          const IntegratorConfig& cfg) {
    return trace(f, u, x0, TraceKind::Gradient, cfg);
}

Trajectory trace_arclength(const VectorField& f, const StreamFunction& u, const Vec2& x0,
                           TraceKind kind, const IntegratorConfig& cfg) {
    if (kind != TraceKind::StreamlineArclength && kind != TraceKind::GradientArclength)
        throw std::invalid_argument("trace_arclength expects an arc-length kind");
    if (norm(f.velocity(x0)) < kStagnationTol)
        throw std::invalid_argument("arc-length trace started at a stagnation point");
    return trace(f, u, x0, kind, cfg);
}

Vec2 level_hit(const VectorField& f, const StreamFunction& u, const Vec2& start, double level,
               const IntegratorConfig& cfg) {
    const double u0 = u(start);
    IntegratorConfig run_cfg = cfg;
    run_cfg.stop = StopLevel{level};
    if (level >= u0) {
        run_cfg.t_begin = 0.0;
    } else {
        run_cfg.t_end = 0.0;
    }
    const Trajectory traj = trace_gradient(f, u, start, run_cfg);
    if (auto hit = traj.first_event(EventKind::LevelHit)) return hit->at;
    std::ostringstream os;
    os << "level " << level << " not reached along the gradient trajectory; achieved u range ["
       << traj.samples.front().u << ", " << traj.samples.back().u << "]";
    throw std::runtime_error(os.str());
}

namespace {

template <typename Clearance>
ExitPoint first_exit_impl(const Trajectory& traj, const Clearance& clearance) {
    if (traj.samples.empty()) throw std::invalid_argument("empty trajectory");
    if (clearance(traj.samples.front().x) <= 0.0)
        throw std::invalid_argument("trajectory does not start inside the region");
    for (std::size_t i = 1; i < traj.samples.size(); ++i) {
        if (clearance(traj.samples[i].x) <= 0.0) {
            const auto& lo = traj.samples[i - 1];
            const auto& hi = traj.samples[i];
            const HermiteStep dense{lo.t, hi.t, {lo.x, 0.0}, {hi.x, 0.0},
                                    {lo.velocity, 0.0}, {hi.velocity, 0.0}};
            const double te =
                bisect([&](double t) { return clearance(dense.at(t).x); }, lo.t, hi.t);
            return {te, dense.at(te).x};
        }
    }
    throw std::runtime_error("trajectory never leaves the region");
}

} // namespace

ExitPoint first_exit(const Trajectory& traj, const Ball& ball) {
    return first_exit_impl(traj, [&](const Vec2& p) { return ball_clearance(ball, p); });
}

ExitPoint first_exit(const Trajectory& traj, const Box& box) {
    return first_exit_impl(traj, [&](const Vec2& p) { return box_clearance(box, p); });
}

} // namespace flowlab

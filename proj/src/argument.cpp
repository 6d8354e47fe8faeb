#include "flowlab/argument.hpp"

#include <cmath>
#include <deque>
#include <limits>
#include <sstream>

#include "flowlab/parallel.hpp"

namespace flowlab {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;

double wrap_to_2pi(double a) {
    a = std::fmod(a, kTwoPi);
    if (a < 0.0) a += kTwoPi;
    return a;
}

// representative of raw + 2*pi*k nearest to ref
double align(double raw, double ref) {
    return raw + kTwoPi * std::round((ref - raw) / kTwoPi);
}

} // namespace

// ---------------------------------------------------------------------------
// Unwrapping
// ---------------------------------------------------------------------------

ArgumentTrace unwrap_tangents(const std::vector<double>& knots,
                              const std::function<Vec2(double)>& tangent, bool can_refine) {
    if (knots.size() < 2) throw std::invalid_argument("unwrap needs at least two samples");
    ArgumentTrace out;
    auto raw_angle = [&](double t) {
        const Vec2 d = tangent(t);
        const double m = norm(d);
        if (m <= 0.0 || !std::isfinite(m))
            throw std::invalid_argument("unwrap requires a nonvanishing tangent");
        return std::atan2(d.y, d.x);
    };

    double theta = wrap_to_2pi(raw_angle(knots.front()));
    out.t.push_back(knots.front());
    out.theta.push_back(theta);

    constexpr double kRefineGap = 0.5 * M_PI;
    constexpr int kMaxDepth = 40;

    // resolves the angle at t_hi given the resolved angle at t_lo
    std::function<void(double, double, double, int)> advance = [&](double t_lo, double th_lo,
                                                                   double t_hi, int depth) {
        const double cand = align(raw_angle(t_hi), th_lo);
        if (std::fabs(cand - th_lo) >= kRefineGap) {
            if (!can_refine || depth >= kMaxDepth) {
                if (std::fabs(cand - th_lo) >= M_PI - 1e-12) {
                    std::ostringstream os;
                    os << "unresolvable tangent-angle gap between t=" << t_lo << " and t="
                       << t_hi;
                    throw std::runtime_error(os.str());
                }
                // gap below pi still unwraps uniquely
            } else {
                const double mid = 0.5 * (t_lo + t_hi);
                if (mid > t_lo && mid < t_hi) {
                    advance(t_lo, th_lo, mid, depth + 1);
                    advance(out.t.back(), out.theta.back(), t_hi, depth + 1);
                    return;
                }
            }
        }
        out.t.push_back(t_hi);
        out.theta.push_back(cand);
    };

    for (std::size_t i = 1; i < knots.size(); ++i)
        advance(out.t.back(), out.theta.back(), knots[i], 0);
    return out;
}

ArgumentTrace unwrap(const Trajectory& traj, double t_lo, double t_hi) {
    if (traj.samples.size() < 2) throw std::invalid_argument("trajectory too short to unwrap");
    std::vector<double> knots;
    knots.push_back(t_lo);
    for (const auto& s : traj.samples)
        if (s.t > t_lo && s.t < t_hi) knots.push_back(s.t);
    knots.push_back(t_hi);
    return unwrap_tangents(knots, [&](double t) { return traj.velocity_at(t); }, true);
}

ArgumentTrace unwrap(const Trajectory& traj) {
    if (traj.samples.size() < 2) throw std::invalid_argument("trajectory too short to unwrap");
    return unwrap(traj, traj.samples.front().t, traj.samples.back().t);
}

ArgumentTrace unwrap_polyline(const std::vector<Vec2>& points) {
    if (points.size() < 2) throw std::invalid_argument("polyline too short to unwrap");
    std::vector<double> knots(points.size() - 1);
    for (std::size_t i = 0; i + 1 < points.size(); ++i) knots[i] = static_cast<double>(i);
    // tangent of segment i
    auto tangent = [&](double t) {
        const std::size_t i = static_cast<std::size_t>(t);
        return points[i + 1] - points[i];
    };
    return unwrap_tangents(knots, tangent, false);
}

// ---------------------------------------------------------------------------
// Branch fields
// ---------------------------------------------------------------------------

namespace {

Vec2 direction_of(const VectorField& f, const Vec2& p, AngleOf which) {
    const Vec2 v = f.velocity(p);
    return which == AngleOf::Field ? v : Vec2{v.y, -v.x};
}

BranchField propagate(const VectorField& f, AngleOf which, Vec2 origin, double dx, double dy,
                      int nx, int ny, const std::function<bool(const Vec2&)>& in_region) {
    BranchField b;
    b.grid_origin = origin;
    b.dx = dx;
    b.dy = dy;
    b.nx = nx;
    b.ny = ny;
    b.phi.assign(static_cast<std::size_t>(nx) * ny, std::numeric_limits<double>::quiet_NaN());
    b.active.assign(static_cast<std::size_t>(nx) * ny, 0);

    std::vector<double> raw(static_cast<std::size_t>(nx) * ny, 0.0);
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const Vec2 p = b.node(i, j);
            if (!in_region(p)) continue;
            const Vec2 d = direction_of(f, p, which);
            const double m = norm(d);
            if (m < kStagnationTol)
                throw HypothesisError("stagnation point on the branch grid", p);
            b.active[j * nx + i] = 1;
            raw[j * nx + i] = std::atan2(d.y, d.x);
        }
    }

    const int ci = nx / 2, cj = ny / 2;
    if (!b.is_active(ci, cj))
        throw std::invalid_argument("region center is not an active grid node");

    std::deque<std::pair<int, int>> queue;
    b.phi[cj * nx + ci] = wrap_to_2pi(raw[cj * nx + ci]);
    queue.emplace_back(ci, cj);
    const int di[4] = {1, -1, 0, 0};
    const int dj[4] = {0, 0, 1, -1};
    while (!queue.empty()) {
        const auto [i, j] = queue.front();
        queue.pop_front();
        const double parent = b.phi[j * nx + i];
        for (int k = 0; k < 4; ++k) {
            const int ii = i + di[k], jj = j + dj[k];
            if (ii < 0 || ii >= nx || jj < 0 || jj >= ny) continue;
            const std::size_t idx = static_cast<std::size_t>(jj) * nx + ii;
            if (!b.active[idx] || !std::isnan(b.phi[idx])) continue;
            b.phi[idx] = align(raw[idx], parent);
            queue.emplace_back(ii, jj);
        }
    }

    b.min_phi = std::numeric_limits<double>::infinity();
    b.max_phi = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const std::size_t idx = static_cast<std::size_t>(j) * nx + i;
            if (!b.active[idx]) continue;
            if (std::isnan(b.phi[idx]))
                throw std::runtime_error("branch grid has a disconnected active node");
            if (b.phi[idx] < b.min_phi) { b.min_phi = b.phi[idx]; b.min_at = b.node(i, j); }
            if (b.phi[idx] > b.max_phi) { b.max_phi = b.phi[idx]; b.max_at = b.node(i, j); }
        }
    }

    // branch consistency: adjacent active nodes must stay within pi
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            if (!b.is_active(i, j)) continue;
            const double v = b.at(i, j);
            if (i + 1 < nx && b.is_active(i + 1, j) && std::fabs(b.at(i + 1, j) - v) >= M_PI)
                throw std::runtime_error("branch grid too coarse: adjacent angle gap >= pi");
            if (j + 1 < ny && b.is_active(i, j + 1) && std::fabs(b.at(i, j + 1) - v) >= M_PI)
                throw std::runtime_error("branch grid too coarse: adjacent angle gap >= pi");
        }
    }
    return b;
}

} // namespace

BranchField branch_field(const VectorField& f, const Ball& ball, int n, AngleOf which) {
    if (n < 3) throw std::invalid_argument("grid count must be at least 3");
    if (n % 2 == 0) ++n; // keep the center on a node
    const double spacing = 2.0 * ball.radius / (n - 1);
    const Vec2 origin{ball.center.x - ball.radius, ball.center.y - ball.radius};
    const double r_snap = ball.radius * (1.0 + 1e-12);
    BranchField b = propagate(f, which, origin, spacing, spacing, n, n,
                              [&](const Vec2& p) { return dist(p, ball.center) <= r_snap; });

    // The grid reaches the circular rim only to O(spacing), and the extremes
    // of a harmonic-looking angle sit on the rim; sample the exact circle
    // crossings of each grid line so the reported sup/inf converge fast.
    auto take_rim = [&](const Vec2& p, double ref) {
        const Vec2 d = direction_of(f, p, which);
        if (norm(d) < kStagnationTol) throw HypothesisError("stagnation on the rim", p);
        const double v = align(std::atan2(d.y, d.x), ref);
        if (v < b.min_phi) { b.min_phi = v; b.min_at = p; }
        if (v > b.max_phi) { b.max_phi = v; b.max_at = p; }
    };
    const int nx = b.nx, ny = b.ny;
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            if (!b.is_active(i, j)) continue;
            const Vec2 p = b.node(i, j);
            const double ref = b.at(i, j);
            const double dy = p.y - ball.center.y;
            const double dx = p.x - ball.center.x;
            const double half_w = std::sqrt(std::max(0.0, ball.radius * ball.radius - dy * dy));
            const double half_h = std::sqrt(std::max(0.0, ball.radius * ball.radius - dx * dx));
            if (i + 1 >= nx || !b.is_active(i + 1, j))
                take_rim({ball.center.x + half_w, p.y}, ref);
            if (i == 0 || !b.is_active(i - 1, j))
                take_rim({ball.center.x - half_w, p.y}, ref);
            if (j + 1 >= ny || !b.is_active(i, j + 1))
                take_rim({p.x, ball.center.y + half_h}, ref);
            if (j == 0 || !b.is_active(i, j - 1))
                take_rim({p.x, ball.center.y - half_h}, ref);
        }
    }
    return b;
}

BranchField branch_field(const VectorField& f, const Box& box, int n, AngleOf which) {
    if (n < 3) throw std::invalid_argument("grid count must be at least 3");
    if (n % 2 == 0) ++n;
    return propagate(f, which, Vec2{box.xmin, box.ymin}, box.width() / (n - 1),
                     box.height() / (n - 1), n, n, [](const Vec2&) { return true; });
}

OscillationResult oscillation(const VectorField& f, const Ball& ball, int n0, double stable_tol,
                              int max_refine) {
    OscillationResult out;
    out.center = ball.center;
    out.radius = ball.radius;
    int n = n0 % 2 == 0 ? n0 + 1 : n0;
    BranchField b = branch_field(f, ball, n);
    out.osc = b.osc();
    out.min_at = b.min_at;
    out.max_at = b.max_at;
    out.n = n;
    out.grid_spacing = b.dx;
    for (int round = 0; round < max_refine; ++round) {
        const int n_next = 2 * n - 1;
        BranchField fine = branch_field(f, ball, n_next);
        out.refinement_delta = std::fabs(fine.osc() - out.osc);
        out.osc = fine.osc();
        out.min_at = fine.min_at;
        out.max_at = fine.max_at;
        out.n = n_next;
        out.grid_spacing = fine.dx;
        n = n_next;
        if (out.refinement_delta < stable_tol) {
            out.stable = true;
            break;
        }
    }
    return out;
}

OscillationResult oscillation_box(const VectorField& f, const Box& box, int n) {
    BranchField b = branch_field(f, box, n);
    OscillationResult out;
    out.center = box.center();
    out.radius = 0.5 * std::max(box.width(), box.height());
    out.grid_spacing = std::max(b.dx, b.dy);
    out.n = b.nx;
    out.osc = b.osc();
    out.min_at = b.min_at;
    out.max_at = b.max_at;
    out.stable = true;
    return out;
}

// ---------------------------------------------------------------------------
// Pointwise helpers
// ---------------------------------------------------------------------------

double phi_at(const VectorField& f, const Vec2& x) {
    const Vec2 v = f.velocity(x);
    if (norm(v) < kStagnationTol) throw HypothesisError("stagnation point", x);
    return wrap_to_2pi(std::atan2(v.y, v.x));
}

double phi_near(const VectorField& f, const Vec2& x, double ref) {
    const Vec2 v = f.velocity(x);
    if (norm(v) < kStagnationTol) throw HypothesisError("stagnation point", x);
    return align(std::atan2(v.y, v.x), ref);
}

Vec2 grad_phi_formula(const VectorField& f, const Vec2& x) {
    const Vec2 gv1{eval(differentiate(f.v1, Var::X1), x, f.env),
                   eval(differentiate(f.v1, Var::X2), x, f.env)};
    const Vec2 gv2{eval(differentiate(f.v2, Var::X1), x, f.env),
                   eval(differentiate(f.v2, Var::X2), x, f.env)};
    const Vec2 v = f.velocity(x);
    return (gv2 * v.x - gv1 * v.y) / norm2(v);
}

Vec2 grad_phi_fd(const VectorField& f, const Vec2& x, double h) {
    const double ref = phi_at(f, x);
    const double e = phi_near(f, {x.x + h, x.y}, ref);
    const double w = phi_near(f, {x.x - h, x.y}, ref);
    const double n = phi_near(f, {x.x, x.y + h}, ref);
    const double s = phi_near(f, {x.x, x.y - h}, ref);
    return {(e - w) / (2.0 * h), (n - s) / (2.0 * h)};
}

double divform_residual(const VectorField& f, const std::vector<Vec2>& points, double h) {
    auto a = [&](const Vec2& p) { return norm2(f.velocity(p)); };
    double worst = 0.0;
    for (const Vec2& p : points) {
        const double ref = phi_at(f, p);
        const double pc = ref;
        const double pe = phi_near(f, {p.x + h, p.y}, ref);
        const double pw = phi_near(f, {p.x - h, p.y}, ref);
        const double pn = phi_near(f, {p.x, p.y + h}, ref);
        const double ps = phi_near(f, {p.x, p.y - h}, ref);
        const double flux = a({p.x + 0.5 * h, p.y}) * (pe - pc) -
                            a({p.x - 0.5 * h, p.y}) * (pc - pw) +
                            a({p.x, p.y + 0.5 * h}) * (pn - pc) -
                            a({p.x, p.y - 0.5 * h}) * (pc - ps);
        worst = std::max(worst, std::fabs(flux / (h * h)));
    }
    return worst;
}

double semilinear_dx_residual(const VectorField& f, const StreamFunction& u,
                              const std::function<double(double)>& fp,
                              const std::vector<Vec2>& points) {
    const Expr lap_v2 = simplify(differentiate(differentiate(f.v2, Var::X1), Var::X1) +
                                 differentiate(differentiate(f.v2, Var::X2), Var::X2));
    double worst = 0.0;
    for (const Vec2& p : points) {
        const double r = eval(lap_v2, p, f.env) + fp(u(p)) * eval(f.v2, p, f.env);
        worst = std::max(worst, std::fabs(r));
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Log-growth check
// ---------------------------------------------------------------------------

std::vector<GrowthCheck> check_log_growth(const VectorField& f, const std::vector<double>& radii,
                                          double eta, int hyp_grid_n, double hyp_spacing) {
    for (double r : radii)
        if (!(r >= 2.0)) throw std::invalid_argument("log-growth radii must be at least 2");
    const ConstantsReport consts = constants(eta);

    std::vector<GrowthCheck> out(radii.size());
    for (std::size_t k = 0; k < radii.size(); ++k) {
        const double R = radii[k];
        GrowthCheck& g = out[k];
        g.radius = R;
        g.bound = consts.c_eta * std::log(R);

        // hypothesis scan on a grid of unit-ball centers
        std::vector<Vec2> centers;
        const int span = static_cast<int>(std::floor(R / hyp_spacing));
        for (int i = -span; i <= span; ++i)
            for (int j = -span; j <= span; ++j) {
                const Vec2 c{i * hyp_spacing, j * hyp_spacing};
                if (norm(c) <= R) centers.push_back(c);
            }
        std::vector<double> oscs(centers.size(), 0.0);
        parallel_for(centers.size(), [&](std::size_t i) {
            const BranchField b = branch_field(f, Ball{centers[i], 1.0}, hyp_grid_n);
            oscs[i] = b.osc();
        });
        g.hypothesis_ok = true;
        for (std::size_t i = 0; i < centers.size(); ++i) {
            g.hypothesis_worst_osc = std::max(g.hypothesis_worst_osc, oscs[i]);
            if (oscs[i] >= 0.25 * M_PI && g.hypothesis_ok) {
                g.hypothesis_ok = false;
                g.hypothesis_fail_at = centers[i];
            }
        }

        const OscillationResult osc = oscillation(f, Ball{{0, 0}, R}, 201, 1e-4, 3);
        g.measured_osc = osc.osc;
        g.grid_n = osc.n;
        g.bound_holds = g.measured_osc <= g.bound;
        g.claimed = g.hypothesis_ok && g.bound_holds;
    }
    return out;
}

} // namespace flowlab

#include "flowlab/lemma_lab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

namespace flowlab {

// ---------------------------------------------------------------------------
// ReconstructedF
// ---------------------------------------------------------------------------

namespace {

std::size_t hermite_bracket(const std::vector<double>& xs, double x) {
    auto it = std::upper_bound(xs.begin(), xs.end(), x);
    std::size_t hi = static_cast<std::size_t>(it - xs.begin());
    if (hi == 0) hi = 1;
    if (hi >= xs.size()) hi = xs.size() - 1;
    return hi - 1;
}

} // namespace

double ReconstructedF::value(double sv) const {
    if (!in_range(sv))
        throw std::out_of_range("reconstructed f queried outside its tabulated range");
    const std::size_t i = hermite_bracket(s, sv);
    const double h = s[i + 1] - s[i];
    const double th = (sv - s[i]) / h;
    const double th2 = th * th, th3 = th2 * th;
    return f[i] * (2 * th3 - 3 * th2 + 1) + slope[i] * h * (th3 - 2 * th2 + th) +
           f[i + 1] * (-2 * th3 + 3 * th2) + slope[i + 1] * h * (th3 - th2);
}

double ReconstructedF::derivative(double sv) const {
    if (!in_range(sv))
        throw std::out_of_range("reconstructed f queried outside its tabulated range");
    const std::size_t i = hermite_bracket(s, sv);
    const double h = s[i + 1] - s[i];
    const double th = (sv - s[i]) / h;
    const double th2 = th * th;
    return f[i] * (6 * th2 - 6 * th) / h + slope[i] * (3 * th2 - 4 * th + 1) +
           f[i + 1] * (-6 * th2 + 6 * th) / h + slope[i + 1] * (3 * th2 - 2 * th);
}

ReconstructedF reconstruct_f(const VectorField& field, const StreamFunction& u,
                             const IntegratorConfig& cfg) {
    const Trajectory sigma = trace_gradient(field, u, Vec2{0, 0}, cfg);
    if (sigma.has_event(EventKind::Stagnation))
        throw HypothesisError("stagnation encountered along the base gradient trajectory",
                              sigma.first_event(EventKind::Stagnation)->at);
    const Expr lap_u = vorticity(field); // laplacian(u) equals the curl of v

    ReconstructedF rf;
    double last = -std::numeric_limits<double>::infinity();
    for (const auto& sample : sigma.samples) {
        const double sv = sample.u;
        if (sv <= last + 1e-12) continue; // drop numerically duplicate knots
        rf.s.push_back(sv);
        rf.f.push_back(-eval(lap_u, sample.x, field.env));
        last = sv;
    }
    if (rf.s.size() < 2)
        throw std::runtime_error("base trajectory produced too few samples to tabulate f");
    rf.range_small = (rf.s.back() - rf.s.front()) < 1.0;

    // Fritsch-Carlson monotone cubic slopes
    const std::size_t n = rf.s.size();
    std::vector<double> h(n - 1), delta(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        h[i] = rf.s[i + 1] - rf.s[i];
        delta[i] = (rf.f[i + 1] - rf.f[i]) / h[i];
    }
    rf.slope.assign(n, 0.0);
    auto clip_end = [](double m, double d) {
        if (d == 0.0 || m * d <= 0.0) return 0.0;
        if (std::fabs(m) > 3.0 * std::fabs(d)) return 3.0 * d;
        return m;
    };
    if (n == 2) {
        rf.slope[0] = rf.slope[1] = delta[0];
    } else {
        rf.slope[0] = clip_end(((2 * h[0] + h[1]) * delta[0] - h[0] * delta[1]) / (h[0] + h[1]),
                               delta[0]);
        rf.slope[n - 1] = clip_end(((2 * h[n - 2] + h[n - 3]) * delta[n - 2] -
                                    h[n - 2] * delta[n - 3]) /
                                       (h[n - 2] + h[n - 3]),
                                   delta[n - 2]);
        for (std::size_t i = 1; i + 1 < n; ++i) {
            if (delta[i - 1] * delta[i] <= 0.0) {
                rf.slope[i] = 0.0;
            } else {
                const double w1 = 2 * h[i] + h[i - 1];
                const double w2 = h[i] + 2 * h[i - 1];
                rf.slope[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
            }
        }
    }
    return rf;
}

SemilinearCheck verify_semilinear(const VectorField& field, const StreamFunction& u,
                                  const ReconstructedF& rf, const std::vector<Vec2>& points) {
    const Expr lap_u = vorticity(field);
    SemilinearCheck out;
    for (const Vec2& p : points) {
        const double uv = u(p);
        if (!rf.in_range(uv)) {
            ++out.skipped;
            continue;
        }
        const double r = eval(lap_u, p, field.env) + rf(uv);
        out.max_residual = std::max(out.max_residual, std::fabs(r));
        ++out.evaluated;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Pattern scans
// ---------------------------------------------------------------------------

PatternScanReport scan_pattern(const std::vector<double>& ts, const std::vector<Vec2>& pts,
                               double dist_threshold,
                               const std::function<bool(std::size_t)>& hypothesis_ok,
                               double collinear_tol_scale) {
    if (ts.size() != pts.size()) throw std::invalid_argument("sample count mismatch");
    PatternScanReport report;
    report.threshold = dist_threshold;
    const std::size_t n = pts.size();
    std::map<std::size_t, bool> hyp_cache;
    auto hyp = [&](std::size_t i) {
        auto it = hyp_cache.find(i);
        if (it != hyp_cache.end()) return it->second;
        const bool ok = hypothesis_ok(i);
        hyp_cache.emplace(i, ok);
        return ok;
    };

    // one scan direction; "reversed" mirrors the index order to cover the
    // tau1 > tau2 > tau3 >= tau4 alternative
    auto run = [&](bool reversed) {
        auto idx = [&](std::size_t k) { return reversed ? n - 1 - k : k; };
        for (std::size_t i1 = 0; i1 + 2 < n; ++i1) {
            const Vec2 p1 = pts[idx(i1)];
            for (std::size_t i2 = i1 + 1; i2 + 1 < n; ++i2) {
                const Vec2 p2 = pts[idx(i2)];
                for (std::size_t i3 = i2 + 1; i3 < n; ++i3) {
                    const Vec2 p3 = pts[idx(i3)];
                    const Vec2 seg = p3 - p2;
                    const double len = norm(seg);
                    if (len <= 0.0) continue;
                    const double tol = collinear_tol_scale * len;
                    const double perp = std::fabs(cross(seg, p1 - p2)) / len;
                    if (perp > tol) continue;
                    const double along = dot(p1 - p2, seg) / len;
                    if (along < -tol || along > len + tol) continue;
                    // betweenness holds; now search tau4 >= tau3
                    for (std::size_t i4 = i3; i4 < n; ++i4) {
                        ++report.quadruples_scanned;
                        if (dist(p1, pts[idx(i4)]) >= dist_threshold) continue;
                        ++report.candidates;
                        if (!hyp(idx(i1))) {
                            ++report.hypothesis_misses;
                            continue;
                        }
                        if (report.violations.size() < 8) {
                            PatternViolation v;
                            v.t1 = ts[idx(i1)];
                            v.t2 = ts[idx(i2)];
                            v.t3 = ts[idx(i3)];
                            v.t4 = ts[idx(i4)];
                            v.at = p1;
                            v.dist14 = dist(p1, pts[idx(i4)]);
                            report.violations.push_back(v);
                        }
                    }
                }
            }
        }
    };
    run(false);
    run(true);
    return report;
}

namespace {

PatternScanReport scan_orbit(const VectorField& f, const Trajectory& traj, double threshold,
                             double osc_threshold, int max_samples, const char* tag) {
    std::vector<double> ts;
    std::vector<Vec2> pts;
    const std::size_t n = traj.samples.size();
    const std::size_t stride = n > static_cast<std::size_t>(max_samples)
                                   ? (n + max_samples - 1) / max_samples
                                   : 1;
    for (std::size_t i = 0; i < n; i += stride) {
        ts.push_back(traj.samples[i].t);
        pts.push_back(traj.samples[i].x);
    }
    auto hypothesis = [&](std::size_t i) {
        const BranchField b = branch_field(f, Ball{pts[i], 1.0}, 41);
        return b.osc() < osc_threshold;
    };
    PatternScanReport report = scan_pattern(ts, pts, threshold, hypothesis);
    std::ostringstream id;
    id << tag << " from (" << traj.samples.front().x.x << "," << traj.samples.front().x.y << ")";
    report.trajectory_id = id.str();
    return report;
}

} // namespace

PatternScanReport scan_oneleft(const VectorField& f, const Trajectory& traj, double eta,
                               int max_samples) {
    if (traj.kind != TraceKind::Gradient && traj.kind != TraceKind::GradientArclength)
        throw std::invalid_argument("scan_oneleft expects a gradient trajectory");
    return scan_orbit(f, traj, std::pow(eta, 4.0), 0.5 * M_PI, max_samples, "gradient");
}

PatternScanReport scan_oneleftbis(const VectorField& f, const Trajectory& traj, double eta,
                                  int max_samples) {
    if (traj.kind != TraceKind::Streamline && traj.kind != TraceKind::StreamlineArclength)
        throw std::invalid_argument("scan_oneleftbis expects a streamline trajectory");
    return scan_orbit(f, traj, 0.25 * eta * eta, 0.25 * M_PI, max_samples, "streamline");
}

// ---------------------------------------------------------------------------
// Hausdorff distance
// ---------------------------------------------------------------------------

namespace {

double directed_hausdorff(const Curve& from, const Curve& to) {
    double worst = 0.0;
    for (const Vec2& p : from.points) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i + 1 < to.points.size(); ++i)
            best = std::min(best, point_segment_dist(p, to.points[i], to.points[i + 1]));
        worst = std::max(worst, best);
    }
    return worst;
}

double max_segment_length(const Curve& c) {
    double m = 0.0;
    for (std::size_t i = 0; i + 1 < c.points.size(); ++i)
        m = std::max(m, dist(c.points[i], c.points[i + 1]));
    return m;
}

} // namespace

HausdorffResult hausdorff(const Curve& c1, const Curve& c2) {
    HausdorffResult out;
    out.value = std::max(directed_hausdorff(c1, c2), directed_hausdorff(c2, c1));
    out.error_bound = 0.5 * std::max(max_segment_length(c1), max_segment_length(c2));
    return out;
}

// ---------------------------------------------------------------------------
// Foliation probe
// ---------------------------------------------------------------------------

double min_distance_to_trajectory(const Trajectory& traj, const Vec2& x) {
    const auto& s = traj.samples;
    if (s.empty()) throw std::invalid_argument("empty trajectory");
    if (s.size() == 1) return dist(s.front().x, x);
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_i = 0;
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
        const double d = point_segment_dist(x, s[i].x, s[i + 1].x);
        if (d < best) {
            best = d;
            best_i = i;
        }
    }
    // golden-section polish on the dense output around the winning segment
    double a = s[best_i].t;
    double b = s[std::min(best_i + 2, s.size() - 1)].t;
    if (best_i > 0) a = s[best_i - 1].t;
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    auto g = [&](double t) { return dist(traj.position_at(t), x); };
    double fc = g(c), fd = g(d);
    for (int it = 0; it < 80 && (b - a) > 1e-12 * std::max(1.0, std::fabs(b)); ++it) {
        if (fc < fd) {
            b = d; d = c; fd = fc;
            c = b - inv_phi * (b - a);
            fc = g(c);
        } else {
            a = c; c = d; fc = fd;
            d = a + inv_phi * (b - a);
            fd = g(d);
        }
    }
    return std::min(best, std::min(fc, fd));
}

std::vector<FoliationProbe> foliation_probe(const VectorField& f, const StreamFunction& u,
                                            const std::vector<Vec2>& samples,
                                            const IntegratorConfig& sigma_cfg,
                                            const IntegratorConfig& gamma_cfg) {
    std::vector<FoliationProbe> out;
    out.reserve(samples.size());
    for (const Vec2& x : samples) {
        FoliationProbe probe;
        probe.sample = x;
        probe.level = u(x);
        try {
            probe.level_point = level_hit(f, u, Vec2{0, 0}, probe.level, sigma_cfg);
            const Trajectory gamma = trace_streamline(f, u, probe.level_point, gamma_cfg);
            probe.min_distance = min_distance_to_trajectory(gamma, x);
            probe.reached = true;
        } catch (const std::exception& ex) {
            probe.reached = false;
            probe.note = ex.what();
        }
        out.push_back(probe);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Argument drift along orbits
// ---------------------------------------------------------------------------

namespace {

// phi at the trajectory's t, on the branch transported from the start sample
double transport_phi(const VectorField& f, const Trajectory& traj, double t_from, double t_to,
                     double phi_from) {
    const auto& s = traj.samples;
    double phi = phi_from;
    if (t_to >= t_from) {
        for (const auto& sample : s) {
            if (sample.t <= t_from) continue;
            if (sample.t >= t_to) break;
            phi = phi_near(f, sample.x, phi);
        }
    } else {
        for (auto it = s.rbegin(); it != s.rend(); ++it) {
            if (it->t >= t_from) continue;
            if (it->t <= t_to) break;
            phi = phi_near(f, it->x, phi);
        }
    }
    return phi_near(f, traj.position_at(t_to), phi);
}

std::vector<PairCheck> check_drift(const VectorField& f, const StreamFunction& u, double eta,
                                   const std::vector<std::pair<Vec2, double>>& pairs,
                                   const IntegratorConfig& cfg, bool gradient_kind) {
    const ConstantsReport consts = constants(eta);
    const double constant = gradient_kind ? consts.c1 : consts.c2;
    const double osc_threshold = gradient_kind ? 0.5 * M_PI : 0.25 * M_PI;

    std::vector<PairCheck> out;
    out.reserve(pairs.size());
    for (const auto& [seed, t_y] : pairs) {
        PairCheck pc;
        pc.x = seed;
        IntegratorConfig run_cfg = cfg;
        run_cfg.t_begin = std::min(0.0, t_y);
        run_cfg.t_end = std::max(0.0, t_y);
        const Trajectory traj = gradient_kind ? trace_gradient(f, u, seed, run_cfg)
                                              : trace_streamline(f, u, seed, run_cfg);
        pc.y = traj.position_at(t_y);
        pc.gap = dist(pc.x, pc.y);
        pc.bound = constant * std::log(3.0 + pc.gap);

        const OscillationResult osc = oscillation(f, Ball{seed, 1.0}, 81, 1e-3, 1);
        pc.hypothesis_ok = osc.osc < osc_threshold;
        if (!pc.hypothesis_ok) {
            pc.skipped = true;
            out.push_back(pc);
            continue;
        }
        const double phi_x = phi_at(f, seed);
        const double phi_y = transport_phi(f, traj, 0.0, t_y, phi_x);
        pc.lhs = std::fabs(phi_x - phi_y);
        pc.pass = pc.lhs <= pc.bound;
        out.push_back(pc);
    }
    return out;
}

} // namespace

std::vector<PairCheck> check_lemma_log(const VectorField& f, const StreamFunction& u, double eta,
                                       const std::vector<std::pair<Vec2, double>>& pairs,
                                       const IntegratorConfig& cfg) {
    return check_drift(f, u, eta, pairs, cfg, true);
}

std::vector<PairCheck> check_lemma_logbis(const VectorField& f, const StreamFunction& u,
                                          double eta,
                                          const std::vector<std::pair<Vec2, double>>& pairs,
                                          const IntegratorConfig& cfg) {
    return check_drift(f, u, eta, pairs, cfg, false);
}

// ---------------------------------------------------------------------------
// Shear detection
// ---------------------------------------------------------------------------

ShearVerdict detect_shear(const VectorField& f, const Box& box, double tol) {
    ShearVerdict verdict;
    verdict.bounds = estimate_eta(f, box, 101);

    // growth probe: does max |v| keep climbing on the doubled box?
    const FieldBounds wide = estimate_eta(f, box.scaled(2.0), 101);
    if (wide.eta_hi > 4.0 * verdict.bounds.eta_hi && verdict.bounds.eta_hi > 0.0) {
        verdict.boundedness_suspect = true;
        std::ostringstream os;
        os << "max |v| grows from " << verdict.bounds.eta_hi << " to " << wide.eta_hi
           << " on the doubled box; unbounded-looking field";
        verdict.notes.push_back(os.str());
    }

    if (!verdict.bounds.admissible) {
        verdict.kind = ShearVerdictKind::HypothesisViolated;
        std::ostringstream os;
        os << "stagnation: min |v| = " << verdict.bounds.eta_lo << " at ("
           << verdict.bounds.min_at.x << "," << verdict.bounds.min_at.y << ")";
        verdict.reason = os.str();
        return verdict;
    }

    const OscillationResult osc = oscillation_box(f, box, 201);
    verdict.osc = osc.osc;
    if (osc.osc > tol) {
        verdict.kind = ShearVerdictKind::NonShear;
        return verdict;
    }

    verdict.kind = ShearVerdictKind::Shear;
    verdict.direction_angle = phi_at(f, box.center());
    verdict.e = {std::cos(verdict.direction_angle), std::sin(verdict.direction_angle)};

    // profile V(s) = v(s e_perp) . e along the e_perp axis, restricted to the box
    const Vec2 e_perp{-verdict.e.y, verdict.e.x};
    double s_lo = -std::numeric_limits<double>::infinity();
    double s_hi = std::numeric_limits<double>::infinity();
    auto restrict_axis = [&](double dir_component, double lo, double hi) {
        if (std::fabs(dir_component) < 1e-15) return;
        double a = lo / dir_component, b = hi / dir_component;
        if (a > b) std::swap(a, b);
        s_lo = std::max(s_lo, a);
        s_hi = std::min(s_hi, b);
    };
    restrict_axis(e_perp.x, box.xmin, box.xmax);
    restrict_axis(e_perp.y, box.ymin, box.ymax);
    if (!std::isfinite(s_lo) || !std::isfinite(s_hi)) {
        s_lo = -1.0;
        s_hi = 1.0;
    }

    const int m = 101;
    bool any_pos = false, any_neg = false;
    verdict.profile_min_abs = std::numeric_limits<double>::infinity();
    for (int i = 0; i < m; ++i) {
        const double s = s_lo + (s_hi - s_lo) * i / (m - 1);
        const Vec2 p = e_perp * s;
        const double V = dot(f.velocity(p), verdict.e);
        verdict.profile.emplace_back(s, V);
        any_pos = any_pos || V > 0.0;
        any_neg = any_neg || V < 0.0;
        verdict.profile_min_abs = std::min(verdict.profile_min_abs, std::fabs(V));
    }
    verdict.profile_constant_sign =
        (any_pos != any_neg) && verdict.profile_min_abs > kStagnationTol;
    return verdict;
}

} // namespace flowlab

#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "flowlab/arcs.hpp"
#include "flowlab/argument.hpp"
#include "flowlab/constants.hpp"
#include "flowlab/field.hpp"
#include "flowlab/tracer.hpp"

namespace flowlab {

// ---------------------------------------------------------------------------
// Semilinear reconstruction:  f(s) = -laplacian(u) at the point of the base
// gradient trajectory where u equals s.  Tabulated along the orbit through
// the origin and interpolated monotonically (Fritsch-Carlson cubic).
// ---------------------------------------------------------------------------

struct ReconstructedF {
    std::vector<double> s;       // strictly increasing u samples
    std::vector<double> f;       // -laplacian(u) at those samples
    std::vector<double> slope;   // monotone-cubic tangents
    bool range_small = false;    // s-range shorter than 1 unit

    double s_min() const { return s.front(); }
    double s_max() const { return s.back(); }
    bool in_range(double sv) const { return sv >= s_min() && sv <= s_max(); }

    double value(double sv) const;       // throws outside [s_min, s_max]
    double derivative(double sv) const;
    double operator()(double sv) const { return value(sv); }
};

ReconstructedF reconstruct_f(const VectorField& f, const StreamFunction& u,
                             const IntegratorConfig& cfg);

struct SemilinearCheck {
    double max_residual = 0.0;
    int evaluated = 0;
    int skipped = 0; // points whose u-value fell outside the tabulated range
};

// max over points of |laplacian(u)(x) + f_interp(u(x))|
SemilinearCheck verify_semilinear(const VectorField& f, const StreamFunction& u,
                                  const ReconstructedF& rf, const std::vector<Vec2>& points);

// ---------------------------------------------------------------------------
// Forbidden-pattern scans along traced orbits
// ---------------------------------------------------------------------------

struct PatternViolation {
    double t1 = 0, t2 = 0, t3 = 0, t4 = 0;
    Vec2 at;             // the revisited point sigma(tau_1)
    double dist14 = 0.0;
};

struct PatternScanReport {
    std::string trajectory_id;
    double threshold = 0.0;        // eta^4 or eta^2/4
    long quadruples_scanned = 0;
    long candidates = 0;           // geometric pattern found, pre-hypothesis
    long hypothesis_misses = 0;    // candidates dropped: small-ball osc too large
    std::vector<PatternViolation> violations;

    bool clean() const { return violations.empty(); }
};

// Detector core: looks for tau1 < tau2 < tau3 <= tau4 (and the reversed
// ordering) with p(tau1) inside the open segment (p(tau2), p(tau3)) up to the
// collinearity tolerance and |p(tau1) - p(tau4)| below the threshold.
// hypothesis_ok(i) gates a candidate at sample i into a violation.
PatternScanReport scan_pattern(const std::vector<double>& ts, const std::vector<Vec2>& pts,
                               double dist_threshold,
                               const std::function<bool(std::size_t)>& hypothesis_ok,
                               double collinear_tol_scale = 1e-6);

// Gradient-orbit scan: threshold eta^4, small-ball hypothesis osc < pi/2.
PatternScanReport scan_oneleft(const VectorField& f, const Trajectory& traj, double eta,
                               int max_samples = 400);
// Streamline scan: threshold eta^2/4, small-ball hypothesis osc < pi/4.
PatternScanReport scan_oneleftbis(const VectorField& f, const Trajectory& traj, double eta,
                                  int max_samples = 400);

// ---------------------------------------------------------------------------
// Hausdorff proximity of sampled curves
// ---------------------------------------------------------------------------

struct HausdorffResult {
    double value = 0.0;
    double error_bound = 0.0; // half the coarsest sample spacing involved
};

HausdorffResult hausdorff(const Curve& c1, const Curve& c2);

// ---------------------------------------------------------------------------
// Foliation probe: every point should lie on the streamline traced from its
// u-level point on the base gradient trajectory.
// ---------------------------------------------------------------------------

struct FoliationProbe {
    Vec2 sample;
    double level = 0.0;        // u(sample)
    Vec2 level_point;          // point on the base orbit with that u-value
    double min_distance = 0.0; // sample's distance to the traced streamline
    bool reached = false;      // false when the level was outside the span
    std::string note;
};

std::vector<FoliationProbe> foliation_probe(const VectorField& f, const StreamFunction& u,
                                            const std::vector<Vec2>& samples,
                                            const IntegratorConfig& sigma_cfg,
                                            const IntegratorConfig& gamma_cfg);

// Distance from a point to a trajectory, refined through the dense output.
double min_distance_to_trajectory(const Trajectory& traj, const Vec2& x);

// ---------------------------------------------------------------------------
// Argument-drift checks along orbits (branch transported along the curve)
// ---------------------------------------------------------------------------

struct PairCheck {
    Vec2 x, y;
    double gap = 0.0;       // |x - y|
    double lhs = 0.0;       // |phi(x) - phi(y)| along the transported branch
    double bound = 0.0;     // C(eta) ln(3 + |x - y|)
    bool hypothesis_ok = false;
    bool skipped = false;   // hypothesis failed; bound not asserted
    bool pass = false;
};

// Gradient-orbit drift vs C1(eta) ln(3+gap); pairs are (seed, t of y).
std::vector<PairCheck> check_lemma_log(const VectorField& f, const StreamFunction& u, double eta,
                                       const std::vector<std::pair<Vec2, double>>& pairs,
                                       const IntegratorConfig& cfg);
// Streamline drift vs C2(eta) ln(3+gap).
std::vector<PairCheck> check_lemma_logbis(const VectorField& f, const StreamFunction& u,
                                          double eta,
                                          const std::vector<std::pair<Vec2, double>>& pairs,
                                          const IntegratorConfig& cfg);

// ---------------------------------------------------------------------------
// Shear detection
// ---------------------------------------------------------------------------

enum class ShearVerdictKind { Shear, NonShear, HypothesisViolated };

struct ShearVerdict {
    ShearVerdictKind kind = ShearVerdictKind::HypothesisViolated;
    double direction_angle = 0.0;                  // defined for Shear verdicts
    Vec2 e;                                        // (cos, sin) of the direction
    std::vector<std::pair<double, double>> profile; // (s, V(s)) along e_perp
    bool profile_constant_sign = false;
    double profile_min_abs = 0.0;
    double osc = 0.0;                              // argument oscillation over the box
    std::string reason;                            // for hypothesis violations
    bool boundedness_suspect = false;              // |v| keeps growing on larger boxes
    std::vector<std::string> notes;
    FieldBounds bounds;
};

ShearVerdict detect_shear(const VectorField& f, const Box& box, double tol = 1e-6);

} // namespace flowlab

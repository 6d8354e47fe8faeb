#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "flowlab/constants.hpp"
#include "flowlab/field.hpp"
#include "flowlab/tracer.hpp"

namespace flowlab {

// Raised when a computation requires |v| > 0 on a region and the sampling
// finds a (near-)stagnation point instead.
class HypothesisError : public std::runtime_error {
public:
    HypothesisError(const std::string& what, Vec2 at) : std::runtime_error(what), at_(at) {}
    Vec2 at() const { return at_; }

private:
    Vec2 at_;
};

// ---------------------------------------------------------------------------
// Continuous argument along a curve
// ---------------------------------------------------------------------------

struct ArgumentTrace {
    std::vector<double> t;
    std::vector<double> theta;   // unwrapped, theta.front() in [0, 2pi)

    double total_turn() const { return theta.back() - theta.front(); }
    double delta_abs() const { return std::fabs(total_turn()); }
};

// Unwraps the tangent argument of a trajectory (velocities are the tangents);
// steps whose angle jump exceeds pi/2 are refined through the dense output.
ArgumentTrace unwrap(const Trajectory& traj);
ArgumentTrace unwrap(const Trajectory& traj, double t_lo, double t_hi);

// Polyline variant using segment directions; no refinement is possible, so an
// angle jump of pi or more between consecutive segments is an error.
ArgumentTrace unwrap_polyline(const std::vector<Vec2>& points);

// Core used by both: tangents at given knots plus an optional refiner.
ArgumentTrace unwrap_tangents(const std::vector<double>& knots,
                              const std::function<Vec2(double)>& tangent, bool can_refine);

// ---------------------------------------------------------------------------
// Continuous argument of the field over a region
// ---------------------------------------------------------------------------

enum class AngleOf { Field, StreamGradient };

// One continuous branch of the direction angle over a grid, built by
// breadth-first propagation from the region's center node; every step picks
// the 2pi-representative nearest the already-assigned neighbour.
struct BranchField {
    Vec2 grid_origin;
    double dx = 0.0, dy = 0.0;
    int nx = 0, ny = 0;
    std::vector<double> phi;             // nx*ny, NaN on inactive nodes
    std::vector<std::uint8_t> active;

    double min_phi = 0.0, max_phi = 0.0;
    Vec2 min_at, max_at;

    double osc() const { return max_phi - min_phi; }
    Vec2 node(int i, int j) const { return {grid_origin.x + i * dx, grid_origin.y + j * dy}; }
    bool is_active(int i, int j) const { return active[j * nx + i] != 0; }
    double at(int i, int j) const { return phi[j * nx + i]; }
};

BranchField branch_field(const VectorField& f, const Ball& ball, int n,
                         AngleOf which = AngleOf::Field);
BranchField branch_field(const VectorField& f, const Box& box, int n,
                         AngleOf which = AngleOf::Field);

struct OscillationResult {
    Vec2 center;
    double radius = 0.0;
    double grid_spacing = 0.0;
    int n = 0;
    double osc = 0.0;
    Vec2 min_at, max_at;
    bool stable = false;             // refinement changed osc by < stable_tol
    double refinement_delta = 0.0;
};

// Grid oscillation of the field argument over a ball, with grid-doubling
// refinement until the value moves by less than stable_tol.
OscillationResult oscillation(const VectorField& f, const Ball& ball, int n0 = 201,
                              double stable_tol = 1e-4, int max_refine = 3);

// Single-shot value over a box (no refinement); used by the shear detector.
OscillationResult oscillation_box(const VectorField& f, const Box& box, int n);

// ---------------------------------------------------------------------------
// Pointwise branch helpers (finite-difference work)
// ---------------------------------------------------------------------------

// Field direction angle at x, anchored into [0, 2pi).
double phi_at(const VectorField& f, const Vec2& x);
// The 2pi-representative of the angle at x nearest to ref.
double phi_near(const VectorField& f, const Vec2& x, double ref);

// grad phi from the exact identity |w|^2 grad phi = v1 grad v2 - v2 grad v1.
Vec2 grad_phi_formula(const VectorField& f, const Vec2& x);

// Central-difference gradient of the local branch, spacing h.
Vec2 grad_phi_fd(const VectorField& f, const Vec2& x, double h);

// Max over points of the 5-point conservative-form residual of
// div(|w|^2 grad phi) at spacing h; second-order for smooth admissible flows.
double divform_residual(const VectorField& f, const std::vector<Vec2>& points, double h);

// Max over points of |laplacian(v2) + fp(u) * v2|, the x1-derivative of the
// semilinear stream-function equation (v2 = du/dx1); fp supplies f'.
double semilinear_dx_residual(const VectorField& f, const StreamFunction& u,
                              const std::function<double(double)>& fp,
                              const std::vector<Vec2>& points);

// ---------------------------------------------------------------------------
// Log-growth check
// ---------------------------------------------------------------------------

struct GrowthCheck {
    double radius = 0.0;
    double measured_osc = 0.0;
    double bound = 0.0;              // c_eta * ln R
    bool hypothesis_ok = false;      // osc < pi/4 on all sampled unit balls
    Vec2 hypothesis_fail_at;
    double hypothesis_worst_osc = 0.0;
    bool bound_holds = false;        // measured_osc <= bound
    bool claimed = false;            // hypothesis_ok && bound_holds
    int grid_n = 0;
};

// For each R in radii (each >= 2): scans the small-ball hypothesis
// osc_{B(x,1)} phi < pi/4 on a spacing-0.5 grid of centers in B(0,R), then
// measures osc over B(0,R) and compares against c_eta(eta) * ln R.  A failed
// hypothesis downgrades the record to a measurement (claimed = false) rather
// than an assertion of the bound.
std::vector<GrowthCheck> check_log_growth(const VectorField& f, const std::vector<double>& radii,
                                          double eta, int hyp_grid_n = 21,
                                          double hyp_spacing = 0.5);

} // namespace flowlab

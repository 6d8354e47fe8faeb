#pragma once

#include <string>

namespace flowlab {

// Explicit constants attached to the log-growth machinery, all functions of
// the admissibility constant eta in (0, 1]:
//
//   C1(eta)  = sup_{t >= 1} 288 pi eta^-2 (log2(t eta^-4) + 2) / ln(3 + t)
//   C2(eta)  = max( sup_{t >= 1} 384 pi (log_{1+w}(4 t eta^-2) + 1) / ln(3 + t),
//                   288 pi (2 eta^-4 + 1) ),   w = eta^2 / 2
//   c_eta    = 2 sup_{rho >= 2} ( C2 ln(3 + rho + eta^-2 rho)
//                               + C1 ln(3 + eta^-2 rho) ) / ln(rho)
//
// Suprema are located by a coarse log-spaced scan followed by golden-section
// refinement, then compared against the analytic tail limits.
struct ConstantsReport {
    double eta = 1.0;
    double omega = 0.5;          // eta^2 / 2

    double c1 = 0.0;
    double c1_argmax = 0.0;      // t attaining the sup (tail limit wins: +inf)
    double c1_tail_limit = 0.0;  // 288 pi eta^-2 / ln 2

    double c2 = 0.0;
    double c2_sup_h2 = 0.0;
    double c2_argmax = 0.0;
    double c2_tail_limit = 0.0;  // 384 pi / ln(1 + omega)
    double c2_floor = 0.0;       // 288 pi (2 eta^-4 + 1)

    double c_eta = 0.0;
    double c_eta_argmax = 0.0;
    double bracket_rel_accuracy = 1e-8;
};

ConstantsReport constants(double eta);

// Sub-segment partition integers used by the two chaining arguments, for an
// endpoint gap d >= 1:
//   m_dyadic    = [log2(d eta^-4)] + 2          (halving partition)
//   m_geometric = [log_{1+w}(4 d eta^-2)] + 2   (ratio-(1+w) partition)
//   n_cap       = [2 eta^-4 + 1]
// together with the tail lengths they are chosen to guarantee:
//   2^(1-m) d < eta^4   and   (1+w)^-(m-1) d < eta^2 / 4.
struct PartitionParams {
    int m_dyadic = 0;
    int m_geometric = 0;
    int n_cap = 0;
    double dyadic_tail = 0.0;
    double geometric_tail = 0.0;
    bool dyadic_tail_ok = false;
    bool geometric_tail_ok = false;
};

PartitionParams partition_params(double d, double eta);

} // namespace flowlab

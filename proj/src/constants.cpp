#include "flowlab/constants.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace flowlab {

namespace {

constexpr double kPi = 3.14159265358979323846;

double h1(double t, double eta) {
    return 288.0 * kPi / (eta * eta) * ((std::log2(t) - 4.0 * std::log2(eta)) + 2.0) /
           std::log(3.0 + t);
}

double h2(double t, double eta) {
    const double omega = 0.5 * eta * eta;
    const double log_base = std::log1p(omega);
    return 384.0 * kPi * ((std::log(4.0 * t) - 2.0 * std::log(eta)) / log_base + 1.0) /
           std::log(3.0 + t);
}

struct SupResult {
    double value = 0.0;
    double argmax = 0.0;
};

// Coarse log-spaced scan to bracket the max, then golden-section refinement in
// log space.  The integrand families here are unimodal-after-scan at this
// resolution; the tail limit is compared separately by the callers.
template <typename F>
SupResult sup_over(const F& f, double lo, double hi, double rel_acc) {
    constexpr int kScan = 2048;
    const double llo = std::log(lo), lhi = std::log(hi);
    double best = -std::numeric_limits<double>::infinity();
    int best_i = 0;
    for (int i = 0; i < kScan; ++i) {
        const double t = std::exp(llo + (lhi - llo) * i / (kScan - 1));
        const double v = f(t);
        if (v > best) {
            best = v;
            best_i = i;
        }
    }
    double a = llo + (lhi - llo) * std::max(0, best_i - 1) / (kScan - 1);
    double b = llo + (lhi - llo) * std::min(kScan - 1, best_i + 1) / (kScan - 1);

    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(std::exp(c)), fd = f(std::exp(d));
    for (int i = 0; i < 400 && (b - a) > rel_acc; ++i) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(std::exp(c));
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(std::exp(d));
        }
    }
    const double arg = std::exp(0.5 * (a + b));
    return {f(arg), arg};
}

} // namespace

ConstantsReport constants(double eta) {
    if (!(eta > 0.0 && eta <= 1.0))
        throw std::invalid_argument("eta must lie in (0, 1]");
    ConstantsReport r;
    r.eta = eta;
    r.omega = 0.5 * eta * eta;

    constexpr double kTCap = 1e12;
    const SupResult s1 = sup_over([&](double t) { return h1(t, eta); }, 1.0, kTCap,
                                  r.bracket_rel_accuracy);
    r.c1_tail_limit = 288.0 * kPi / (eta * eta) / std::log(2.0);
    if (s1.value >= r.c1_tail_limit) {
        r.c1 = s1.value;
        r.c1_argmax = s1.argmax;
    } else {
        r.c1 = r.c1_tail_limit;
        r.c1_argmax = std::numeric_limits<double>::infinity();
    }

    const SupResult s2 = sup_over([&](double t) { return h2(t, eta); }, 1.0, kTCap,
                                  r.bracket_rel_accuracy);
    r.c2_tail_limit = 384.0 * kPi / std::log1p(r.omega);
    r.c2_sup_h2 = std::max(s2.value, r.c2_tail_limit);
    r.c2_argmax = s2.value >= r.c2_tail_limit ? s2.argmax
                                              : std::numeric_limits<double>::infinity();
    r.c2_floor = 288.0 * kPi * (2.0 * std::pow(eta, -4.0) + 1.0);
    r.c2 = std::max(r.c2_sup_h2, r.c2_floor);

    const double inv_eta2 = 1.0 / (eta * eta);
    auto g = [&](double rho) {
        return (r.c2 * std::log(3.0 + rho + inv_eta2 * rho) +
                r.c1 * std::log(3.0 + inv_eta2 * rho)) /
               std::log(rho);
    };
    const SupResult sg = sup_over(g, 2.0, kTCap, r.bracket_rel_accuracy);
    const double g_tail = r.c2 + r.c1; // limit of g as rho -> infinity
    if (sg.value >= g_tail) {
        r.c_eta = 2.0 * sg.value;
        r.c_eta_argmax = sg.argmax;
    } else {
        r.c_eta = 2.0 * g_tail;
        r.c_eta_argmax = std::numeric_limits<double>::infinity();
    }
    return r;
}

PartitionParams partition_params(double d, double eta) {
    if (!(d >= 1.0)) throw std::invalid_argument("endpoint gap d must be at least 1");
    if (!(eta > 0.0 && eta <= 1.0))
        throw std::invalid_argument("eta must lie in (0, 1]");
    PartitionParams p;
    const double omega = 0.5 * eta * eta;
    // computed as sums of exact-at-the-fixtures logs so integer arguments
    // land exactly on integers
    p.m_dyadic = static_cast<int>(std::floor(std::log2(d) - 4.0 * std::log2(eta))) + 2;
    p.m_geometric = static_cast<int>(std::floor(
                        (std::log(4.0 * d) - 2.0 * std::log(eta)) / std::log1p(omega))) +
                    2;
    p.n_cap = static_cast<int>(std::floor(2.0 * std::pow(eta, -4.0) + 1.0));

    p.dyadic_tail = std::pow(2.0, 1.0 - p.m_dyadic) * d;
    p.dyadic_tail_ok = p.dyadic_tail < std::pow(eta, 4.0);
    p.geometric_tail = std::pow(1.0 + omega, -(p.m_geometric - 1.0)) * d;
    p.geometric_tail_ok = p.geometric_tail < 0.25 * eta * eta;
    return p;
}

} // namespace flowlab

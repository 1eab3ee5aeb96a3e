#include "nschs/potentials.hpp"

#include <cmath>
#include <algorithm>
#include <stdexcept>
#include <string>

namespace nschs {

double eval_s_phi(double s, int order) {
    switch (order) {
        case 0: {
            const double q = s * s - 1.0;
            return 0.25 * q * q;
        }
        case 1: return s * s * s - s;
        case 2: return 3.0 * s * s - 1.0;
        default: throw std::invalid_argument("eval_s_phi: order must be 0, 1 or 2");
    }
}

double FloryHugginsPotential::s_hat(double s, int order) const {
    const double half_t1 = 0.5 * theta1;
    switch (order) {
        case 0:
            if (s < 0.0 || s > 1.0) return kPlusInfinity;
            // x ln x -> 0 as x -> 0+, so the endpoint values vanish.
            if (s == 0.0 || s == 1.0) return 0.0;
            return half_t1 * (s * std::log(s) + (1.0 - s) * std::log(1.0 - s));
        case 1:
            if (s <= 0.0 || s >= 1.0)
                throw std::domain_error("FloryHugginsPotential: derivative requested at s=" +
                                        std::to_string(s) + " outside (0,1)");
            return half_t1 * (std::log(s) - std::log(1.0 - s));
        case 2:
            if (s <= 0.0 || s >= 1.0)
                throw std::domain_error("FloryHugginsPotential: derivative requested at s=" +
                                        std::to_string(s) + " outside (0,1)");
            return half_t1 * (1.0 / s + 1.0 / (1.0 - s));
        default: throw std::invalid_argument("s_hat: order must be 0, 1 or 2");
    }
}

double FloryHugginsPotential::r(double s, int order) const {
    const double half_t2 = 0.5 * theta2;
    switch (order) {
        case 0: return half_t2 * s * (1.0 - s);
        case 1: return half_t2 * (1.0 - 2.0 * s);
        case 2: return -theta2;
        default: throw std::invalid_argument("r: order must be 0, 1 or 2");
    }
}

double RegularizedPotential::s_hat_eps(double s, int order) const {
    // Quadratic Taylor tails about eps and 1-eps; the original potential in
    // between. At the matching points the tail reproduces value, first and
    // second derivative exactly.
    const double lo = eps;
    const double hi = 1.0 - eps;
    double anchor;
    if (s < lo) {
        anchor = lo;
    } else if (s > hi) {
        anchor = hi;
    } else {
        return base.s_hat(s, order);
    }
    const double d = s - anchor;
    const double v0 = base.s_hat(anchor, 0);
    const double v1 = base.s_hat(anchor, 1);
    const double v2 = base.s_hat(anchor, 2);
    switch (order) {
        case 0: return v0 + v1 * d + 0.5 * v2 * d * d;
        case 1: return v1 + v2 * d;
        case 2: return v2;
        default: throw std::invalid_argument("s_hat_eps: order must be 0, 1 or 2");
    }
}

double eval_s_rho_singular(const FloryHugginsPotential& p, double s, int order) {
    if (order == 0) {
        const double entropy = p.s_hat(s, 0);
        if (entropy == kPlusInfinity) return kPlusInfinity;
        return entropy + p.r(s, 0);
    }
    return p.s_hat(s, order) + p.r(s, order);
}

double eval_s_rho_eps(const RegularizedPotential& p, double s, int order) {
    return p.s_hat_eps(s, order) + p.base.r(s, order);
}

ConvexityCertificate convexity_certificate(const RegularizedPotential& p) {
    const FloryHugginsPotential& fh = p.base;
    const double eps = p.eps;
    const double lo = eps, hi = 1.0 - eps;

    // gamma1 = -min over R of S_hat_eps. On each quadratic tail the vertex
    // s* = anchor - S'(anchor)/S''(anchor) either falls inside the tail
    // domain (then the vertex value is the tail minimum) or the tail is
    // monotone toward the interior and the minimum sits at the anchor.
    double min_value = std::numeric_limits<double>::max();
    {
        // Interior scan; for Flory-Huggins the interior minimum is at 1/2
        // but the scan keeps this valid for asymmetric parameter choices.
        const int n_scan = 20000;
        for (int i = 0; i <= n_scan; ++i) {
            const double s = lo + (hi - lo) * static_cast<double>(i) / n_scan;
            min_value = std::min(min_value, fh.s_hat(s, 0));
        }
        for (double anchor : {lo, hi}) {
            const double v1 = fh.s_hat(anchor, 1);
            const double v2 = fh.s_hat(anchor, 2);
            double tail_min = fh.s_hat(anchor, 0);
            if (v2 > 0.0) {
                const double vertex = anchor - v1 / v2;
                const bool inside_tail = (anchor == lo) ? (vertex < lo) : (vertex > hi);
                if (inside_tail) {
                    tail_min = std::min(tail_min, fh.s_hat(anchor, 0) - 0.5 * v1 * v1 / v2);
                }
            }
            min_value = std::min(min_value, tail_min);
        }
    }

    // Second-derivative range: constant on the tails, scanned in between.
    double min_dd = std::min(fh.s_hat(lo, 2), fh.s_hat(hi, 2));
    double max_dd = std::max(fh.s_hat(lo, 2), fh.s_hat(hi, 2));
    {
        const int n_scan = 20000;
        for (int i = 1; i < n_scan; ++i) {
            const double s = lo + (hi - lo) * static_cast<double>(i) / n_scan;
            const double dd = fh.s_hat(s, 2);
            min_dd = std::min(min_dd, dd);
            max_dd = std::max(max_dd, dd);
        }
    }

    ConvexityCertificate cert;
    cert.gamma1 = -std::min(min_value, 0.0);
    cert.gamma2 = std::abs(fh.theta2) + std::max(0.0, -min_dd);
    cert.gamma3 = std::abs(fh.theta2) + max_dd;
    return cert;
}

} // namespace nschs

#pragma once

// Potential functions for the two order parameters: the regular double-well
// for the phase field, and the singular Flory-Huggins mixture potential for
// the surfactant together with its C^2 quadratic-tail regularization.

#include <limits>

namespace nschs {

/// S_phi(s) = (s^2 - 1)^2 / 4, the canonical double well.
double eval_s_phi(double s, int order);

/// Flory-Huggins split S_rho = S_hat + R:
///   S_hat(s) = (theta1/2) [s ln s + (1-s) ln(1-s)]   on (0,1),
///   R(s)     = (theta2/2) s (1-s).
/// S_hat extends by continuity to [0,1] and equals +inf outside.
struct FloryHugginsPotential {
    double theta1 = 2.0;   // entropy strength, > 0
    double theta2 = 0.0;   // enthalpy strength
    double eps1 = 0.25;    // endpoint neighborhood where S_hat'' is monotone

    double s_hat(double s, int order) const;
    double r(double s, int order) const;
};

/// Quadratic Taylor extension of S_hat outside (eps, 1-eps). Globally C^2.
struct RegularizedPotential {
    FloryHugginsPotential base;
    double eps;            // in (0, base.eps1)

    double s_hat_eps(double s, int order) const;
};

/// Value of the full singular potential S_rho or a derivative.
/// order 0 accepts s in [0,1] (continuous extension; +inf outside),
/// orders 1,2 require s strictly inside (0,1) and throw std::domain_error
/// otherwise.
double eval_s_rho_singular(const FloryHugginsPotential& p, double s, int order);

/// Globally defined S_rho_eps = S_hat_eps + R, or a derivative.
double eval_s_rho_eps(const RegularizedPotential& p, double s, int order);

/// Bounds of the regularized potential:
///   S_hat_eps >= -gamma1,  -gamma2 <= S_hat_eps'' <= gamma3(eps),
/// with gamma1, gamma2 independent of eps. gamma1 and gamma2 come from
/// closed-form minimization over the quadratic tails, gamma3 from a scan.
struct ConvexityCertificate {
    double gamma1;
    double gamma2;
    double gamma3;
};
ConvexityCertificate convexity_certificate(const RegularizedPotential& p);

inline constexpr double kPlusInfinity = std::numeric_limits<double>::infinity();

} // namespace nschs

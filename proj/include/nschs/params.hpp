#pragma once

// Model constants and the runtime validators for the structural assumptions
// the analysis rests on: bounded viscosity, coercive double well, singular
// potential split with Lipschitz enthalpy, positive coefficients, and the
// exponential second-derivative growth condition.

#include <optional>
#include <string>
#include <vector>

#include "nschs/potentials.hpp"

namespace nschs {

enum class ViscosityKind { constant, smooth_blend };

/// nu(phi, rho), bounded between nu_floor and nu_ceil for all real inputs.
/// smooth_blend: nu = nu2 + (nu1 - nu2) (1 + tanh(phi)) / 2.
struct ViscosityLaw {
    ViscosityKind kind = ViscosityKind::constant;
    double nu1 = 1.0;
    double nu2 = 1.0;
    double nu_floor = 1.0;
    double nu_ceil = 1.0;

    static ViscosityLaw constant(double nu);
    static ViscosityLaw smooth_blend(double nu1, double nu2);
};

double viscosity_eval(const ViscosityLaw& law, double phi, double rho);

/// Constants entering the double-well coercivity inequalities, the enthalpy
/// Lipschitz bound, and the exponential growth condition.
struct AssumptionConstants {
    double c0 = 1.0;       // S_phi'' >= -c0
    double c1 = 1.0;       // S_phi'(s) s >= c1 S_phi(s) - c2
    double c2 = 0.5;
    double c3 = 0.125;     // S_phi >= c3 s^4 - c4
    double c4 = 1.0;
    double L1 = 1.0;       // |R''| <= L1
    double growth_C = 5.0; // S_hat''(s) <= C exp(C |S_hat'(s)|)
};

struct PotentialSpec {
    FloryHugginsPotential flory_huggins;
    std::optional<double> regularization_eps; // absent: singular potential only
};

struct ModelParams {
    double alpha = 0.05;   // coefficient of |laplacian(phi)|^2
    double beta = 0.05;    // coefficient of |grad(rho)|^2
    double theta = 1.0;    // adsorption coupling
    double penalty_omega = 0.0; // |grad(phi)|^4 penalty weight, 0 disables
    ViscosityLaw viscosity;
    PotentialSpec potentials;
    AssumptionConstants assumptions;

    /// Throws std::invalid_argument on any structurally invalid value
    /// (non-finite entries, non-positive coefficients, eps out of range).
    void check_structure() const;

    RegularizedPotential regularized() const;
};

struct AssumptionCheck {
    std::string name;
    bool passed;
    double worst_margin; // most negative sampled slack; >= 0 when passed
    std::string detail;
};

struct ValidationReport {
    std::vector<AssumptionCheck> checks;
    bool all_passed() const;
    std::string to_string() const;
};

/// Samples each assumption over its stated range (viscosity over
/// [-3,3]x[-1,2], double-well inequalities over [-5,5], enthalpy curvature
/// over [-5,5], growth condition over (0,1) minus a 1e-8 endpoint margin)
/// and reports the worst violation margin. Deterministic for a fixed seed.
ValidationReport validate_assumptions(const ModelParams& params, int sample_count,
                                      unsigned long long seed = 20240915ULL);

} // namespace nschs

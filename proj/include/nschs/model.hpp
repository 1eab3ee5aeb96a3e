#pragma once

// Nonlinear model assembly: chemical potentials as exact gradients of the
// discrete energy, the Korteweg force, the three energy functionals, the
// energy lower-bound certificate, and the initial-surfactant regularization.

#include <optional>

#include "nschs/grid.hpp"
#include "nschs/params.hpp"

namespace nschs {

struct SimState {
    double t = 0.0;
    MACField u;
    ScalarField p;
    ScalarField phi;
    ScalarField rho;
    ScalarField mu;  // cached assembly for phi
    ScalarField psi; // cached assembly for rho

    explicit SimState(const Grid2D& g)
        : u(g), p(g), phi(g), rho(g), mu(g), psi(g) {}
    const Grid2D& grid() const { return phi.grid(); }
};

enum class EnergyMode { exact, penalized, approx };

struct EnergyReport {
    double kinetic = 0.0;
    double grad_phi = 0.0;
    double laplace_phi = 0.0;
    double s_phi_bulk = 0.0;
    double grad_rho = 0.0;
    double s_rho_bulk = 0.0;
    double coupling = 0.0; // -(theta/2) integral rho |grad phi|^2
    double penalty = 0.0;  // (omega/4) integral |grad phi|^4
    double total = 0.0;
};

/// Squared gradient magnitude at cell centers: per direction the average of
/// the two adjacent squared face differences. This is the unique choice for
/// which the assembled potentials below are the exact discrete energy
/// gradients.
ScalarField grad_sq_cell(const ScalarField& phi);

/// mu = alpha Lap^2 phi - Lap phi + S_phi'(phi)
///      + theta div(rho_face grad phi) - omega div(|grad phi|^2_face grad phi),
/// with face values by arithmetic averaging of the adjacent cells.
ScalarField chemical_potential_phi(const ScalarField& phi, const ScalarField& rho,
                                   const ModelParams& params);

enum class PotentialMode { singular, regularized };

/// psi = -beta Lap rho + S_rho' - (theta/2) |grad phi|^2. In singular mode
/// every cell must lie strictly inside (0,1) (std::domain_error otherwise);
/// an optional evaluation clamp [clip, 1-clip] shields round-off excursions
/// and reports how many cells it touched.
ScalarField chemical_potential_rho(const ScalarField& phi, const ScalarField& rho,
                                   const ModelParams& params, PotentialMode mode,
                                   std::optional<double> singular_clip = std::nullopt,
                                   long* clamp_events = nullptr);

/// (mu - mean mu) grad phi + (psi - mean psi) grad rho on faces; the
/// subtracted means are pure gradients absorbed by the pressure.
MACField korteweg_force(const ScalarField& mu, const ScalarField& psi,
                        const ScalarField& phi, const ScalarField& rho,
                        bool subtract_means = true);

EnergyReport energy(const SimState& state, const ModelParams& params, EnergyMode mode);

/// -(c4 + 17 C_R + 8 theta^4/(c3 alpha^2) + gamma1) |Omega|; every reported
/// total energy of an accepted run must stay above this value.
double energy_lower_bound(const ModelParams& params, double area);

/// Warns (returns max excursion) when theta * rho exceeds 1 somewhere, the
/// regime where the second-order part of the phi equation turns backward.
double backward_diffusion_excess(const ScalarField& rho, const ModelParams& params);

/// Advisory check that the quadratic tails of the regularized potential grow
/// fast enough to dominate the penalty bookkeeping: the tail coefficient k1
/// against C_R + theta^2 / (2 omega). Informational only; k1 can be pushed
/// arbitrarily high by shrinking eps.
struct PenaltyMarginAdvisory {
    double k1 = 0.0;       // scanned quadratic growth of the tails
    double required = 0.0; // C_R + theta^2 / (2 omega)
    bool satisfied = false;
};
PenaltyMarginAdvisory penalty_margin_advisory(const ModelParams& params);

struct RegularizeReport {
    ScalarField rho;          // regularized initial datum, strictly in (0,1)
    double residual_l2 = 0.0; // final nonlinear residual
    double mean_shift = 0.0;  // mean(rho) - mean(rho0), reported not hidden
    int newton_iterations = 0;
};

/// Computes psi0_hat = -beta Lap rho0 + S_hat'(rho0), clamps it to [-k, k],
/// and solves -beta Lap r + S_hat'(r) = clamped psi0_hat by damped Newton
/// with cosine-diagonal inner solves (residual l2 <= tol).
RegularizeReport regularize_initial_rho(const ScalarField& rho0, double k,
                                        const ModelParams& params,
                                        double tol = 1e-10, int max_iter = 100);

} // namespace nschs

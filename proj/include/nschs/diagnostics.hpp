#pragma once

// Per-step measurements of the analytically guaranteed quantities: masses,
// energy pieces, dissipation and the energy-law residual, surfactant bounds
// and separation margin, the stability metrics of the uniqueness and
// continuous-dependence arguments, weak-form residuals, and the
// interface-adsorption statistic.

#include <optional>
#include <vector>

#include "nschs/model.hpp"
#include "nschs/stepper.hpp"

namespace nschs {

struct DiagnosticsRecord {
    double t = 0.0;
    double mass_phi = 0.0;
    double mass_rho = 0.0;
    EnergyReport energy;
    double dissipation = 0.0;     // ||sqrt(nu) Du||^2 + ||grad mu||^2 + ||grad psi||^2
    double energy_residual = 0.0; // E(t_next) - E(t_prev) + dt * dissipation
    bool has_residual = false;
    double rho_min = 0.0;
    double rho_max = 0.0;
    double separation_eta = 0.0;  // min(rho_min, 1 - rho_max)
    long clamp_events = 0;
    double max_velocity = 0.0;
};

class DiagnosticsTrace {
public:
    void append(const DiagnosticsRecord& rec);
    const std::vector<DiagnosticsRecord>& records() const { return records_; }

private:
    std::vector<DiagnosticsRecord> records_;
};

/// Recomputes the cached chemical potentials of a state in place.
void refresh_potentials(SimState& state, const ModelParams& params, PotentialMode mode,
                        std::optional<double> singular_clip = std::nullopt,
                        long* clamp_events = nullptr);

/// ||sqrt(nu(phi,rho)) D u||^2 with the strain assembled at centers and
/// corners under no-slip ghosts.
double viscous_dissipation(const MACField& u, const ScalarField& phi,
                           const ScalarField& rho, const ModelParams& params);

/// One trace record; when prev_energy is given the energy-law residual over
/// the step of length dt is reported as well. Uses the state's cached mu and
/// psi, so refresh_potentials (or step) must have run on this state.
DiagnosticsRecord sample(const SimState& state, const ModelParams& params, EnergyMode mode,
                         std::optional<double> prev_energy = std::nullopt, double dt = 0.0,
                         long clamp_events = 0);

struct StabilityMetrics {
    double Y = 0.0; // ||u||^2 in the V_sigma* proxy + ||phi||^2 + ||rho - mean||^2 in V_0*
    double Z = 0.0; // ||u||^2 + ||Lap phi||^2 + ||grad rho||^2
    double W = 0.0; // dissipation bundle of the continuous-dependence proof
};

/// Metrics of the difference of two states on the same grid. The velocity
/// part of Y uses the componentwise inverse Neumann Laplacian as a proxy for
/// the inverse Stokes operator (no closed form on a no-slip rectangle).
StabilityMetrics stability_metrics(const SimState& a, const SimState& b);

struct WeakFormResiduals {
    double res_phi = 0.0;
    double res_rho = 0.0;
    double res_u = 0.0;
};

/// Plugs the discrete trajectory step (prev -> next, one dt apart) into the
/// weak formulation. Scalars are tested against the first n_test cosine
/// modes (amplitude one, so mode zero reproduces the mass identity);
/// velocity against discrete solenoidal fields built from seeded random
/// stream functions, which annihilate the pressure exactly.
WeakFormResiduals weak_form_residual(const SimState& prev, const SimState& next,
                                     const ModelParams& params, const StepConfig& cfg,
                                     int n_test);

/// Pearson correlation between rho and |grad phi|^2 over cells; 0 for
/// degenerate (constant) inputs.
double adsorption_statistic(const SimState& state);

} // namespace nschs

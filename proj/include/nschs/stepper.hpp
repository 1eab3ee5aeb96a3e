#pragma once

// Linearly-implicit stabilized splitting: sixth-order CH step for phi,
// fourth-order CH step for rho (consuming the updated phi so the coupling
// telescopes in the energy accounting), then a projection Navier-Stokes
// step. Every implicit solve is constant-coefficient and diagonal in the
// cosine/sine bases.

#include <optional>
#include <utility>

#include "nschs/model.hpp"

namespace nschs {

struct StepConfig {
    double dt = 1e-4;
    double stab_s1 = 0.0;   // phi stabilization; resolve_stabilization sets defaults
    double stab_s2 = 0.0;   // rho stabilization
    double rho_clip = -1.0; // singular-potential evaluation clamp; negative: auto,
                            // 0 disables (the NaN guard then throws on exit of (0,1))
    double cfl_limit = 0.5;
    bool ns_enabled = true;
    bool transport_only = false; // advection only, chemical potentials forced 0
    PotentialMode potential_mode = PotentialMode::regularized;
};

/// Fills stab_s1, stab_s2 (when zero) and rho_clip (when negative) from the
/// run-start state:
/// s1 = 2 max(1, max |S_phi''| on [-1.2, 1.2]),
/// s2 = gamma2 + theta max |grad phi0|^2 + max S_rho'' over the initial
/// rho-range (the curvature actually seen by the explicit potential),
/// rho_clip = eps/2 when a regularization eps is configured, else 1e-8.
StepConfig resolve_stabilization(StepConfig cfg, const SimState& initial,
                                 const ModelParams& params);

struct StepInfo {
    long clamp_events = 0;
    double backward_excess = 0.0; // max(theta rho - 1); > 0 warns
};

/// One CH step for phi at frozen rho, velocity uploaded from the state.
ScalarField step_phi(const SimState& state, const ModelParams& params,
                     const StepConfig& cfg);

/// One CH step for rho; phi_next supplies the |grad phi|^2 source.
ScalarField step_rho(const SimState& state, const ModelParams& params,
                     const StepConfig& cfg, const ScalarField& phi_next,
                     long* clamp_events = nullptr);

/// Semi-implicit viscous step plus pressure projection. The constant
/// viscosity part nu_floor is treated implicitly, the variable excess and
/// the advection explicitly; returns the solenoidal velocity and pressure.
std::pair<MACField, ScalarField> step_ns(const SimState& state, const ModelParams& params,
                                         const StepConfig& cfg, const MACField& force);

/// Full step phi -> rho -> (mu, psi refresh) -> Navier-Stokes.
SimState step(const SimState& state, const ModelParams& params, const StepConfig& cfg,
              StepInfo* info = nullptr);

/// min(cfg.dt, advective CFL bound, explicit-coupling diffusion heuristic).
double suggest_dt(const SimState& state, const ModelParams& params, const StepConfig& cfg);

} // namespace nschs

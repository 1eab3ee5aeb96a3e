#pragma once

// Simulation driver and the higher-level experiment commands (parameter
// sweeps, self-convergence study, twin-run perturbation). Runs write a
// frozen-format trace CSV, optional binary snapshots and PGM renders, and
// gate on invariant monitors: mass drift, energy below its certified lower
// bound, and non-finite fields.

#include <string>
#include <vector>

#include "nschs/config.hpp"
#include "nschs/diagnostics.hpp"

namespace nschs {

/// Builds the initial state from the configured presets (and applies the
/// initial-surfactant regularization when requested).
SimState build_initial_state(const RunConfig& cfg);

/// Energy functional matching the configured potential mode.
EnergyMode energy_mode_for(const RunConfig& cfg);

struct RunOutcome {
    int exit_code = 0;       // 0 ok, 2 invariant monitor tripped
    std::string violation;   // name of the first tripped monitor
    DiagnosticsTrace trace;
    SimState final_state{Grid2D(4, 4, 1.0, 1.0)};
    StepConfig resolved;     // stabilizations actually used
    double min_energy = 0.0;
    double max_excursion = 0.0; // max |rho - clamp(rho, 0, 1)| seen at samples
    bool backward_diffusion_warned = false;
};

RunOutcome run_simulation(const RunConfig& cfg, bool write_outputs = true);

/// Frozen trace format (contract for external plotting).
std::string csv_header();
std::string csv_row(const DiagnosticsRecord& rec);

void write_pgm(const ScalarField& f, const std::string& path);

/// Parallelism cap from NSCHS_THREADS (>= 1; default 1).
int thread_cap();

struct SweepMember {
    double value = 0.0;
    int exit_code = 0;
    double max_excursion = 0.0;
    double final_energy = 0.0;
};

struct SweepReport {
    std::string parameter; // "eps" or "omega"
    std::vector<SweepMember> members;
    std::vector<double> phi_distance; // between consecutive members at t_end
    std::vector<double> rho_distance;
    bool distances_decreasing = true;
    bool excursions_nonincreasing = true;
    std::string to_string() const;
};

/// Runs the configured benchmark once per parameter value (strictly
/// decreasing lists) and compares trajectories at t_end.
SweepReport sweep_eps(const RunConfig& cfg, const std::vector<double>& eps_list,
                      bool write_outputs = false);
SweepReport sweep_omega(const RunConfig& cfg, const std::vector<double>& omega_list,
                        bool write_outputs = false);

struct ConvergeReport {
    std::vector<int> spatial_grids;
    double spatial_order_phi = 0.0;
    double spatial_order_rho = 0.0;
    double temporal_order_phi = 0.0;
    double temporal_order_rho = 0.0;
    bool spatial_pass = false;  // order >= 1.8 on fields with nontrivial error
    bool temporal_pass = false; // order >= 0.9
    std::string to_string() const;
};

/// Spatial self-convergence on {nx/4, nx/2, nx} (restriction by cell
/// averaging) and temporal self-convergence at dt, dt/2, dt/4.
ConvergeReport converge(const RunConfig& cfg);

struct PerturbReport {
    std::vector<double> t;
    std::vector<double> Y;
    std::vector<double> Z;
    double amp_Y = 0.0;     // Y(t_end) / Y(0)
    double amp_Z = 0.0;
    double max_ratio_Y = 0.0; // max over samples of Y(t) / Y(0)
    std::string to_string() const;
};

/// Twin runs from phi0 and phi0 + delta * (unit-norm mean-free perturbation).
PerturbReport perturb(const RunConfig& cfg, double delta, bool write_outputs = false);

} // namespace nschs

#pragma once

// Plain-text sectioned key=value run configuration. Unknown keys and
// sections are hard errors; serialize(parse(x)) parses to an identical
// config. The parser also enforces the structural invariants it can see
// statically (positivity, eps ranges, the mean-rho0 pure-state rule).

#include <cstdint>
#include <optional>
#include <string>

#include "nschs/params.hpp"
#include "nschs/stepper.hpp"

namespace nschs {

enum class InitKind { constant, spinodal, tanh_stripe, file };
enum class VelocityInit { none, vortex, file };

struct RunConfig {
    // [grid]
    int nx = 64;
    int ny = 64;
    double Lx = 16.0;
    double Ly = 16.0;

    // [model]
    double alpha = 0.05;
    double beta = 0.05;
    double theta = 1.0;
    double penalty_omega = 0.0;
    std::optional<double> regularization_eps = 0.05;
    ViscosityKind viscosity = ViscosityKind::constant;
    double nu1 = 1.0;
    double nu2 = 1.0;
    double theta1 = 2.0;
    double theta2 = 0.0;
    double eps1 = 0.25;

    // [assumptions]
    AssumptionConstants assumptions;

    // [stepping]
    double dt = 1e-4;
    double t_end = 0.2;
    std::optional<double> stab_s1;   // absent: auto
    std::optional<double> stab_s2;   // absent: auto
    std::optional<double> rho_clip;  // absent: auto
    double cfl_limit = 0.5;
    bool ns_enabled = true;
    bool transport_only = false;
    PotentialMode potential_mode = PotentialMode::regularized;

    // [initial]
    InitKind phi_init = InitKind::spinodal;
    double phi_value = 0.0;      // constant value / spinodal mean / stripe offset
    double phi_amplitude = 0.05; // spinodal amplitude / stripe amplitude
    std::string phi_file;
    InitKind rho_init = InitKind::constant;
    double rho_value = 0.3;
    double rho_amplitude = 0.0;
    std::string rho_file;
    double stripe_width = 1.0;
    VelocityInit u_init = VelocityInit::none;
    double u_scale = 1.0;
    std::string u_file;
    std::uint64_t seed = 1234;
    std::optional<double> rho_regularize_k; // apply the initial-data solve when set

    // [output]
    std::string directory = "out";
    int trace_every = 1;
    int snapshot_every = 0; // 0 disables
    int pgm_every = 0;      // 0 disables

    Grid2D grid() const { return Grid2D(nx, ny, Lx, Ly); }
    ModelParams model_params() const;
    StepConfig step_config() const; // stabilizations still unresolved (0 = auto)
};

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

RunConfig parse_config(const std::string& path);
RunConfig parse_config_text(const std::string& text, const std::string& origin = "<string>");
std::string serialize_config(const RunConfig& cfg);

} // namespace nschs

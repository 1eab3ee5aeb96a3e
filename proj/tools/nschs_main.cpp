// nschs: 2-D incompressible two-phase flow with surfactant.
// Subcommands: validate, run, sweep-eps, sweep-omega, converge, perturb.
// Exit codes: 0 success, 1 usage/config error, 2 invariant monitor tripped.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nschs/runner.hpp"

namespace {

int cmd_validate(const std::string& path) {
    const nschs::RunConfig cfg = nschs::parse_config(path);
    const nschs::ModelParams params = cfg.model_params();
    const nschs::ValidationReport report = nschs::validate_assumptions(params, 10000);
    std::cout << report.to_string();
    if (!report.all_passed()) {
        std::cerr << "validation failed\n";
        return 1;
    }
    std::cout << "all assumptions hold on the sampled ranges\n";
    return 0;
}

int cmd_run(const std::string& path) {
    const nschs::RunConfig cfg = nschs::parse_config(path);
    const nschs::RunOutcome out = nschs::run_simulation(cfg, true);
    const auto& last = out.trace.records().back();
    if (out.backward_diffusion_warned)
        std::cerr << "warning: theta * rho exceeded 1; the second-order part of the phi "
                     "equation is locally backward (kept well-posed by the higher-order "
                     "term)\n";
    std::cout << "steps completed to t=" << last.t << "  E_total=" << last.energy.total
              << "  eta=" << last.separation_eta << "  max_u=" << last.max_velocity << "\n"
              << "trace written to " << cfg.directory << "/trace.csv\n";
    if (out.exit_code != 0) {
        std::cerr << "invariant monitor tripped: " << out.violation << "\n";
        return 2;
    }
    return 0;
}

int cmd_sweep(const std::string& path, const std::vector<double>& values, bool over_eps) {
    const nschs::RunConfig cfg = nschs::parse_config(path);
    const nschs::SweepReport rep = over_eps ? nschs::sweep_eps(cfg, values, true)
                                            : nschs::sweep_omega(cfg, values, true);
    std::cout << rep.to_string();
    for (const auto& m : rep.members)
        if (m.exit_code != 0) return 2;
    return 0;
}

int cmd_converge(const std::string& path) {
    const nschs::RunConfig cfg = nschs::parse_config(path);
    const nschs::ConvergeReport rep = nschs::converge(cfg);
    std::cout << rep.to_string();
    std::cout << (rep.spatial_pass && rep.temporal_pass ? "converge: pass\n"
                                                        : "converge: fail\n");
    return 0;
}

int cmd_perturb(const std::string& path, double delta) {
    const nschs::RunConfig cfg = nschs::parse_config(path);
    const nschs::PerturbReport rep = nschs::perturb(cfg, delta, true);
    std::cout << rep.to_string();
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Navier-Stokes-Cahn-Hilliard surfactant simulator"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<double> eps_values, omega_values;
    double delta = 1e-6;

    auto* validate = app.add_subcommand("validate", "check the model assumptions");
    validate->add_option("config", config_path, "config file")->required();

    auto* run = app.add_subcommand("run", "run a simulation");
    run->add_option("config", config_path, "config file")->required();

    auto* sweep_eps = app.add_subcommand("sweep-eps", "regularization sweep");
    sweep_eps->add_option("config", config_path, "config file")->required();
    sweep_eps->add_option("--eps", eps_values, "strictly decreasing eps values")
        ->required()->expected(-1);

    auto* sweep_omega = app.add_subcommand("sweep-omega", "penalty sweep");
    sweep_omega->add_option("config", config_path, "config file")->required();
    sweep_omega->add_option("--omega", omega_values, "strictly decreasing omega values")
        ->required()->expected(-1);

    auto* converge = app.add_subcommand("converge", "self-convergence study");
    converge->add_option("config", config_path, "config file")->required();

    auto* perturb = app.add_subcommand("perturb", "twin-run stability study");
    perturb->add_option("config", config_path, "config file")->required();
    perturb->add_option("--delta", delta, "perturbation size")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (validate->parsed()) return cmd_validate(config_path);
        if (run->parsed()) return cmd_run(config_path);
        if (sweep_eps->parsed()) return cmd_sweep(config_path, eps_values, true);
        if (sweep_omega->parsed()) return cmd_sweep(config_path, omega_values, false);
        if (converge->parsed()) return cmd_converge(config_path);
        if (perturb->parsed()) return cmd_perturb(config_path, delta);
    } catch (const nschs::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}

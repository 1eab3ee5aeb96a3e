#include <doctest.h>

#include <cmath>
#include <cstdlib>

#include "nschs/runner.hpp"

using namespace nschs;

namespace {

RunConfig small_config() {
    RunConfig cfg;
    cfg.nx = cfg.ny = 16;
    cfg.Lx = cfg.Ly = 4.0;
    cfg.dt = 1e-4;
    cfg.t_end = 5e-3;
    cfg.trace_every = 1;
    return cfg;
}

} // namespace

TEST_CASE("single-element sweeps report without comparisons") {
    const SweepReport rep = sweep_eps(small_config(), {0.05});
    CHECK(rep.members.size() == 1);
    CHECK(rep.phi_distance.empty());
    CHECK(rep.members[0].exit_code == 0);
    CHECK(rep.distances_decreasing);
}

TEST_CASE("sweep lists must decrease strictly") {
    CHECK_THROWS_AS((void)sweep_eps(small_config(), {0.05, 0.1}), ConfigError);
    CHECK_THROWS_AS((void)sweep_eps(small_config(), {}), ConfigError);
}

TEST_CASE("a tiny penalty barely perturbs trajectories away from the tails") {
    RunConfig cfg = small_config();
    cfg.rho_value = 0.5;
    cfg.phi_amplitude = 0.2;
    const double omega = 1e-3;

    RunConfig with = cfg;
    with.penalty_omega = omega;
    const RunOutcome rw = run_simulation(with, false);
    const RunOutcome r0 = run_simulation(cfg, false);

    ScalarField dphi(rw.final_state.grid());
    for (std::size_t k = 0; k < dphi.data().size(); ++k)
        dphi.data()[k] = rw.final_state.phi.data()[k] - r0.final_state.phi.data()[k];
    const double dist = norms(dphi).l2;
    const double penalty_scale =
        energy(rw.final_state, with.model_params(), EnergyMode::approx).penalty / omega;
    CHECK(dist <= 10.0 * omega * std::max(penalty_scale, 1.0));
}

TEST_CASE("sweeps behave identically under the thread cap") {
    RunConfig cfg = small_config();
    const std::vector<double> eps = {0.1, 0.05};
    const SweepReport serial = sweep_eps(cfg, eps);
    ::setenv("NSCHS_THREADS", "2", 1);
    const SweepReport parallel = sweep_eps(cfg, eps);
    ::unsetenv("NSCHS_THREADS");
    REQUIRE(serial.members.size() == parallel.members.size());
    for (std::size_t k = 0; k < serial.members.size(); ++k) {
        CHECK(serial.members[k].final_energy == parallel.members[k].final_energy);
        CHECK(serial.members[k].max_excursion == parallel.members[k].max_excursion);
    }
    CHECK(serial.phi_distance == parallel.phi_distance);
}

TEST_CASE("perturbation metrics scale quadratically and vanish at zero") {
    RunConfig cfg = small_config();
    cfg.t_end = 2e-3;

    const PerturbReport none = perturb(cfg, 0.0);
    for (double y : none.Y) CHECK(y == 0.0);
    for (double z : none.Z) CHECK(z == 0.0);
    CHECK(none.amp_Y == 0.0);

    const PerturbReport big = perturb(cfg, 2e-4);
    const PerturbReport half = perturb(cfg, 1e-4);
    CHECK(big.Y.front() / half.Y.front() == doctest::Approx(4.0).epsilon(1e-10));
    CHECK(big.Y.front() == doctest::Approx(4e-8).epsilon(1e-10));
}

TEST_CASE("transport-dominated configuration self-converges") {
    RunConfig cfg = small_config();
    cfg.nx = cfg.ny = 32;
    cfg.transport_only = true;
    cfg.ns_enabled = false;
    cfg.u_init = VelocityInit::vortex;
    cfg.u_scale = 0.5;
    cfg.phi_init = InitKind::tanh_stripe;
    cfg.phi_amplitude = 1.0;
    cfg.rho_init = InitKind::tanh_stripe;
    cfg.rho_value = 0.4;
    cfg.rho_amplitude = 0.2;
    cfg.stripe_width = 0.5;
    cfg.dt = 2e-3;
    cfg.t_end = 0.2;
    const ConvergeReport rep = converge(cfg);
    INFO(rep.to_string());
    CHECK(rep.temporal_order_phi >= 0.9);
    CHECK(rep.temporal_order_rho >= 0.9);
}

TEST_CASE("convergence study refuses noisy data and too-coarse grids") {
    RunConfig noisy = small_config();
    noisy.phi_init = InitKind::spinodal;
    CHECK_THROWS_AS((void)converge(noisy), ConfigError);

    RunConfig coarse = small_config();
    coarse.phi_init = InitKind::tanh_stripe;
    coarse.rho_init = InitKind::constant;
    coarse.nx = coarse.ny = 8; // quarters to 2 cells
    CHECK_THROWS_AS((void)converge(coarse), ConfigError);
}

TEST_CASE("penalty margin advisory") {
    ModelParams p;
    p.viscosity = ViscosityLaw::constant(1.0);
    p.theta = 1.0;
    p.penalty_omega = 0.5;
    p.potentials.regularization_eps = 0.01;
    const PenaltyMarginAdvisory tight = penalty_margin_advisory(p);
    CHECK(tight.k1 == doctest::Approx(0.25 * (1.0 / 0.99 + 1.0 / 0.01)).epsilon(1e-12));
    CHECK(tight.required == doctest::Approx(0.5 + 1.0).epsilon(1e-12));
    CHECK(tight.satisfied);

    p.potentials.regularization_eps = 0.2; // wide tails grow too slowly
    p.penalty_omega = 1e-3;
    const PenaltyMarginAdvisory loose = penalty_margin_advisory(p);
    CHECK(!loose.satisfied);
}

TEST_CASE("a zero-horizon run emits exactly the initial record") {
    RunConfig cfg = small_config();
    cfg.t_end = 0.0;
    const RunOutcome out = run_simulation(cfg, false);
    CHECK(out.exit_code == 0);
    CHECK(out.trace.records().size() == 1);
    CHECK(out.trace.records().front().t == 0.0);
}

TEST_CASE("a purely singular setup runs without any configured tail width") {
    RunConfig cfg = small_config();
    cfg.regularization_eps = std::nullopt;
    cfg.potential_mode = PotentialMode::singular;
    cfg.rho_value = 0.4;
    const RunOutcome out = run_simulation(cfg, false);
    CHECK(out.exit_code == 0);
    const auto& last = out.trace.records().back();
    CHECK(last.rho_min > 0.0);
    CHECK(last.rho_max < 1.0);
    CHECK(last.clamp_events == 0);
    CHECK(std::isfinite(last.energy.total));
}

TEST_CASE("backward-diffusion warnings surface in run outcomes") {
    RunConfig cfg = small_config();
    cfg.theta = 1.9;
    cfg.rho_value = 0.6; // theta * rho > 1 from the start
    cfg.t_end = 5e-4;
    const RunOutcome out = run_simulation(cfg, false);
    CHECK(out.exit_code == 0);
    CHECK(out.backward_diffusion_warned);
}

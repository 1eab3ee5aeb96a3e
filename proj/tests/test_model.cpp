#include <doctest.h>

#include <cmath>
#include <random>

#include "dense_oracle.hpp"
#include "nschs/model.hpp"

using namespace nschs;

namespace {

ModelParams test_params(double omega = 0.0, std::optional<double> eps = 0.05) {
    ModelParams p;
    p.alpha = 0.05;
    p.beta = 0.05;
    p.theta = 1.0;
    p.penalty_omega = omega;
    p.viscosity = ViscosityLaw::constant(1.0);
    p.potentials.regularization_eps = eps;
    return p;
}

SimState random_state(const Grid2D& g, unsigned seed, double rho_lo = 0.2,
                      double rho_hi = 0.8) {
    SimState s(g);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (double& v : s.phi.data()) v = 0.5 * u(rng);
    for (double& v : s.rho.data()) v = 0.5 * (rho_lo + rho_hi) + 0.5 * (rho_hi - rho_lo) * u(rng);
    return s;
}

} // namespace

TEST_CASE("chemical potentials of constant fields") {
    const Grid2D g(16, 16, 1.0, 1.0);
    const ModelParams p = test_params(0.1);
    SimState s(g);
    for (double& v : s.phi.data()) v = 0.4;
    for (double& v : s.rho.data()) v = 0.3;

    const ScalarField mu = chemical_potential_phi(s.phi, s.rho, p);
    const double want_mu = eval_s_phi(0.4, 1);
    for (double v : mu.data()) CHECK(v == doctest::Approx(want_mu).epsilon(1e-13));

    const ScalarField psi =
        chemical_potential_rho(s.phi, s.rho, p, PotentialMode::regularized);
    const double want_psi = eval_s_rho_eps(p.regularized(), 0.3, 1);
    for (double v : psi.data()) CHECK(v == doctest::Approx(want_psi).epsilon(1e-13));
}

TEST_CASE("stationary symmetric state has zero surfactant potential") {
    const Grid2D g(8, 8, 1.0, 1.0);
    const ModelParams p = test_params();
    SimState s(g);
    for (double& v : s.rho.data()) v = 0.5;
    const ScalarField psi = chemical_potential_rho(s.phi, s.rho, p, PotentialMode::singular);
    for (double v : psi.data()) CHECK(std::abs(v) < 1e-14);
}

TEST_CASE("singular evaluation rejects out-of-range surfactant") {
    const Grid2D g(8, 8, 1.0, 1.0);
    const ModelParams p = test_params();
    SimState s(g);
    for (double& v : s.rho.data()) v = 0.5;
    s.rho(3, 3) = 1.2;
    CHECK_THROWS_AS(
        (void)chemical_potential_rho(s.phi, s.rho, p, PotentialMode::singular),
        std::domain_error);
}

TEST_CASE("divergence-form terms are mean free") {
    const Grid2D g(16, 16, 1.3, 0.9);
    const ModelParams p = test_params(0.2);
    const SimState s = random_state(g, 7);

    const ScalarField mu = chemical_potential_phi(s.phi, s.rho, p);
    ScalarField sphi_prime(g);
    for (std::size_t k = 0; k < sphi_prime.data().size(); ++k)
        sphi_prime.data()[k] = eval_s_phi(s.phi.data()[k], 1);
    CHECK(mean(mu) == doctest::Approx(mean(sphi_prime)).epsilon(1e-12));

    const ScalarField psi =
        chemical_potential_rho(s.phi, s.rho, p, PotentialMode::regularized);
    ScalarField srho_prime(g);
    const RegularizedPotential reg = p.regularized();
    for (std::size_t k = 0; k < srho_prime.data().size(); ++k)
        srho_prime.data()[k] = eval_s_rho_eps(reg, s.rho.data()[k], 1);
    const ScalarField gsq = grad_sq_cell(s.phi);
    const double want = mean(srho_prime) - 0.5 * p.theta * mean(gsq);
    CHECK(mean(psi) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("potentials are the exact gradients of the discrete energy") {
    const Grid2D g(16, 16, 1.0, 1.0);
    const ModelParams p = test_params(0.3);
    SimState s = random_state(g, 17);
    const double delta = 1e-6;
    std::mt19937_64 rng(18);
    std::uniform_real_distribution<double> u(-1.0, 1.0);

    const ScalarField mu = chemical_potential_phi(s.phi, s.rho, p);
    const ScalarField psi =
        chemical_potential_rho(s.phi, s.rho, p, PotentialMode::regularized);

    for (int dir = 0; dir < 10; ++dir) {
        ScalarField v(g);
        for (double& x : v.data()) x = u(rng);

        SimState plus = s, minus = s;
        for (std::size_t k = 0; k < v.data().size(); ++k) {
            plus.phi.data()[k] += delta * v.data()[k];
            minus.phi.data()[k] -= delta * v.data()[k];
        }
        const double fd_phi = (energy(plus, p, EnergyMode::approx).total -
                               energy(minus, p, EnergyMode::approx).total) /
                              (2.0 * delta);
        const double pairing_phi = inner(mu, v);
        CHECK(std::abs(fd_phi - pairing_phi) <= 1e-5 * std::max(1.0, std::abs(fd_phi)));

        plus = s;
        minus = s;
        for (std::size_t k = 0; k < v.data().size(); ++k) {
            plus.rho.data()[k] += delta * v.data()[k];
            minus.rho.data()[k] -= delta * v.data()[k];
        }
        const double fd_rho = (energy(plus, p, EnergyMode::approx).total -
                               energy(minus, p, EnergyMode::approx).total) /
                              (2.0 * delta);
        const double pairing_rho = inner(psi, v);
        CHECK(std::abs(fd_rho - pairing_rho) <= 1e-5 * std::max(1.0, std::abs(fd_rho)));
    }
}

TEST_CASE("capillary force") {
    const Grid2D g(16, 16, 1.0, 1.0);

    SUBCASE("vanishes for constant fields") {
        ScalarField mu(g, 2.0), psi(g, -1.0), phi(g, 0.3), rho(g, 0.6);
        const MACField f = korteweg_force(mu, psi, phi, rho);
        CHECK(f.max_abs() == 0.0);
    }

    SUBCASE("mean subtraction changes the force by a discrete gradient") {
        const SimState s = random_state(g, 23);
        const ModelParams p = test_params();
        const ScalarField mu = chemical_potential_phi(s.phi, s.rho, p);
        const ScalarField psi =
            chemical_potential_rho(s.phi, s.rho, p, PotentialMode::regularized);
        const MACField with = korteweg_force(mu, psi, s.phi, s.rho, true);
        const MACField without = korteweg_force(mu, psi, s.phi, s.rho, false);

        auto project = [&](const MACField& v) {
            ScalarField d = divergence(v);
            const ScalarField pr = helmholtz_solve({0.0, 1.0, 0.0, 0.0}, d);
            MACField out = v;
            const double ihx = 1.0 / g.hx(), ihy = 1.0 / g.hy();
            for (int j = 0; j < g.ny; ++j)
                for (int i = 1; i < g.nx; ++i)
                    out.ux(i, j) -= (pr(i, j) - pr(i - 1, j)) * ihx;
            for (int j = 1; j < g.ny; ++j)
                for (int i = 0; i < g.nx; ++i)
                    out.uy(i, j) -= (pr(i, j) - pr(i, j - 1)) * ihy;
            return out;
        };
        const MACField pa = project(with);
        const MACField pb = project(without);
        double worst = 0.0;
        for (std::size_t k = 0; k < pa.ux_data().size(); ++k)
            worst = std::max(worst, std::abs(pa.ux_data()[k] - pb.ux_data()[k]));
        for (std::size_t k = 0; k < pa.uy_data().size(); ++k)
            worst = std::max(worst, std::abs(pa.uy_data()[k] - pb.uy_data()[k]));
        CHECK(worst < 1e-10);
    }

    SUBCASE("a flat interface forces only along its normal") {
        SimState s(g);
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                s.phi(i, j) = std::tanh((g.y_center(j) - 0.5) / 0.1);
        for (double& v : s.rho.data()) v = 0.4;
        const ModelParams p = test_params();
        const ScalarField mu = chemical_potential_phi(s.phi, s.rho, p);
        const ScalarField psi =
            chemical_potential_rho(s.phi, s.rho, p, PotentialMode::regularized);
        const MACField f = korteweg_force(mu, psi, s.phi, s.rho);
        for (double v : f.ux_data()) CHECK(std::abs(v) <= 1e-12);
    }
}

TEST_CASE("energy components") {
    const Grid2D g(16, 16, 1.0, 1.0);
    const ModelParams p = test_params();

    SUBCASE("uniform mixture on the unit square") {
        SimState s(g);
        for (double& v : s.phi.data()) v = 1.0;
        for (double& v : s.rho.data()) v = 0.5;
        const EnergyReport e = energy(s, p, EnergyMode::exact);
        CHECK(e.total == doctest::Approx(-std::log(2.0)).epsilon(1e-13));
        CHECK(e.kinetic == 0.0);
        CHECK(e.grad_phi == 0.0);
        CHECK(e.s_phi_bulk == doctest::Approx(0.0));
    }

    SUBCASE("adsorption term is nonpositive for nonnegative surfactant") {
        const SimState s = random_state(g, 31, 0.0, 1.0);
        const EnergyReport e = energy(s, p, EnergyMode::approx);
        CHECK(e.coupling <= 0.0);
    }

    SUBCASE("penalty scales with omega and vanishes with it") {
        SimState s = random_state(g, 32);
        const EnergyReport e0 = energy(s, test_params(0.0), EnergyMode::penalized);
        const EnergyReport ex = energy(s, test_params(0.0), EnergyMode::exact);
        CHECK(e0.penalty == 0.0);
        CHECK(e0.total == doctest::Approx(ex.total).epsilon(1e-14));
        const EnergyReport e1 = energy(s, test_params(0.5), EnergyMode::penalized);
        CHECK(e1.penalty > 0.0);
    }

    SUBCASE("total always equals the sum of the parts") {
        const SimState s = random_state(g, 33);
        const EnergyReport e = energy(s, test_params(0.7), EnergyMode::approx);
        const double sum = e.kinetic + e.grad_phi + e.laplace_phi + e.s_phi_bulk +
                           e.grad_rho + e.s_rho_bulk + e.coupling + e.penalty;
        CHECK(e.total == doctest::Approx(sum).epsilon(4e-16));
    }

    SUBCASE("out-of-range surfactant yields infinite exact energy") {
        SimState s(g);
        for (double& v : s.rho.data()) v = 0.5;
        s.rho(0, 0) = 1.5;
        CHECK(energy(s, p, EnergyMode::exact).total == kPlusInfinity);
    }
}

TEST_CASE("energy lower bound certificate") {
    ModelParams p = test_params();

    SUBCASE("coupling-free limit drops the quartic term") {
        ModelParams weak = p;
        weak.theta = 1e-30;
        const auto& ac = p.assumptions;
        const double want = -(ac.c4 + 17.0 * 0.5 * ac.L1 + std::log(2.0)) * 2.0;
        CHECK(energy_lower_bound(weak, 2.0) == doctest::Approx(want).epsilon(1e-9));
    }

    SUBCASE("doubling the domain doubles the bound") {
        const double b1 = energy_lower_bound(p, 1.0);
        const double b2 = energy_lower_bound(p, 2.0);
        CHECK(b2 == doctest::Approx(2.0 * b1).epsilon(1e-14));
    }
}

TEST_CASE("backward diffusion guard") {
    const Grid2D g(8, 8, 1.0, 1.0);
    ModelParams p = test_params();
    p.theta = 2.0;
    ScalarField rho(g, 0.9);
    CHECK(backward_diffusion_excess(rho, p) == doctest::Approx(0.8));
    p.theta = 1.0;
    CHECK(backward_diffusion_excess(rho, p) < 0.0);
}

TEST_CASE("semi-discrete dissipation identity for the pure gradient flow") {
    // With u = 0 and a small explicit step of d(phi)/dt = Lap mu,
    // d(rho)/dt = Lap psi, the energy drop matches dt times the dissipation
    // to second order in dt.
    const Grid2D g(16, 16, 1.0, 1.0);
    const ModelParams p = test_params(0.1);
    SimState s(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            s.phi(i, j) = 0.2 * std::cos(M_PI * (i + 0.5) / g.nx) +
                          0.1 * std::cos(2.0 * M_PI * (j + 0.5) / g.ny);
            s.rho(i, j) = 0.4 + 0.1 * std::cos(M_PI * (j + 0.5) / g.ny);
        }

    auto residual_for = [&](double dt) {
        const ScalarField mu = chemical_potential_phi(s.phi, s.rho, p);
        const ScalarField psi =
            chemical_potential_rho(s.phi, s.rho, p, PotentialMode::regularized);
        SimState next = s;
        const ScalarField lm = laplacian(mu);
        const ScalarField lp = laplacian(psi);
        for (std::size_t k = 0; k < next.phi.data().size(); ++k) {
            next.phi.data()[k] += dt * lm.data()[k];
            next.rho.data()[k] += dt * lp.data()[k];
        }
        const double e0 = energy(s, p, EnergyMode::approx).total;
        const double e1 = energy(next, p, EnergyMode::approx).total;
        const MACNorms gm = mac_norms(gradient(mu));
        const MACNorms gp = mac_norms(gradient(psi));
        return std::abs(e1 - e0 + dt * (gm.l2 * gm.l2 + gp.l2 * gp.l2));
    };
    const double r1 = residual_for(2e-4);
    const double r2 = residual_for(1e-4);
    CHECK(r1 / r2 > 3.0); // second order per step
    CHECK(r1 / r2 < 5.0);
}

TEST_CASE("initial surfactant regularization") {
    const Grid2D g(16, 16, 1.0, 1.0);
    const ModelParams p = test_params();

    SUBCASE("the symmetric constant is a fixed point") {
        ScalarField rho0(g, 0.5);
        const RegularizeReport rep = regularize_initial_rho(rho0, 3.0, p);
        for (double v : rep.rho.data()) CHECK(v == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(rep.residual_l2 <= 1e-10);
    }

    SUBCASE("inactive cutoff returns the datum") {
        ScalarField rho0(g);
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                rho0(i, j) = 0.5 + 0.1 * std::cos(M_PI * (i + 0.5) / g.nx);
        // Compose the source and verify the cutoff is far from active.
        ScalarField psi0 = laplacian(rho0);
        const auto& fh = p.potentials.flory_huggins;
        double linf = 0.0;
        for (std::size_t k = 0; k < psi0.data().size(); ++k) {
            psi0.data()[k] = -p.beta * psi0.data()[k] + fh.s_hat(rho0.data()[k], 1);
            linf = std::max(linf, std::abs(psi0.data()[k]));
        }
        const double k_cut = 2.0 * linf;
        const RegularizeReport rep = regularize_initial_rho(rho0, k_cut, p);
        double worst = 0.0;
        for (std::size_t k = 0; k < rho0.data().size(); ++k)
            worst = std::max(worst, std::abs(rep.rho.data()[k] - rho0.data()[k]));
        CHECK(worst < 1e-8);
        CHECK(rep.residual_l2 <= 1e-10);
        CHECK(std::abs(rep.mean_shift) < 1e-8);
    }

    SUBCASE("clamped sources are ordered in norm and the solve stays inside") {
        ScalarField rho0(g);
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                rho0(i, j) = 0.5 + 0.45 * std::cos(M_PI * (i + 0.5) / g.nx) *
                                        std::cos(M_PI * (j + 0.5) / g.ny);
        ScalarField psi0 = laplacian(rho0);
        const auto& fh = p.potentials.flory_huggins;
        double linf = 0.0;
        for (std::size_t k = 0; k < psi0.data().size(); ++k) {
            psi0.data()[k] = -p.beta * psi0.data()[k] + fh.s_hat(rho0.data()[k], 1);
            linf = std::max(linf, std::abs(psi0.data()[k]));
        }
        REQUIRE(linf > 1.0);
        const double k1 = 0.25 * linf, k2 = 0.5 * linf;
        auto clamped_l2 = [&](double kcut) {
            double acc = 0.0;
            for (double v : psi0.data()) {
                const double c = std::clamp(v, -kcut, kcut);
                acc += c * c;
            }
            return std::sqrt(acc * g.cell_area());
        };
        double full = 0.0;
        for (double v : psi0.data()) full += v * v;
        full = std::sqrt(full * g.cell_area());
        CHECK(clamped_l2(k1) <= clamped_l2(k2));
        CHECK(clamped_l2(k2) <= full);

        for (double kcut : {k1, k2}) {
            const RegularizeReport rep = regularize_initial_rho(rho0, kcut, p);
            CHECK(rep.residual_l2 <= 1e-10);
            for (double v : rep.rho.data()) {
                CHECK(v > 0.0);
                CHECK(v < 1.0);
            }
        }
    }

    SUBCASE("rejects data outside the open interval") {
        ScalarField rho0(g, 0.5);
        rho0(0, 0) = 1.0;
        CHECK_THROWS_AS((void)regularize_initial_rho(rho0, 1.0, test_params()),
                        std::invalid_argument);
    }
}

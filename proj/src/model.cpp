#include "nschs/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nschs {

ScalarField grad_sq_cell(const ScalarField& phi) {
    const Grid2D& g = phi.grid();
    const double ihx = 1.0 / g.hx(), ihy = 1.0 / g.hy();
    ScalarField out(g);
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            double dxw = 0.0, dxe = 0.0, dys = 0.0, dyn = 0.0;
            if (i > 0) dxw = (phi(i, j) - phi(i - 1, j)) * ihx;
            if (i + 1 < g.nx) dxe = (phi(i + 1, j) - phi(i, j)) * ihx;
            if (j > 0) dys = (phi(i, j) - phi(i, j - 1)) * ihy;
            if (j + 1 < g.ny) dyn = (phi(i, j + 1) - phi(i, j)) * ihy;
            out(i, j) = 0.5 * (dxw * dxw + dxe * dxe) + 0.5 * (dys * dys + dyn * dyn);
        }
    }
    return out;
}

ScalarField chemical_potential_phi(const ScalarField& phi, const ScalarField& rho,
                                   const ModelParams& params) {
    ScalarField mu = biharmonic(phi);
    const ScalarField lap = laplacian(phi);
    for (std::size_t k = 0; k < mu.data().size(); ++k) {
        mu.data()[k] = params.alpha * mu.data()[k] - lap.data()[k] +
                       eval_s_phi(phi.data()[k], 1);
    }
    const ScalarField coupling = div_scaled_gradient(rho, phi);
    for (std::size_t k = 0; k < mu.data().size(); ++k)
        mu.data()[k] += params.theta * coupling.data()[k];
    if (params.penalty_omega != 0.0) {
        const ScalarField q = grad_sq_cell(phi);
        const ScalarField pen = div_scaled_gradient(q, phi);
        for (std::size_t k = 0; k < mu.data().size(); ++k)
            mu.data()[k] -= params.penalty_omega * pen.data()[k];
    }
    return mu;
}

ScalarField chemical_potential_rho(const ScalarField& phi, const ScalarField& rho,
                                   const ModelParams& params, PotentialMode mode,
                                   std::optional<double> singular_clip,
                                   long* clamp_events) {
    const auto& fh = params.potentials.flory_huggins;
    ScalarField psi = laplacian(rho);
    const ScalarField gsq = grad_sq_cell(phi);
    long clamped = 0;

    if (mode == PotentialMode::regularized) {
        const RegularizedPotential reg = params.regularized();
        for (std::size_t k = 0; k < psi.data().size(); ++k) {
            psi.data()[k] = -params.beta * psi.data()[k] +
                            eval_s_rho_eps(reg, rho.data()[k], 1) -
                            0.5 * params.theta * gsq.data()[k];
        }
    } else {
        for (std::size_t k = 0; k < psi.data().size(); ++k) {
            double s = rho.data()[k];
            if (singular_clip) {
                const double clip = *singular_clip;
                const double sc = std::clamp(s, clip, 1.0 - clip);
                if (sc != s) ++clamped;
                s = sc;
            } else if (s <= 0.0 || s >= 1.0) {
                throw std::domain_error("chemical_potential_rho: rho leaves (0,1) at cell " +
                                        std::to_string(k));
            }
            psi.data()[k] = -params.beta * psi.data()[k] + fh.s_hat(s, 1) +
                            fh.r(rho.data()[k], 1) - 0.5 * params.theta * gsq.data()[k];
        }
    }
    if (clamp_events) *clamp_events = clamped;
    return psi;
}

MACField korteweg_force(const ScalarField& mu, const ScalarField& psi,
                        const ScalarField& phi, const ScalarField& rho,
                        bool subtract_means) {
    const Grid2D& g = phi.grid();
    const double mu_bar = subtract_means ? mean(mu) : 0.0;
    const double psi_bar = subtract_means ? mean(psi) : 0.0;
    const double ihx = 1.0 / g.hx(), ihy = 1.0 / g.hy();
    MACField f(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 1; i < g.nx; ++i) {
            const double m = 0.5 * (mu(i - 1, j) + mu(i, j)) - mu_bar;
            const double s = 0.5 * (psi(i - 1, j) + psi(i, j)) - psi_bar;
            f.ux(i, j) = m * (phi(i, j) - phi(i - 1, j)) * ihx +
                         s * (rho(i, j) - rho(i - 1, j)) * ihx;
        }
    for (int j = 1; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const double m = 0.5 * (mu(i, j - 1) + mu(i, j)) - mu_bar;
            const double s = 0.5 * (psi(i, j - 1) + psi(i, j)) - psi_bar;
            f.uy(i, j) = m * (phi(i, j) - phi(i, j - 1)) * ihy +
                         s * (rho(i, j) - rho(i, j - 1)) * ihy;
        }
    return f;
}

EnergyReport energy(const SimState& state, const ModelParams& params, EnergyMode mode) {
    const Grid2D& g = state.grid();
    const double da = g.cell_area();
    EnergyReport rep;

    double kin = 0.0;
    for (double v : state.u.ux_data()) kin += v * v;
    for (double v : state.u.uy_data()) kin += v * v;
    rep.kinetic = 0.5 * kin * da;

    const MACField gphi = gradient(state.phi);
    double gp = 0.0;
    for (double v : gphi.ux_data()) gp += v * v;
    for (double v : gphi.uy_data()) gp += v * v;
    rep.grad_phi = 0.5 * gp * da;

    const ScalarField lap = laplacian(state.phi);
    double lp = 0.0;
    for (double v : lap.data()) lp += v * v;
    rep.laplace_phi = 0.5 * params.alpha * lp * da;

    double sphi = 0.0;
    for (double v : state.phi.data()) sphi += eval_s_phi(v, 0);
    rep.s_phi_bulk = sphi * da;

    const MACField grho = gradient(state.rho);
    double gr = 0.0;
    for (double v : grho.ux_data()) gr += v * v;
    for (double v : grho.uy_data()) gr += v * v;
    rep.grad_rho = 0.5 * params.beta * gr * da;

    double srho = 0.0;
    if (mode == EnergyMode::approx) {
        const RegularizedPotential reg = params.regularized();
        for (double v : state.rho.data()) srho += eval_s_rho_eps(reg, v, 0);
    } else {
        const auto& fh = params.potentials.flory_huggins;
        for (double v : state.rho.data()) {
            const double e = eval_s_rho_singular(fh, v, 0);
            if (e == kPlusInfinity) {
                srho = kPlusInfinity;
                break;
            }
            srho += e;
        }
    }
    rep.s_rho_bulk = (srho == kPlusInfinity) ? kPlusInfinity : srho * da;

    const ScalarField gsq = grad_sq_cell(state.phi);
    double cpl = 0.0;
    for (std::size_t k = 0; k < gsq.data().size(); ++k)
        cpl += state.rho.data()[k] * gsq.data()[k];
    rep.coupling = -0.5 * params.theta * cpl * da;

    if (mode != EnergyMode::exact && params.penalty_omega != 0.0) {
        double pen = 0.0;
        for (double v : gsq.data()) pen += v * v;
        rep.penalty = 0.25 * params.penalty_omega * pen * da;
    }

    rep.total = rep.kinetic + rep.grad_phi + rep.laplace_phi + rep.s_phi_bulk +
                rep.grad_rho + rep.s_rho_bulk + rep.coupling + rep.penalty;
    return rep;
}

double energy_lower_bound(const ModelParams& params, double area) {
    const auto& fh = params.potentials.flory_huggins;
    const auto& ac = params.assumptions;
    const double r0 = std::abs(fh.r(0.0, 0));
    const double r1 = std::abs(fh.r(0.0, 1));
    // |R(s)| <= C_R (1 + s^2) from a Taylor bound with |R''| <= L1.
    const double cr = std::max(r0 + 0.5 * r1, 0.5 * r1 + 0.5 * ac.L1);
    const double eps = params.potentials.regularization_eps
                           ? *params.potentials.regularization_eps
                           : 0.5 * fh.eps1;
    const double gamma1 = convexity_certificate({fh, eps}).gamma1;
    const double c = ac.c4 + 17.0 * cr +
                     8.0 * std::pow(params.theta, 4) / (ac.c3 * params.alpha * params.alpha) +
                     gamma1;
    return -c * area;
}

double backward_diffusion_excess(const ScalarField& rho, const ModelParams& params) {
    double worst = -std::numeric_limits<double>::max();
    for (double v : rho.data()) worst = std::max(worst, params.theta * v - 1.0);
    return worst;
}

PenaltyMarginAdvisory penalty_margin_advisory(const ModelParams& params) {
    const auto& fh = params.potentials.flory_huggins;
    const auto& ac = params.assumptions;
    const double eps = params.potentials.regularization_eps
                           ? *params.potentials.regularization_eps
                           : 0.5 * fh.eps1;
    PenaltyMarginAdvisory adv;
    // The tails grow like S''(anchor)/2 times the squared distance; beyond
    // s = 4 the far tail still delivers a quarter of that coefficient.
    adv.k1 = std::min(0.5 * fh.s_hat(eps, 2), 0.25 * fh.s_hat(1.0 - eps, 2));
    const double r0 = std::abs(fh.r(0.0, 0));
    const double r1 = std::abs(fh.r(0.0, 1));
    const double cr = std::max(r0 + 0.5 * r1, 0.5 * r1 + 0.5 * ac.L1);
    adv.required = (params.penalty_omega > 0.0)
                       ? cr + params.theta * params.theta / (2.0 * params.penalty_omega)
                       : cr;
    adv.satisfied = adv.k1 >= adv.required;
    return adv;
}

RegularizeReport regularize_initial_rho(const ScalarField& rho0, double k,
                                        const ModelParams& params,
                                        double tol, int max_iter) {
    const auto& fh = params.potentials.flory_huggins;
    const Grid2D& g = rho0.grid();
    for (double v : rho0.data())
        if (!(v > 0.0 && v < 1.0))
            throw std::invalid_argument("regularize_initial_rho: rho0 must lie in (0,1)");
    const double m0 = mean(rho0);
    if (!(m0 > 0.0 && m0 < 1.0))
        throw std::invalid_argument("regularize_initial_rho: mean(rho0) must lie in (0,1)");
    if (k < 0.0) throw std::invalid_argument("regularize_initial_rho: k must be >= 0");

    // psi0_hat = -beta Lap rho0 + S_hat'(rho0), then the cutoff h_k.
    ScalarField target = laplacian(rho0);
    for (std::size_t i = 0; i < target.data().size(); ++i)
        target.data()[i] = -params.beta * target.data()[i] + fh.s_hat(rho0.data()[i], 1);
    for (double& v : target.data()) v = std::clamp(v, -k, k);

    auto residual = [&](const ScalarField& r, ScalarField& out) {
        out = laplacian(r);
        for (std::size_t i = 0; i < out.data().size(); ++i)
            out.data()[i] = -params.beta * out.data()[i] + fh.s_hat(r.data()[i], 1) -
                            target.data()[i];
    };
    auto l2 = [&](const ScalarField& f) {
        double s = 0.0;
        for (double v : f.data()) s += v * v;
        return std::sqrt(s * g.cell_area());
    };
    auto inside = [](const ScalarField& f) {
        for (double v : f.data())
            if (!(v > 0.0 && v < 1.0)) return false;
        return true;
    };

    RegularizeReport rep{rho0, 0.0, 0.0, 0};
    ScalarField res(g);
    residual(rep.rho, res);
    double res_norm = l2(res);

    for (int it = 0; it < max_iter && res_norm > tol; ++it) {
        // Quasi-Newton: freeze the potential curvature at its current
        // minimum so the linearized operator stays cosine-diagonal and SPD.
        double sigma = std::numeric_limits<double>::max();
        for (double v : rep.rho.data()) sigma = std::min(sigma, fh.s_hat(v, 2));
        sigma = std::max(sigma, 1e-8);
        ScalarField neg_res = res;
        for (double& v : neg_res.data()) v = -v;
        const ScalarField delta = helmholtz_solve({sigma, -params.beta, 0.0, 0.0}, neg_res);

        double step = 1.0;
        bool accepted = false;
        for (int half = 0; half < 40; ++half) {
            ScalarField trial = rep.rho;
            for (std::size_t i = 0; i < trial.data().size(); ++i)
                trial.data()[i] += step * delta.data()[i];
            if (inside(trial)) {
                ScalarField trial_res(g);
                residual(trial, trial_res);
                const double trial_norm = l2(trial_res);
                if (trial_norm < res_norm) {
                    rep.rho = trial;
                    res = trial_res;
                    res_norm = trial_norm;
                    accepted = true;
                    break;
                }
            }
            step *= 0.5;
        }
        ++rep.newton_iterations;
        if (!accepted)
            throw std::runtime_error(
                "regularize_initial_rho: damped Newton stalled at residual " +
                std::to_string(res_norm));
    }
    if (res_norm > tol)
        throw std::runtime_error("regularize_initial_rho: no convergence after " +
                                 std::to_string(max_iter) + " iterations, residual " +
                                 std::to_string(res_norm));
    rep.residual_l2 = res_norm;
    rep.mean_shift = mean(rep.rho) - m0;
    return rep;
}

} // namespace nschs

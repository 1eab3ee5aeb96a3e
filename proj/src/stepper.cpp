#include "nschs/stepper.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "nschs/spectral.hpp"

namespace nschs {

namespace {

/// div(u f) at cells with centered face averages of f; boundary-normal
/// velocity faces carry zero flux.
ScalarField advect(const MACField& u, const ScalarField& f) {
    const Grid2D& g = f.grid();
    const double ihx = 1.0 / g.hx(), ihy = 1.0 / g.hy();
    ScalarField out(g);
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            double fe = 0.0, fw = 0.0, fn = 0.0, fs = 0.0;
            if (i + 1 < g.nx) fe = u.ux(i + 1, j) * 0.5 * (f(i, j) + f(i + 1, j));
            if (i > 0) fw = u.ux(i, j) * 0.5 * (f(i - 1, j) + f(i, j));
            if (j + 1 < g.ny) fn = u.uy(i, j + 1) * 0.5 * (f(i, j) + f(i, j + 1));
            if (j > 0) fs = u.uy(i, j) * 0.5 * (f(i, j - 1) + f(i, j));
            out(i, j) = (fe - fw) * ihx + (fn - fs) * ihy;
        }
    }
    return out;
}

void extract_interior(const MACField& u, int component, std::vector<double>& out) {
    const Grid2D& g = u.grid();
    if (component == 0) {
        out.resize(static_cast<std::size_t>(g.nx - 1) * g.ny);
        for (int j = 0; j < g.ny; ++j)
            for (int i = 1; i < g.nx; ++i)
                out[static_cast<std::size_t>(j) * (g.nx - 1) + (i - 1)] = u.ux(i, j);
    } else {
        out.resize(static_cast<std::size_t>(g.nx) * (g.ny - 1));
        for (int j = 1; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                out[static_cast<std::size_t>(j - 1) * g.nx + i] = u.uy(i, j);
    }
}

void inject_interior(const std::vector<double>& in, int component, MACField& u) {
    const Grid2D& g = u.grid();
    if (component == 0) {
        for (int j = 0; j < g.ny; ++j)
            for (int i = 1; i < g.nx; ++i)
                u.ux(i, j) = in[static_cast<std::size_t>(j) * (g.nx - 1) + (i - 1)];
    } else {
        for (int j = 1; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                u.uy(i, j) = in[static_cast<std::size_t>(j - 1) * g.nx + i];
    }
}

/// Implicit solve (1 - dt (nu/2) Lap) w = rhs for one velocity component,
/// with no-slip sine bases.
void viscous_solve(const Grid2D& g, int component, double dt_nu_half,
                   std::vector<double>& values) {
    const FaceTransform& tr = face_transform(g, component);
    std::vector<double> coeff;
    tr.forward(values, coeff);
    const auto& lf = tr.lambda_fast();
    const auto& ls = tr.lambda_slow();
    for (int s = 0; s < tr.n_slow(); ++s)
        for (int f = 0; f < tr.n_fast(); ++f) {
            const double lam = lf[f] + ls[s];
            coeff[static_cast<std::size_t>(s) * tr.n_fast() + f] /= (1.0 - dt_nu_half * lam);
        }
    tr.inverse(coeff, values);
}

struct ExplicitMomentum {
    std::vector<double> x; // interior vertical faces, (nx-1) x ny
    std::vector<double> y; // interior horizontal faces, nx x (ny-1)
};

/// Divergence-form advection fluxes del.(u (x) u) on interior faces.
ExplicitMomentum advection_terms(const MACField& u) {
    const Grid2D& g = u.grid();
    const double ihx = 1.0 / g.hx(), ihy = 1.0 / g.hy();
    ExplicitMomentum out;
    out.x.assign(static_cast<std::size_t>(g.nx - 1) * g.ny, 0.0);
    out.y.assign(static_cast<std::size_t>(g.nx) * (g.ny - 1), 0.0);

    // x-momentum: d/dx (uu) from cell centers, d/dy (uv) from corners.
    std::vector<double> uu(g.size());
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const double ubar = 0.5 * (u.ux(i, j) + u.ux(i + 1, j));
            uu[static_cast<std::size_t>(j) * g.nx + i] = ubar * ubar;
        }
    std::vector<double> uv(static_cast<std::size_t>(g.nx + 1) * (g.ny + 1), 0.0);
    for (int j = 1; j < g.ny; ++j)
        for (int i = 1; i < g.nx; ++i) {
            const double ubar = 0.5 * (u.ux(i, j - 1) + u.ux(i, j));
            const double vbar = 0.5 * (u.uy(i - 1, j) + u.uy(i, j));
            uv[static_cast<std::size_t>(j) * (g.nx + 1) + i] = ubar * vbar;
        }
    for (int j = 0; j < g.ny; ++j)
        for (int i = 1; i < g.nx; ++i) {
            const double ddx = (uu[static_cast<std::size_t>(j) * g.nx + i] -
                                uu[static_cast<std::size_t>(j) * g.nx + i - 1]) * ihx;
            const double ddy = (uv[static_cast<std::size_t>(j + 1) * (g.nx + 1) + i] -
                                uv[static_cast<std::size_t>(j) * (g.nx + 1) + i]) * ihy;
            out.x[static_cast<std::size_t>(j) * (g.nx - 1) + (i - 1)] = ddx + ddy;
        }

    // y-momentum: d/dx (uv) from corners, d/dy (vv) from cell centers.
    std::vector<double> vv(g.size());
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const double vbar = 0.5 * (u.uy(i, j) + u.uy(i, j + 1));
            vv[static_cast<std::size_t>(j) * g.nx + i] = vbar * vbar;
        }
    for (int j = 1; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const double ddx = (uv[static_cast<std::size_t>(j) * (g.nx + 1) + i + 1] -
                                uv[static_cast<std::size_t>(j) * (g.nx + 1) + i]) * ihx;
            const double ddy = (vv[static_cast<std::size_t>(j) * g.nx + i] -
                                vv[static_cast<std::size_t>(j - 1) * g.nx + i]) * ihy;
            out.y[static_cast<std::size_t>(j - 1) * g.nx + i] = ddx + ddy;
        }
    return out;
}

/// del.((nu - nu_floor) D u) on interior faces; nu-excess lives at cells,
/// the shear part at corners with no-slip ghosts.
ExplicitMomentum viscous_excess_terms(const MACField& u, const ScalarField& nu_excess) {
    const Grid2D& g = u.grid();
    const double ihx = 1.0 / g.hx(), ihy = 1.0 / g.hy();
    ExplicitMomentum out;
    out.x.assign(static_cast<std::size_t>(g.nx - 1) * g.ny, 0.0);
    out.y.assign(static_cast<std::size_t>(g.nx) * (g.ny - 1), 0.0);

    std::vector<double> txx(g.size()), tyy(g.size());
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const std::size_t c = static_cast<std::size_t>(j) * g.nx + i;
            txx[c] = nu_excess(i, j) * (u.ux(i + 1, j) - u.ux(i, j)) * ihx;
            tyy[c] = nu_excess(i, j) * (u.uy(i, j + 1) - u.uy(i, j)) * ihy;
        }

    std::vector<double> txy(static_cast<std::size_t>(g.nx + 1) * (g.ny + 1), 0.0);
    for (int j = 0; j <= g.ny; ++j)
        for (int i = 0; i <= g.nx; ++i) {
            // d/dy ux with anti-reflection ghosts at the walls.
            double duxdy;
            if (i == 0 || i == g.nx) {
                duxdy = 0.0; // boundary-normal faces are zero rows
            } else if (j == 0) {
                duxdy = 2.0 * u.ux(i, 0) * ihy;
            } else if (j == g.ny) {
                duxdy = -2.0 * u.ux(i, g.ny - 1) * ihy;
            } else {
                duxdy = (u.ux(i, j) - u.ux(i, j - 1)) * ihy;
            }
            double duydx;
            if (j == 0 || j == g.ny) {
                duydx = 0.0;
            } else if (i == 0) {
                duydx = 2.0 * u.uy(0, j) * ihx;
            } else if (i == g.nx) {
                duydx = -2.0 * u.uy(g.nx - 1, j) * ihx;
            } else {
                duydx = (u.uy(i, j) - u.uy(i - 1, j)) * ihx;
            }
            double q = 0.0;
            int n = 0;
            for (int dj = -1; dj <= 0; ++dj)
                for (int di = -1; di <= 0; ++di) {
                    const int ci = i + di, cj = j + dj;
                    if (ci >= 0 && ci < g.nx && cj >= 0 && cj < g.ny) {
                        q += nu_excess(ci, cj);
                        ++n;
                    }
                }
            q /= n;
            txy[static_cast<std::size_t>(j) * (g.nx + 1) + i] = q * 0.5 * (duxdy + duydx);
        }

    for (int j = 0; j < g.ny; ++j)
        for (int i = 1; i < g.nx; ++i) {
            const double ddx = (txx[static_cast<std::size_t>(j) * g.nx + i] -
                                txx[static_cast<std::size_t>(j) * g.nx + i - 1]) * ihx;
            const double ddy = (txy[static_cast<std::size_t>(j + 1) * (g.nx + 1) + i] -
                                txy[static_cast<std::size_t>(j) * (g.nx + 1) + i]) * ihy;
            out.x[static_cast<std::size_t>(j) * (g.nx - 1) + (i - 1)] = ddx + ddy;
        }
    for (int j = 1; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const double ddx = (txy[static_cast<std::size_t>(j) * (g.nx + 1) + i + 1] -
                                txy[static_cast<std::size_t>(j) * (g.nx + 1) + i]) * ihx;
            const double ddy = (tyy[static_cast<std::size_t>(j) * g.nx + i] -
                                tyy[static_cast<std::size_t>(j - 1) * g.nx + i]) * ihy;
            out.y[static_cast<std::size_t>(j - 1) * g.nx + i] = ddx + ddy;
        }
    return out;
}

} // namespace

StepConfig resolve_stabilization(StepConfig cfg, const SimState& initial,
                                 const ModelParams& params) {
    if (cfg.stab_s1 <= 0.0) {
        double m = 1.0;
        for (int k = 0; k <= 240; ++k) {
            const double s = -1.2 + 2.4 * k / 240.0;
            m = std::max(m, std::abs(eval_s_phi(s, 2)));
        }
        cfg.stab_s1 = 2.0 * m;
    }
    if (cfg.stab_s2 <= 0.0) {
        const auto& fh = params.potentials.flory_huggins;
        const double eps = params.potentials.regularization_eps
                               ? *params.potentials.regularization_eps
                               : 0.5 * fh.eps1;
        const ConvexityCertificate cert = convexity_certificate({fh, eps});
        double gmax = 0.0;
        for (double v : grad_sq_cell(initial.phi).data()) gmax = std::max(gmax, v);
        // Curvature of the explicitly-treated potential over the initial
        // rho-range (slightly widened); this is what the stabilization
        // actually has to beat.
        double rmin = 1.0, rmax = 0.0;
        for (double v : initial.rho.data()) {
            rmin = std::min(rmin, v);
            rmax = std::max(rmax, v);
        }
        const double margin = 0.05 * (rmax - rmin) + 1e-6;
        const RegularizedPotential reg{fh, eps};
        double curv = 0.0;
        for (int k = 0; k <= 200; ++k) {
            const double s = (rmin - margin) + (rmax - rmin + 2.0 * margin) * k / 200.0;
            curv = std::max(curv, std::abs(eval_s_rho_eps(reg, s, 2)));
        }
        cfg.stab_s2 = cert.gamma2 + params.theta * gmax + curv;
    }
    if (cfg.rho_clip < 0.0) {
        cfg.rho_clip = params.potentials.regularization_eps
                           ? 0.5 * *params.potentials.regularization_eps
                           : 1e-8;
    }
    if (params.potentials.regularization_eps && cfg.rho_clip > 0.0 &&
        cfg.rho_clip >= *params.potentials.regularization_eps)
        throw std::invalid_argument("StepConfig: rho_clip must be below regularization_eps");
    return cfg;
}

ScalarField step_phi(const SimState& state, const ModelParams& params,
                     const StepConfig& cfg) {
    const Grid2D& g = state.grid();
    const ScalarField adv = advect(state.u, state.phi);

    if (cfg.transport_only) {
        ScalarField out = state.phi;
        for (std::size_t k = 0; k < out.data().size(); ++k)
            out.data()[k] -= cfg.dt * adv.data()[k];
        return out;
    }

    // Explicit bracket: S_phi'(phi) - s1 phi + theta div(rho grad phi)
    //                   - omega div(|grad phi|^2 grad phi).
    ScalarField bracket(g);
    for (std::size_t k = 0; k < bracket.data().size(); ++k)
        bracket.data()[k] = eval_s_phi(state.phi.data()[k], 1) -
                            cfg.stab_s1 * state.phi.data()[k];
    {
        const ScalarField coupled = div_scaled_gradient(state.rho, state.phi);
        for (std::size_t k = 0; k < bracket.data().size(); ++k)
            bracket.data()[k] += params.theta * coupled.data()[k];
    }
    if (params.penalty_omega != 0.0) {
        const ScalarField q = grad_sq_cell(state.phi);
        const ScalarField pen = div_scaled_gradient(q, state.phi);
        for (std::size_t k = 0; k < bracket.data().size(); ++k)
            bracket.data()[k] -= params.penalty_omega * pen.data()[k];
    }

    const ScalarField lap_bracket = laplacian(bracket);
    ScalarField rhs = state.phi;
    for (std::size_t k = 0; k < rhs.data().size(); ++k)
        rhs.data()[k] += cfg.dt * lap_bracket.data()[k] - cfg.dt * adv.data()[k];

    return helmholtz_solve({1.0, -cfg.dt * cfg.stab_s1, cfg.dt, -cfg.dt * params.alpha}, rhs);
}

ScalarField step_rho(const SimState& state, const ModelParams& params,
                     const StepConfig& cfg, const ScalarField& phi_next,
                     long* clamp_events) {
    const Grid2D& g = state.grid();
    const ScalarField adv = advect(state.u, state.rho);
    if (clamp_events) *clamp_events = 0;

    if (cfg.transport_only) {
        ScalarField out = state.rho;
        for (std::size_t k = 0; k < out.data().size(); ++k)
            out.data()[k] -= cfg.dt * adv.data()[k];
        return out;
    }

    const ScalarField gsq = grad_sq_cell(phi_next);
    const auto& fh = params.potentials.flory_huggins;
    ScalarField bracket(g);
    long clamped = 0;
    if (cfg.potential_mode == PotentialMode::regularized) {
        const RegularizedPotential reg = params.regularized();
        for (std::size_t k = 0; k < bracket.data().size(); ++k)
            bracket.data()[k] = eval_s_rho_eps(reg, state.rho.data()[k], 1) -
                                cfg.stab_s2 * state.rho.data()[k] -
                                0.5 * params.theta * gsq.data()[k];
    } else {
        for (std::size_t k = 0; k < bracket.data().size(); ++k) {
            double s = state.rho.data()[k];
            if (cfg.rho_clip > 0.0) {
                const double sc = std::clamp(s, cfg.rho_clip, 1.0 - cfg.rho_clip);
                if (sc != s) ++clamped;
                s = sc;
            } else if (s <= 0.0 || s >= 1.0) {
                throw std::domain_error("step_rho: rho left (0,1) with the clamp disabled");
            }
            bracket.data()[k] = fh.s_hat(s, 1) + fh.r(state.rho.data()[k], 1) -
                                cfg.stab_s2 * state.rho.data()[k] -
                                0.5 * params.theta * gsq.data()[k];
        }
    }
    if (clamp_events) *clamp_events = clamped;

    const ScalarField lap_bracket = laplacian(bracket);
    ScalarField rhs = state.rho;
    for (std::size_t k = 0; k < rhs.data().size(); ++k)
        rhs.data()[k] += cfg.dt * lap_bracket.data()[k] - cfg.dt * adv.data()[k];

    return helmholtz_solve({1.0, -cfg.dt * cfg.stab_s2, cfg.dt * params.beta, 0.0}, rhs);
}

std::pair<MACField, ScalarField> step_ns(const SimState& state, const ModelParams& params,
                                         const StepConfig& cfg, const MACField& force) {
    const Grid2D& g = state.grid();
    const double h = std::min(g.hx(), g.hy());
    const double umax = state.u.max_abs();
    if (umax * cfg.dt / h > cfg.cfl_limit)
        throw std::runtime_error("step_ns: CFL violation, max|u| dt / h = " +
                                 std::to_string(umax * cfg.dt / h) + " > " +
                                 std::to_string(cfg.cfl_limit));
    {
        const ScalarField div_in = divergence(state.u);
        double d2 = 0.0;
        for (double v : div_in.data()) d2 += v * v;
        const double div_l2 = std::sqrt(d2 * g.cell_area());
        const double scale = 1.0 + mac_norms(state.u).l2 / h;
        if (div_l2 > 1e-8 * scale)
            throw std::invalid_argument("step_ns: input velocity is not divergence-free");
    }

    const ExplicitMomentum adv = advection_terms(state.u);
    ExplicitMomentum excess;
    const bool variable_nu = params.viscosity.kind != ViscosityKind::constant ||
                             params.viscosity.nu1 != params.viscosity.nu_floor;
    if (variable_nu) {
        ScalarField nu_excess(g);
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                nu_excess(i, j) = viscosity_eval(params.viscosity, state.phi(i, j),
                                                 state.rho(i, j)) - params.viscosity.nu_floor;
        excess = viscous_excess_terms(state.u, nu_excess);
    } else {
        excess.x.assign(static_cast<std::size_t>(g.nx - 1) * g.ny, 0.0);
        excess.y.assign(static_cast<std::size_t>(g.nx) * (g.ny - 1), 0.0);
    }

    // Predictor with the constant viscosity part implicit.
    std::vector<double> wx, wy;
    extract_interior(state.u, 0, wx);
    extract_interior(state.u, 1, wy);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 1; i < g.nx; ++i) {
            const std::size_t k = static_cast<std::size_t>(j) * (g.nx - 1) + (i - 1);
            wx[k] += cfg.dt * (-adv.x[k] + excess.x[k] + force.ux(i, j));
        }
    for (int j = 1; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const std::size_t k = static_cast<std::size_t>(j - 1) * g.nx + i;
            wy[k] += cfg.dt * (-adv.y[k] + excess.y[k] + force.uy(i, j));
        }
    const double dt_nu_half = 0.5 * cfg.dt * params.viscosity.nu_floor;
    viscous_solve(g, 0, dt_nu_half, wx);
    viscous_solve(g, 1, dt_nu_half, wy);

    MACField ustar(g);
    inject_interior(wx, 0, ustar);
    inject_interior(wy, 1, ustar);

    // Projection: Lap p = div(u*) / dt, then subtract dt grad p.
    ScalarField div_star = divergence(ustar);
    for (double& v : div_star.data()) v /= cfg.dt;
    const ScalarField p = helmholtz_solve({0.0, 1.0, 0.0, 0.0}, div_star);

    MACField u_new = ustar;
    const double ihx = 1.0 / g.hx(), ihy = 1.0 / g.hy();
    for (int j = 0; j < g.ny; ++j)
        for (int i = 1; i < g.nx; ++i)
            u_new.ux(i, j) -= cfg.dt * (p(i, j) - p(i - 1, j)) * ihx;
    for (int j = 1; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            u_new.uy(i, j) -= cfg.dt * (p(i, j) - p(i, j - 1)) * ihy;
    u_new.enforce_no_slip();
    return {u_new, p};
}

SimState step(const SimState& state, const ModelParams& params, const StepConfig& cfg,
              StepInfo* info) {
    SimState next(state.grid());
    next.t = state.t + cfg.dt;
    next.phi = step_phi(state, params, cfg);
    long clamp_rho = 0;
    next.rho = step_rho(state, params, cfg, next.phi, &clamp_rho);

    long clamp_refresh = 0;
    if (cfg.transport_only) {
        next.mu = ScalarField(state.grid());
        next.psi = ScalarField(state.grid());
    } else {
        next.mu = chemical_potential_phi(next.phi, next.rho, params);
        next.psi = chemical_potential_rho(
            next.phi, next.rho, params, cfg.potential_mode,
            cfg.potential_mode == PotentialMode::singular && cfg.rho_clip > 0.0
                ? std::optional<double>(cfg.rho_clip)
                : std::nullopt,
            &clamp_refresh);
    }

    if (cfg.ns_enabled) {
        const MACField force = cfg.transport_only
                                   ? MACField(state.grid())
                                   : korteweg_force(next.mu, next.psi, next.phi, next.rho);
        auto [u_new, p_new] = step_ns(state, params, cfg, force);
        next.u = std::move(u_new);
        next.p = std::move(p_new);
    } else {
        next.u = state.u;
        next.p = state.p;
    }

    if (info) {
        info->clamp_events = clamp_rho + clamp_refresh;
        info->backward_excess = backward_diffusion_excess(next.rho, params);
    }
    return next;
}

double suggest_dt(const SimState& state, const ModelParams& params, const StepConfig& cfg) {
    const Grid2D& g = state.grid();
    const double h = std::min(g.hx(), g.hy());
    const double eps_m = std::numeric_limits<double>::epsilon();
    const double dt_adv = h / (4.0 * state.u.max_abs() + eps_m);

    const double lam_d = 4.0 / (g.hx() * g.hx()) + 4.0 / (g.hy() * g.hy());
    double rho_max = 0.0;
    for (double v : state.rho.data()) rho_max = std::max(rho_max, std::abs(v));
    double gsq_max = 0.0;
    for (double v : grad_sq_cell(state.phi).data()) gsq_max = std::max(gsq_max, v);
    const double coupling = params.theta * rho_max + params.penalty_omega * gsq_max;
    const double dt_coupling = (coupling > 0.0) ? 1.0 / (lam_d * coupling)
                                                : std::numeric_limits<double>::max();

    return std::min(cfg.dt, std::min(dt_adv, dt_coupling));
}

} // namespace nschs

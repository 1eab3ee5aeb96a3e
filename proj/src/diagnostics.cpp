#include "nschs/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "nschs/spectral.hpp"

namespace nschs {

void DiagnosticsTrace::append(const DiagnosticsRecord& rec) {
    if (!records_.empty() && !(rec.t > records_.back().t))
        throw std::invalid_argument("DiagnosticsTrace: timestamps must strictly increase");
    records_.push_back(rec);
}

void refresh_potentials(SimState& state, const ModelParams& params, PotentialMode mode,
                        std::optional<double> singular_clip, long* clamp_events) {
    state.mu = chemical_potential_phi(state.phi, state.rho, params);
    state.psi = chemical_potential_rho(state.phi, state.rho, params, mode, singular_clip,
                                       clamp_events);
}

namespace {

/// Strain components: Dxx, Dyy at cells, Dxy at corners (no-slip ghosts).
struct Strain {
    std::vector<double> dxx, dyy; // nx * ny
    std::vector<double> dxy;      // (nx+1) * (ny+1)
};

Strain strain_of(const MACField& u) {
    const Grid2D& g = u.grid();
    const double ihx = 1.0 / g.hx(), ihy = 1.0 / g.hy();
    Strain s;
    s.dxx.resize(g.size());
    s.dyy.resize(g.size());
    s.dxy.assign(static_cast<std::size_t>(g.nx + 1) * (g.ny + 1), 0.0);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const std::size_t c = static_cast<std::size_t>(j) * g.nx + i;
            s.dxx[c] = (u.ux(i + 1, j) - u.ux(i, j)) * ihx;
            s.dyy[c] = (u.uy(i, j + 1) - u.uy(i, j)) * ihy;
        }
    for (int j = 0; j <= g.ny; ++j)
        for (int i = 0; i <= g.nx; ++i) {
            double duxdy, duydx;
            if (i == 0 || i == g.nx) duxdy = 0.0;
            else if (j == 0) duxdy = 2.0 * u.ux(i, 0) * ihy;
            else if (j == g.ny) duxdy = -2.0 * u.ux(i, g.ny - 1) * ihy;
            else duxdy = (u.ux(i, j) - u.ux(i, j - 1)) * ihy;
            if (j == 0 || j == g.ny) duydx = 0.0;
            else if (i == 0) duydx = 2.0 * u.uy(0, j) * ihx;
            else if (i == g.nx) duydx = -2.0 * u.uy(g.nx - 1, j) * ihx;
            else duydx = (u.uy(i, j) - u.uy(i - 1, j)) * ihx;
            s.dxy[static_cast<std::size_t>(j) * (g.nx + 1) + i] = 0.5 * (duxdy + duydx);
        }
    return s;
}

double corner_average(const ScalarField& f, int i, int j) {
    const Grid2D& g = f.grid();
    double sum = 0.0;
    int n = 0;
    for (int dj = -1; dj <= 0; ++dj)
        for (int di = -1; di <= 0; ++di) {
            const int ci = i + di, cj = j + dj;
            if (ci >= 0 && ci < g.nx && cj >= 0 && cj < g.ny) {
                sum += f(ci, cj);
                ++n;
            }
        }
    return sum / n;
}

/// Interpolate a MAC component to cell centers.
ScalarField to_centers(const MACField& u, int component) {
    const Grid2D& g = u.grid();
    ScalarField out(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            out(i, j) = (component == 0) ? 0.5 * (u.ux(i, j) + u.ux(i + 1, j))
                                         : 0.5 * (u.uy(i, j) + u.uy(i, j + 1));
    return out;
}

double grad_norm_sq(const ScalarField& f) {
    const MACNorms n = mac_norms(gradient(f));
    return n.l2 * n.l2;
}

/// ||grad N (f - mean f)||^2, the squared V_0* norm.
double v0_star_sq(const ScalarField& f) {
    ScalarField mf = f;
    const double m = mean(f);
    for (double& v : mf.data()) v -= m;
    return grad_norm_sq(inv_neumann_laplacian(mf));
}

} // namespace

double viscous_dissipation(const MACField& u, const ScalarField& phi,
                           const ScalarField& rho, const ModelParams& params) {
    const Grid2D& g = u.grid();
    const Strain s = strain_of(u);
    ScalarField nu(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            nu(i, j) = viscosity_eval(params.viscosity, phi(i, j), rho(i, j));
    double acc = 0.0;
    for (std::size_t c = 0; c < g.size(); ++c)
        acc += nu.data()[c] * (s.dxx[c] * s.dxx[c] + s.dyy[c] * s.dyy[c]);
    for (int j = 0; j <= g.ny; ++j)
        for (int i = 0; i <= g.nx; ++i) {
            const double dxy = s.dxy[static_cast<std::size_t>(j) * (g.nx + 1) + i];
            acc += corner_average(nu, i, j) * 2.0 * dxy * dxy;
        }
    return acc * g.cell_area();
}

DiagnosticsRecord sample(const SimState& state, const ModelParams& params, EnergyMode mode,
                         std::optional<double> prev_energy, double dt, long clamp_events) {
    DiagnosticsRecord rec;
    rec.t = state.t;
    rec.mass_phi = mean(state.phi);
    rec.mass_rho = mean(state.rho);
    rec.energy = energy(state, params, mode);
    rec.dissipation = viscous_dissipation(state.u, state.phi, state.rho, params) +
                      grad_norm_sq(state.mu) + grad_norm_sq(state.psi);
    if (prev_energy) {
        rec.energy_residual = rec.energy.total - *prev_energy + dt * rec.dissipation;
        rec.has_residual = true;
    }
    double rmin = std::numeric_limits<double>::max();
    double rmax = -rmin;
    for (double v : state.rho.data()) {
        rmin = std::min(rmin, v);
        rmax = std::max(rmax, v);
    }
    rec.rho_min = rmin;
    rec.rho_max = rmax;
    rec.separation_eta = std::min(rmin, 1.0 - rmax);
    rec.clamp_events = clamp_events;
    rec.max_velocity = state.u.max_abs();
    return rec;
}

StabilityMetrics stability_metrics(const SimState& a, const SimState& b) {
    if (!(a.grid() == b.grid()))
        throw std::invalid_argument("stability_metrics: states live on different grids");
    const Grid2D& g = a.grid();

    MACField du(g);
    for (std::size_t k = 0; k < du.ux_data().size(); ++k)
        du.ux_data()[k] = a.u.ux_data()[k] - b.u.ux_data()[k];
    for (std::size_t k = 0; k < du.uy_data().size(); ++k)
        du.uy_data()[k] = a.u.uy_data()[k] - b.u.uy_data()[k];
    ScalarField dphi(g), drho(g);
    for (std::size_t k = 0; k < dphi.data().size(); ++k) {
        dphi.data()[k] = a.phi.data()[k] - b.phi.data()[k];
        drho.data()[k] = a.rho.data()[k] - b.rho.data()[k];
    }

    StabilityMetrics m;
    // V_sigma* proxy: componentwise inverse Neumann Laplacian at centers.
    m.Y = v0_star_sq(to_centers(du, 0)) + v0_star_sq(to_centers(du, 1));
    const ScalarNorms np = norms(dphi);
    m.Y += np.l2 * np.l2;
    m.Y += v0_star_sq(drho);

    const MACNorms un = mac_norms(du);
    const ScalarField lap_dphi = laplacian(dphi);
    double lap2 = 0.0;
    for (double v : lap_dphi.data()) lap2 += v * v;
    m.Z = un.l2 * un.l2 + lap2 * g.cell_area() + grad_norm_sq(drho);

    // Dissipation bundle with unit metric weights:
    // (1/2)||grad u||^2 + ||grad Lap^2 phi||^2 + ||Lap^2 phi||^2
    // + ||grad Lap rho||^2.
    const double grad_u_sq = un.h1 * un.h1 - un.l2 * un.l2;
    const ScalarField bih = biharmonic(dphi);
    double bih2 = 0.0;
    for (double v : bih.data()) bih2 += v * v;
    m.W = 0.5 * grad_u_sq + grad_norm_sq(bih) + bih2 * g.cell_area() +
          grad_norm_sq(laplacian(drho));
    return m;
}

WeakFormResiduals weak_form_residual(const SimState& prev, const SimState& next,
                                     const ModelParams& params, const StepConfig& cfg,
                                     int n_test) {
    if (n_test < 1) throw std::invalid_argument("weak_form_residual: n_test must be positive");
    const Grid2D& g = prev.grid();
    const double dt = cfg.dt;
    const CellTransform& tr = cell_transform(g);
    const auto& order = tr.eigen_order();
    const int n_modes = std::min<std::size_t>(n_test, order.size());

    // Scheme-level transport terms (divergence-form fluxes, prev velocity).
    auto advected = [&](const ScalarField& f) {
        const Grid2D& gg = f.grid();
        ScalarField out(gg);
        const double ihx = 1.0 / gg.hx(), ihy = 1.0 / gg.hy();
        for (int j = 0; j < gg.ny; ++j)
            for (int i = 0; i < gg.nx; ++i) {
                double fe = 0.0, fw = 0.0, fn = 0.0, fs = 0.0;
                if (i + 1 < gg.nx) fe = prev.u.ux(i + 1, j) * 0.5 * (f(i, j) + f(i + 1, j));
                if (i > 0) fw = prev.u.ux(i, j) * 0.5 * (f(i - 1, j) + f(i, j));
                if (j + 1 < gg.ny) fn = prev.u.uy(i, j + 1) * 0.5 * (f(i, j) + f(i, j + 1));
                if (j > 0) fs = prev.u.uy(i, j) * 0.5 * (f(i, j - 1) + f(i, j));
                out(i, j) = (fe - fw) * ihx + (fn - fs) * ihy;
            }
        return out;
    };

    WeakFormResiduals res;
    const ScalarField adv_phi = advected(prev.phi);
    const ScalarField adv_rho = advected(prev.rho);
    const MACField grad_mu = gradient(next.mu);
    const MACField grad_psi = gradient(next.psi);

    for (int m = 0; m < n_modes; ++m) {
        const auto [kx, ky] = order[m];
        ScalarField v(g);
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                v(i, j) = std::cos(M_PI * kx * (i + 0.5) / g.nx) *
                          std::cos(M_PI * ky * (j + 0.5) / g.ny);
        const MACField grad_v = gradient(v);

        ScalarField dphi(g), drho(g);
        for (std::size_t k = 0; k < dphi.data().size(); ++k) {
            dphi.data()[k] = (next.phi.data()[k] - prev.phi.data()[k]) / dt;
            drho.data()[k] = (next.rho.data()[k] - prev.rho.data()[k]) / dt;
        }
        const double r_phi = inner(dphi, v) + inner(adv_phi, v) + inner(grad_mu, grad_v);
        const double r_rho = inner(drho, v) + inner(adv_rho, v) + inner(grad_psi, grad_v);
        res.res_phi = std::max(res.res_phi, std::abs(r_phi));
        res.res_rho = std::max(res.res_rho, std::abs(r_rho));
    }

    // Velocity: solenoidal test fields from seeded random stream functions
    // vanishing on the boundary nodes; pressure drops out exactly.
    std::mt19937_64 rng(777);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const MACField force = korteweg_force(next.mu, next.psi, next.phi, next.rho);
    const Strain s_next = strain_of(next.u);
    ScalarField nu(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            nu(i, j) = viscosity_eval(params.viscosity, prev.phi(i, j), prev.rho(i, j));

    const int n_u_tests = std::min(n_test, 8);
    for (int t = 0; t < n_u_tests; ++t) {
        std::vector<double> stream(static_cast<std::size_t>(g.nx + 1) * (g.ny + 1), 0.0);
        for (int j = 1; j < g.ny; ++j)
            for (int i = 1; i < g.nx; ++i)
                stream[static_cast<std::size_t>(j) * (g.nx + 1) + i] = gauss(rng);
        MACField v(g);
        const double ihx = 1.0 / g.hx(), ihy = 1.0 / g.hy();
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i <= g.nx; ++i)
                v.ux(i, j) = (stream[static_cast<std::size_t>(j + 1) * (g.nx + 1) + i] -
                              stream[static_cast<std::size_t>(j) * (g.nx + 1) + i]) * ihy;
        for (int j = 0; j <= g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                v.uy(i, j) = -(stream[static_cast<std::size_t>(j) * (g.nx + 1) + i + 1] -
                               stream[static_cast<std::size_t>(j) * (g.nx + 1) + i]) * ihx;
        // Normalize so residuals are comparable across tests.
        const double nv = mac_norms(v).l2;
        if (nv == 0.0) continue;
        for (double& x : v.ux_data()) x /= nv;
        for (double& x : v.uy_data()) x /= nv;

        MACField dudt(g);
        for (std::size_t k = 0; k < dudt.ux_data().size(); ++k)
            dudt.ux_data()[k] = (next.u.ux_data()[k] - prev.u.ux_data()[k]) / dt;
        for (std::size_t k = 0; k < dudt.uy_data().size(); ++k)
            dudt.uy_data()[k] = (next.u.uy_data()[k] - prev.u.uy_data()[k]) / dt;

        double r = inner(dudt, v) - inner(force, v);

        // Advection tested in divergence form: (div(u (x) u), v).
        {
            MACField adv(g);
            const double ihx2 = 1.0 / g.hx(), ihy2 = 1.0 / g.hy();
            std::vector<double> uu(g.size()), vv(g.size());
            for (int j = 0; j < g.ny; ++j)
                for (int i = 0; i < g.nx; ++i) {
                    const double ub = 0.5 * (prev.u.ux(i, j) + prev.u.ux(i + 1, j));
                    const double vb = 0.5 * (prev.u.uy(i, j) + prev.u.uy(i, j + 1));
                    uu[static_cast<std::size_t>(j) * g.nx + i] = ub * ub;
                    vv[static_cast<std::size_t>(j) * g.nx + i] = vb * vb;
                }
            std::vector<double> uv(static_cast<std::size_t>(g.nx + 1) * (g.ny + 1), 0.0);
            for (int j = 1; j < g.ny; ++j)
                for (int i = 1; i < g.nx; ++i) {
                    const double ub = 0.5 * (prev.u.ux(i, j - 1) + prev.u.ux(i, j));
                    const double vb = 0.5 * (prev.u.uy(i - 1, j) + prev.u.uy(i, j));
                    uv[static_cast<std::size_t>(j) * (g.nx + 1) + i] = ub * vb;
                }
            for (int j = 0; j < g.ny; ++j)
                for (int i = 1; i < g.nx; ++i)
                    adv.ux(i, j) = (uu[static_cast<std::size_t>(j) * g.nx + i] -
                                    uu[static_cast<std::size_t>(j) * g.nx + i - 1]) * ihx2 +
                                   (uv[static_cast<std::size_t>(j + 1) * (g.nx + 1) + i] -
                                    uv[static_cast<std::size_t>(j) * (g.nx + 1) + i]) * ihy2;
            for (int j = 1; j < g.ny; ++j)
                for (int i = 0; i < g.nx; ++i)
                    adv.uy(i, j) = (uv[static_cast<std::size_t>(j) * (g.nx + 1) + i + 1] -
                                    uv[static_cast<std::size_t>(j) * (g.nx + 1) + i]) * ihx2 +
                                   (vv[static_cast<std::size_t>(j) * g.nx + i] -
                                    vv[static_cast<std::size_t>(j - 1) * g.nx + i]) * ihy2;
            r += inner(adv, v);
        }

        // Viscous form (nu Du, Dv).
        {
            const Strain sv = strain_of(v);
            double visc = 0.0;
            for (std::size_t c = 0; c < g.size(); ++c)
                visc += nu.data()[c] * (s_next.dxx[c] * sv.dxx[c] + s_next.dyy[c] * sv.dyy[c]);
            for (int j = 0; j <= g.ny; ++j)
                for (int i = 0; i <= g.nx; ++i) {
                    const std::size_t c = static_cast<std::size_t>(j) * (g.nx + 1) + i;
                    visc += corner_average(nu, i, j) * 2.0 * s_next.dxy[c] * sv.dxy[c];
                }
            r += visc * g.cell_area();
        }
        res.res_u = std::max(res.res_u, std::abs(r));
    }
    return res;
}

double adsorption_statistic(const SimState& state) {
    const ScalarField gsq = grad_sq_cell(state.phi);
    const auto& a = state.rho.data();
    const auto& b = gsq.data();
    const double n = static_cast<double>(a.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        ma += a[k];
        mb += b[k];
    }
    ma /= n;
    mb /= n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double da = a[k] - ma, db = b[k] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa <= 0.0 || sbb <= 0.0) return 0.0;
    return sab / std::sqrt(saa * sbb);
}

} // namespace nschs

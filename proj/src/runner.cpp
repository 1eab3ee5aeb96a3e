#include "nschs/runner.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <random>
#include <sstream>

#include "nschs/snapshot.hpp"

namespace fs = std::filesystem;

namespace nschs {

namespace {

std::string fmt(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

ScalarField init_scalar(const Grid2D& g, InitKind kind, double value, double amplitude,
                        const std::string& file, double stripe_width, std::uint64_t seed,
                        bool is_phi) {
    ScalarField f(g);
    switch (kind) {
        case InitKind::constant:
            for (double& v : f.data()) v = value;
            break;
        case InitKind::spinodal: {
            // Band-limited seeded noise: white noise projected onto the
            // lowest sixteenth of the cosine modes, rescaled so the extreme
            // excursion equals the requested amplitude. Keeping the rough
            // tail out of the initial data keeps the early energy balance
            // out of the stiff transient of the sixth-order operator.
            std::mt19937_64 rng(seed);
            std::uniform_real_distribution<double> u(-1.0, 1.0);
            ScalarField noise(g);
            for (double& v : noise.data()) v = u(rng);
            const int keep = std::max(1, static_cast<int>(g.size() / 16));
            noise = galerkin_project(noise, keep);
            double peak = 0.0;
            for (double v : noise.data()) peak = std::max(peak, std::abs(v));
            const double scale = peak > 0.0 ? amplitude / peak : 0.0;
            for (std::size_t k = 0; k < f.data().size(); ++k)
                f.data()[k] = value + scale * noise.data()[k];
            break;
        }
        case InitKind::tanh_stripe:
            // A band of the high phase across the middle half of the domain.
            for (int j = 0; j < g.ny; ++j) {
                const double y = g.y_center(j);
                const double d = 0.25 * g.Ly - std::abs(y - 0.5 * g.Ly);
                const double band = std::tanh(d / stripe_width);
                for (int i = 0; i < g.nx; ++i) f(i, j) = value + amplitude * band;
            }
            break;
        case InitKind::file: {
            const SimState snap = read_snapshot(file);
            if (!(snap.grid() == g))
                throw ConfigError("initial-data file '" + file + "' has a different grid");
            f = is_phi ? snap.phi : snap.rho;
            break;
        }
    }
    return f;
}

MACField init_velocity(const RunConfig& cfg, const Grid2D& g) {
    MACField u(g);
    switch (cfg.u_init) {
        case VelocityInit::none:
            break;
        case VelocityInit::vortex: {
            // Discrete curl of a nodal stream function vanishing on the
            // boundary: exactly divergence-free, no-slip normal faces.
            std::vector<double> stream(static_cast<std::size_t>(g.nx + 1) * (g.ny + 1), 0.0);
            for (int j = 0; j <= g.ny; ++j)
                for (int i = 0; i <= g.nx; ++i) {
                    const double sx = std::sin(M_PI * (i * g.hx()) / g.Lx);
                    const double sy = std::sin(M_PI * (j * g.hy()) / g.Ly);
                    stream[static_cast<std::size_t>(j) * (g.nx + 1) + i] =
                        cfg.u_scale * (g.Ly / M_PI) * sx * sx * sy * sy;
                }
            const double ihx = 1.0 / g.hx(), ihy = 1.0 / g.hy();
            for (int j = 0; j < g.ny; ++j)
                for (int i = 0; i <= g.nx; ++i)
                    u.ux(i, j) = (stream[static_cast<std::size_t>(j + 1) * (g.nx + 1) + i] -
                                  stream[static_cast<std::size_t>(j) * (g.nx + 1) + i]) * ihy;
            for (int j = 0; j <= g.ny; ++j)
                for (int i = 0; i < g.nx; ++i)
                    u.uy(i, j) = -(stream[static_cast<std::size_t>(j) * (g.nx + 1) + i + 1] -
                                   stream[static_cast<std::size_t>(j) * (g.nx + 1) + i]) * ihx;
            u.enforce_no_slip();
            break;
        }
        case VelocityInit::file: {
            const SimState snap = read_snapshot(cfg.u_file);
            if (!(snap.grid() == g))
                throw ConfigError("velocity file '" + cfg.u_file + "' has a different grid");
            u = snap.u;
            break;
        }
    }
    return u;
}

} // namespace

EnergyMode energy_mode_for(const RunConfig& cfg) {
    if (cfg.potential_mode == PotentialMode::regularized) return EnergyMode::approx;
    return EnergyMode::penalized;
}

SimState build_initial_state(const RunConfig& cfg) {
    const Grid2D g = cfg.grid();
    SimState state(g);
    state.phi = init_scalar(g, cfg.phi_init, cfg.phi_value, cfg.phi_amplitude, cfg.phi_file,
                            cfg.stripe_width, cfg.seed, true);
    state.rho = init_scalar(g, cfg.rho_init, cfg.rho_value, cfg.rho_amplitude, cfg.rho_file,
                            cfg.stripe_width, cfg.seed + 1, false);
    state.u = init_velocity(cfg, g);

    const double rho_mean = mean(state.rho);
    if (!(rho_mean > 0.0 && rho_mean < 1.0))
        throw ConfigError("mean of rho0 is " + fmt(rho_mean) +
                          "; the initial surfactant state cannot be a pure state");
    if (cfg.potential_mode == PotentialMode::singular) {
        for (double v : state.rho.data())
            if (!(v > 0.0 && v < 1.0))
                throw ConfigError("singular potential requires rho0 strictly inside (0,1)");
    }

    const ModelParams params = cfg.model_params();
    if (cfg.rho_regularize_k) {
        const RegularizeReport rep =
            regularize_initial_rho(state.rho, *cfg.rho_regularize_k, params);
        state.rho = rep.rho;
    }
    const StepConfig resolved = resolve_stabilization(cfg.step_config(), state, params);
    refresh_potentials(state, params, cfg.potential_mode,
                       cfg.potential_mode == PotentialMode::singular && resolved.rho_clip > 0.0
                           ? std::optional<double>(resolved.rho_clip)
                           : std::nullopt);
    return state;
}

std::string csv_header() {
    return "t,mass_phi,mass_rho,E_total,E_kin,E_coupling,dissipation,energy_residual,"
           "rho_min,rho_max,eta,clamp_events,max_u";
}

std::string csv_row(const DiagnosticsRecord& rec) {
    std::ostringstream os;
    os << fmt(rec.t) << ',' << fmt(rec.mass_phi) << ',' << fmt(rec.mass_rho) << ','
       << fmt(rec.energy.total) << ',' << fmt(rec.energy.kinetic) << ','
       << fmt(rec.energy.coupling) << ',' << fmt(rec.dissipation) << ','
       << fmt(rec.has_residual ? rec.energy_residual : 0.0) << ',' << fmt(rec.rho_min) << ','
       << fmt(rec.rho_max) << ',' << fmt(rec.separation_eta) << ',' << rec.clamp_events << ','
       << fmt(rec.max_velocity);
    return os.str();
}

void write_pgm(const ScalarField& f, const std::string& path) {
    const Grid2D& g = f.grid();
    double lo = f.data()[0], hi = f.data()[0];
    for (double v : f.data()) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double span = (hi > lo) ? hi - lo : 1.0;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << "P5\n" << g.nx << " " << g.ny << "\n255\n";
    for (int j = g.ny - 1; j >= 0; --j)
        for (int i = 0; i < g.nx; ++i) {
            const double s = (f(i, j) - lo) / span;
            out.put(static_cast<char>(std::lround(255.0 * std::clamp(s, 0.0, 1.0))));
        }
}

int thread_cap() {
    const char* env = std::getenv("NSCHS_THREADS");
    if (!env) return 1;
    const int v = std::atoi(env);
    return std::clamp(v, 1, 64);
}

RunOutcome run_simulation(const RunConfig& cfg, bool write_outputs) {
    const ModelParams params = cfg.model_params();
    {
        const ValidationReport report = validate_assumptions(params, 2000);
        if (!report.all_passed()) {
            std::string names;
            for (const auto& c : report.checks)
                if (!c.passed) names += (names.empty() ? "" : ", ") + c.name;
            throw ConfigError("assumption validation failed: " + names);
        }
    }

    SimState state = build_initial_state(cfg);
    const StepConfig step_cfg = resolve_stabilization(cfg.step_config(), state, params);
    const EnergyMode mode = energy_mode_for(cfg);
    const double bound = energy_lower_bound(params, state.grid().area());

    RunOutcome out;
    out.resolved = step_cfg;

    std::ofstream csv;
    fs::path dir(cfg.directory);
    if (write_outputs) {
        fs::create_directories(dir);
        csv.open(dir / "trace.csv", std::ios::trunc);
        csv << csv_header() << "\n";
    }

    const long n_steps = std::lround(cfg.t_end / cfg.dt);
    const double mass0_phi = mean(state.phi);
    const double mass0_rho = mean(state.rho);

    DiagnosticsRecord rec = sample(state, params, mode);
    out.trace.append(rec);
    if (write_outputs) csv << csv_row(rec) << "\n";
    out.min_energy = rec.energy.total;
    out.max_excursion = std::max({0.0, rec.rho_max - 1.0, -rec.rho_min});
    double prev_energy = rec.energy.total;
    double prev_sample_t = state.t;

    auto emit_artifacts = [&](long step_index) {
        if (!write_outputs) return;
        char tag[24];
        std::snprintf(tag, sizeof(tag), "%06ld", step_index);
        if (cfg.snapshot_every > 0 && step_index % cfg.snapshot_every == 0)
            write_snapshot(state, (dir / ("snap_" + std::string(tag) + ".nschs")).string());
        if (cfg.pgm_every > 0 && step_index % cfg.pgm_every == 0) {
            write_pgm(state.phi, (dir / ("phi_" + std::string(tag) + ".pgm")).string());
            write_pgm(state.rho, (dir / ("rho_" + std::string(tag) + ".pgm")).string());
        }
    };
    emit_artifacts(0);

    long clamp_accum = 0;
    for (long n = 1; n <= n_steps; ++n) {
        StepInfo info;
        try {
            state = step(state, params, step_cfg, &info);
        } catch (const std::exception& e) {
            out.exit_code = 2;
            out.violation = std::string("step failure: ") + e.what();
            break;
        }
        clamp_accum += info.clamp_events;
        if (info.backward_excess > 0.0) out.backward_diffusion_warned = true;

        bool finite = true;
        for (double v : state.phi.data())
            if (!std::isfinite(v)) { finite = false; break; }
        if (finite)
            for (double v : state.rho.data())
                if (!std::isfinite(v)) { finite = false; break; }
        if (finite && !std::isfinite(state.u.max_abs())) finite = false;
        if (!finite) {
            out.exit_code = 2;
            out.violation = "non-finite field value";
            break;
        }

        if (n % cfg.trace_every == 0 || n == n_steps) {
            rec = sample(state, params, mode, prev_energy, state.t - prev_sample_t,
                         clamp_accum);
            clamp_accum = 0;
            prev_energy = rec.energy.total;
            prev_sample_t = state.t;
            out.trace.append(rec);
            if (write_outputs) csv << csv_row(rec) << "\n";
            out.min_energy = std::min(out.min_energy, rec.energy.total);
            out.max_excursion =
                std::max({out.max_excursion, rec.rho_max - 1.0, -rec.rho_min});

            if (std::abs(rec.mass_phi - mass0_phi) > 1e-10) {
                out.exit_code = 2;
                out.violation = "mass drift (phi)";
                break;
            }
            if (std::abs(rec.mass_rho - mass0_rho) > 1e-10) {
                out.exit_code = 2;
                out.violation = "mass drift (rho)";
                break;
            }
            if (std::isfinite(rec.energy.total) && rec.energy.total < bound) {
                out.exit_code = 2;
                out.violation = "energy below lower bound";
                break;
            }
        }
        emit_artifacts(n);
    }

    out.final_state = std::move(state);
    return out;
}

namespace {

SweepReport run_sweep(const RunConfig& cfg, const std::vector<double>& values,
                      const std::string& parameter, bool write_outputs) {
    if (values.empty()) throw ConfigError("sweep: empty parameter list");
    for (std::size_t k = 0; k + 1 < values.size(); ++k)
        if (!(values[k] > values[k + 1]))
            throw ConfigError("sweep: list must be strictly decreasing toward 0");
    for (double v : values)
        if (!(v >= 0.0)) throw ConfigError("sweep: values must be nonnegative");

    struct MemberOutcome {
        RunOutcome run;
    };
    std::vector<MemberOutcome> outcomes(values.size());
    const int cap = thread_cap();

    auto member_config = [&](double v) {
        RunConfig c = cfg;
        if (parameter == "eps") {
            c.regularization_eps = v;
            c.potential_mode = PotentialMode::regularized;
        } else {
            c.penalty_omega = v;
        }
        if (write_outputs) c.directory = cfg.directory + "/" + parameter + "_" + fmt(v);
        return c;
    };

    for (std::size_t base = 0; base < values.size(); base += cap) {
        const std::size_t last = std::min(values.size(), base + cap);
        std::vector<std::future<RunOutcome>> futs;
        for (std::size_t k = base; k < last; ++k)
            futs.push_back(std::async(cap > 1 ? std::launch::async : std::launch::deferred,
                                      [&, k] { return run_simulation(member_config(values[k]),
                                                                     write_outputs); }));
        for (std::size_t k = base; k < last; ++k) outcomes[k].run = futs[k - base].get();
    }

    SweepReport rep;
    rep.parameter = parameter;
    for (std::size_t k = 0; k < values.size(); ++k) {
        const RunOutcome& r = outcomes[k].run;
        rep.members.push_back({values[k], r.exit_code, r.max_excursion,
                               r.trace.records().back().energy.total});
    }
    for (std::size_t k = 0; k + 1 < values.size(); ++k) {
        const SimState& a = outcomes[k].run.final_state;
        const SimState& b = outcomes[k + 1].run.final_state;
        ScalarField dphi(a.grid()), drho(a.grid());
        for (std::size_t i = 0; i < dphi.data().size(); ++i) {
            dphi.data()[i] = a.phi.data()[i] - b.phi.data()[i];
            drho.data()[i] = a.rho.data()[i] - b.rho.data()[i];
        }
        rep.phi_distance.push_back(norms(dphi).l2);
        rep.rho_distance.push_back(norms(drho).l2);
    }
    for (std::size_t k = 0; k + 1 < rep.phi_distance.size(); ++k) {
        if (rep.phi_distance[k + 1] > rep.phi_distance[k] ||
            rep.rho_distance[k + 1] > rep.rho_distance[k])
            rep.distances_decreasing = false;
    }
    for (std::size_t k = 0; k + 1 < rep.members.size(); ++k)
        if (rep.members[k + 1].max_excursion > rep.members[k].max_excursion + 1e-15)
            rep.excursions_nonincreasing = false;
    return rep;
}

} // namespace

std::string SweepReport::to_string() const {
    std::ostringstream os;
    os << "sweep over " << parameter << " (" << members.size() << " runs)\n";
    for (const auto& m : members)
        os << "  " << parameter << "=" << fmt(m.value) << "  exit=" << m.exit_code
           << "  max_excursion=" << fmt(m.max_excursion)
           << "  E_end=" << fmt(m.final_energy) << "\n";
    for (std::size_t k = 0; k < phi_distance.size(); ++k)
        os << "  distance[" << k << "] |phi|=" << fmt(phi_distance[k])
           << " |rho|=" << fmt(rho_distance[k]) << "\n";
    os << "  distances_decreasing=" << (distances_decreasing ? "yes" : "no")
       << "  excursions_nonincreasing=" << (excursions_nonincreasing ? "yes" : "no") << "\n";
    return os.str();
}

SweepReport sweep_eps(const RunConfig& cfg, const std::vector<double>& eps_list,
                      bool write_outputs) {
    return run_sweep(cfg, eps_list, "eps", write_outputs);
}

SweepReport sweep_omega(const RunConfig& cfg, const std::vector<double>& omega_list,
                        bool write_outputs) {
    return run_sweep(cfg, omega_list, "omega", write_outputs);
}

namespace {

double order_between(double coarse_err, double fine_err) {
    if (coarse_err <= 1e-14 && fine_err <= 1e-14)
        return std::numeric_limits<double>::infinity();
    if (fine_err <= 0.0) return std::numeric_limits<double>::infinity();
    return std::log2(coarse_err / fine_err);
}

} // namespace

std::string ConvergeReport::to_string() const {
    std::ostringstream os;
    os << "spatial grids:";
    for (int n : spatial_grids) os << " " << n;
    os << "\nspatial order  phi=" << fmt(spatial_order_phi)
       << "  rho=" << fmt(spatial_order_rho) << "  pass=" << (spatial_pass ? "yes" : "no")
       << "\ntemporal order phi=" << fmt(temporal_order_phi)
       << "  rho=" << fmt(temporal_order_rho) << "  pass=" << (temporal_pass ? "yes" : "no")
       << "\n";
    return os.str();
}

ConvergeReport converge(const RunConfig& cfg) {
    if (cfg.phi_init == InitKind::spinodal || cfg.rho_init == InitKind::spinodal)
        throw ConfigError("converge: spatial self-convergence needs smooth presets, "
                          "not spinodal noise");
    if (cfg.nx % 4 != 0 || cfg.ny % 4 != 0 || cfg.nx / 4 < 4 || cfg.ny / 4 < 4)
        throw ConfigError("converge: grid must quarter down to at least 4 cells per axis");

    ConvergeReport rep;
    rep.spatial_grids = {cfg.nx / 4, cfg.nx / 2, cfg.nx};

    // Spatial study: same dt and t_end on three nested grids.
    std::vector<SimState> finals;
    for (int factor : {4, 2, 1}) {
        RunConfig c = cfg;
        c.nx = cfg.nx / factor;
        c.ny = cfg.ny / factor;
        const RunOutcome r = run_simulation(c, false);
        if (r.exit_code != 0)
            throw std::runtime_error("converge: member run tripped '" + r.violation + "'");
        finals.push_back(r.final_state);
    }
    auto restricted_err = [](const ScalarField& fine, const ScalarField& coarse) {
        const ScalarField r = restrict_to(fine, coarse.grid());
        ScalarField d = coarse;
        for (std::size_t k = 0; k < d.data().size(); ++k) d.data()[k] -= r.data()[k];
        return norms(d).l2;
    };
    {
        const double e_coarse_phi = restricted_err(finals[1].phi, finals[0].phi);
        const double e_fine_phi = restricted_err(finals[2].phi, finals[1].phi);
        const double e_coarse_rho = restricted_err(finals[1].rho, finals[0].rho);
        const double e_fine_rho = restricted_err(finals[2].rho, finals[1].rho);
        rep.spatial_order_phi = order_between(e_coarse_phi, e_fine_phi);
        rep.spatial_order_rho = order_between(e_coarse_rho, e_fine_rho);
        rep.spatial_pass = rep.spatial_order_phi >= 1.8 && rep.spatial_order_rho >= 1.8;
    }

    // Temporal study: fixed grid, dt halved twice.
    std::vector<SimState> tfinals;
    for (int factor : {1, 2, 4}) {
        RunConfig c = cfg;
        c.dt = cfg.dt / factor;
        const RunOutcome r = run_simulation(c, false);
        if (r.exit_code != 0)
            throw std::runtime_error("converge: member run tripped '" + r.violation + "'");
        tfinals.push_back(r.final_state);
    }
    auto l2_diff = [](const ScalarField& a, const ScalarField& b) {
        ScalarField d = a;
        for (std::size_t k = 0; k < d.data().size(); ++k) d.data()[k] -= b.data()[k];
        return norms(d).l2;
    };
    {
        const double e1_phi = l2_diff(tfinals[0].phi, tfinals[1].phi);
        const double e2_phi = l2_diff(tfinals[1].phi, tfinals[2].phi);
        const double e1_rho = l2_diff(tfinals[0].rho, tfinals[1].rho);
        const double e2_rho = l2_diff(tfinals[1].rho, tfinals[2].rho);
        rep.temporal_order_phi = order_between(e1_phi, e2_phi);
        rep.temporal_order_rho = order_between(e1_rho, e2_rho);
        rep.temporal_pass = rep.temporal_order_phi >= 0.9 && rep.temporal_order_rho >= 0.9;
    }
    return rep;
}

std::string PerturbReport::to_string() const {
    std::ostringstream os;
    os << "samples=" << t.size();
    if (!Y.empty())
        os << "  Y(0)=" << fmt(Y.front()) << "  Y(end)=" << fmt(Y.back())
           << "  Z(0)=" << fmt(Z.front()) << "  Z(end)=" << fmt(Z.back());
    os << "\namplification Y=" << fmt(amp_Y) << "  Z=" << fmt(amp_Z)
       << "  max Y ratio=" << fmt(max_ratio_Y) << "\n";
    return os.str();
}

PerturbReport perturb(const RunConfig& cfg, double delta, bool write_outputs) {
    if (delta < 0.0) throw ConfigError("perturb: delta must be nonnegative");
    const ModelParams params = cfg.model_params();
    SimState a = build_initial_state(cfg);
    SimState b = a;
    {
        // Unit-norm, mean-free perturbation of phi0, fixed by the run seed.
        std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
        std::normal_distribution<double> gauss(0.0, 1.0);
        ScalarField w(a.grid());
        for (double& v : w.data()) v = gauss(rng);
        const double m = mean(w);
        for (double& v : w.data()) v -= m;
        const double n = norms(w).l2;
        for (double& v : w.data()) v /= (n > 0.0 ? n : 1.0);
        for (std::size_t k = 0; k < b.phi.data().size(); ++k)
            b.phi.data()[k] += delta * w.data()[k];
        refresh_potentials(b, params, cfg.potential_mode);
    }

    const StepConfig step_cfg = resolve_stabilization(cfg.step_config(), a, params);
    const long n_steps = std::lround(cfg.t_end / cfg.dt);

    PerturbReport rep;
    auto record = [&]() {
        const StabilityMetrics m = stability_metrics(a, b);
        rep.t.push_back(a.t);
        rep.Y.push_back(m.Y);
        rep.Z.push_back(m.Z);
    };
    record();
    for (long n = 1; n <= n_steps; ++n) {
        a = step(a, params, step_cfg);
        b = step(b, params, step_cfg);
        if (n % cfg.trace_every == 0 || n == n_steps) record();
    }

    const double y0 = rep.Y.front(), z0 = rep.Z.front();
    rep.amp_Y = (y0 > 0.0) ? rep.Y.back() / y0 : 0.0;
    rep.amp_Z = (z0 > 0.0) ? rep.Z.back() / z0 : 0.0;
    for (double y : rep.Y)
        rep.max_ratio_Y = std::max(rep.max_ratio_Y, (y0 > 0.0) ? y / y0 : 0.0);

    if (write_outputs) {
        fs::create_directories(cfg.directory);
        std::ofstream csv(fs::path(cfg.directory) / "perturb.csv", std::ios::trunc);
        csv << "t,Y,Z\n";
        for (std::size_t k = 0; k < rep.t.size(); ++k)
            csv << fmt(rep.t[k]) << ',' << fmt(rep.Y[k]) << ',' << fmt(rep.Z[k]) << "\n";
    }
    return rep;
}

} // namespace nschs

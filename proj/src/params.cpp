#include "nschs/params.hpp"

#include <cmath>
#include <algorithm>
#include <random>
#include <sstream>
#include <stdexcept>

namespace nschs {

ViscosityLaw ViscosityLaw::constant(double nu) {
    ViscosityLaw law;
    law.kind = ViscosityKind::constant;
    law.nu1 = law.nu2 = law.nu_floor = law.nu_ceil = nu;
    return law;
}

ViscosityLaw ViscosityLaw::smooth_blend(double nu1, double nu2) {
    ViscosityLaw law;
    law.kind = ViscosityKind::smooth_blend;
    law.nu1 = nu1;
    law.nu2 = nu2;
    law.nu_floor = std::min(nu1, nu2);
    law.nu_ceil = std::max(nu1, nu2);
    return law;
}

double viscosity_eval(const ViscosityLaw& law, double phi, double /*rho*/) {
    switch (law.kind) {
        case ViscosityKind::constant: return law.nu1;
        case ViscosityKind::smooth_blend:
            return law.nu2 + (law.nu1 - law.nu2) * 0.5 * (1.0 + std::tanh(phi));
    }
    throw std::logic_error("viscosity_eval: unknown law");
}

void ModelParams::check_structure() const {
    auto require_finite = [](double v, const char* name) {
        if (!std::isfinite(v))
            throw std::invalid_argument(std::string("ModelParams: ") + name + " is not finite");
    };
    require_finite(alpha, "alpha");
    require_finite(beta, "beta");
    require_finite(theta, "theta");
    require_finite(penalty_omega, "penalty_omega");
    require_finite(viscosity.nu1, "nu1");
    require_finite(viscosity.nu2, "nu2");
    require_finite(viscosity.nu_floor, "nu_floor");
    require_finite(viscosity.nu_ceil, "nu_ceil");
    if (alpha <= 0.0 || beta <= 0.0 || theta <= 0.0)
        throw std::invalid_argument("ModelParams: alpha, beta, theta must be positive (H4)");
    if (penalty_omega < 0.0 || penalty_omega > 1.0)
        throw std::invalid_argument("ModelParams: penalty_omega must lie in [0,1]");
    if (viscosity.nu_floor <= 0.0)
        throw std::invalid_argument("ModelParams: H1 violated, nu_floor must be positive");
    if (potentials.flory_huggins.theta1 <= 0.0)
        throw std::invalid_argument("ModelParams: theta1 must be positive");
    const double eps1 = potentials.flory_huggins.eps1;
    if (!(eps1 > 0.0 && eps1 < 0.5))
        throw std::invalid_argument("ModelParams: eps1 must lie in (0, 1/2)");
    if (potentials.regularization_eps) {
        const double eps = *potentials.regularization_eps;
        if (!(eps > 0.0 && eps < eps1))
            throw std::invalid_argument("ModelParams: regularization_eps must lie in (0, eps1)");
    }
}

RegularizedPotential ModelParams::regularized() const {
    if (!potentials.regularization_eps)
        throw std::logic_error("ModelParams: no regularization_eps configured");
    return RegularizedPotential{potentials.flory_huggins, *potentials.regularization_eps};
}

bool ValidationReport::all_passed() const {
    for (const auto& c : checks)
        if (!c.passed) return false;
    return true;
}

std::string ValidationReport::to_string() const {
    std::ostringstream os;
    for (const auto& c : checks) {
        os << (c.passed ? "PASS " : "FAIL ") << c.name
           << "  worst_margin=" << c.worst_margin;
        if (!c.detail.empty()) os << "  (" << c.detail << ")";
        os << "\n";
    }
    return os.str();
}

namespace {

void track(double slack, double& worst, double at, double& worst_at) {
    if (slack < worst) {
        worst = slack;
        worst_at = at;
    }
}

} // namespace

ValidationReport validate_assumptions(const ModelParams& params, int sample_count,
                                      unsigned long long seed) {
    if (sample_count < 100)
        throw std::invalid_argument("validate_assumptions: sample_count must be >= 100");
    params.check_structure();

    ValidationReport report;
    std::mt19937_64 rng(seed);
    const auto& fh = params.potentials.flory_huggins;
    const auto& ac = params.assumptions;

    // H1: viscosity bounds on a grid plus random samples over [-3,3]x[-1,2].
    {
        double worst = std::numeric_limits<double>::max(), at = 0.0;
        const int n_side = std::max(10, static_cast<int>(std::sqrt(double(sample_count))));
        std::uniform_real_distribution<double> up(-3.0, 3.0), ur(-1.0, 2.0);
        auto check_point = [&](double phi, double rho) {
            const double nu = viscosity_eval(params.viscosity, phi, rho);
            track(nu - params.viscosity.nu_floor, worst, phi, at);
            track(params.viscosity.nu_ceil - nu, worst, phi, at);
        };
        for (int i = 0; i < n_side; ++i)
            for (int j = 0; j < n_side; ++j)
                check_point(-3.0 + 6.0 * i / (n_side - 1.0), -1.0 + 3.0 * j / (n_side - 1.0));
        for (int k = 0; k < sample_count; ++k) check_point(up(rng), ur(rng));
        report.checks.push_back({"H1 viscosity bounds", worst >= 0.0, worst,
                                 "nu_floor <= nu(phi,rho) <= nu_ceil"});
    }

    // H2: double-well inequalities on s in [-5,5].
    {
        double w1 = std::numeric_limits<double>::max(), a1 = 0.0;
        double w2 = w1, a2 = 0.0;
        double w3 = w1, a3 = 0.0;
        for (int k = 0; k <= sample_count; ++k) {
            const double s = -5.0 + 10.0 * static_cast<double>(k) / sample_count;
            const double v = eval_s_phi(s, 0);
            const double d1 = eval_s_phi(s, 1);
            const double d2 = eval_s_phi(s, 2);
            track(d2 + ac.c0, w1, s, a1);
            track(d1 * s - (ac.c1 * v - ac.c2), w2, s, a2);
            track(v - (ac.c3 * s * s * s * s - ac.c4), w3, s, a3);
        }
        report.checks.push_back({"H2 curvature lower bound", w1 >= 0.0, w1,
                                 "S_phi'' >= -c0, worst at s=" + std::to_string(a1)});
        report.checks.push_back({"H2 coercivity S'(s)s", w2 >= 0.0, w2,
                                 "S_phi'(s)s >= c1 S_phi - c2, worst at s=" + std::to_string(a2)});
        report.checks.push_back({"H2 quartic growth", w3 >= 0.0, w3,
                                 "S_phi >= c3 s^4 - c4, worst at s=" + std::to_string(a3)});
    }

    // H3: |R''| <= L1 on [-5,5]; singular limits and endpoint monotonicity
    // of S_hat'' checked on shrinking sequences.
    {
        double worst = std::numeric_limits<double>::max(), at = 0.0;
        for (int k = 0; k <= sample_count; ++k) {
            const double s = -5.0 + 10.0 * static_cast<double>(k) / sample_count;
            track(ac.L1 - std::abs(fh.r(s, 2)), worst, s, at);
        }
        bool limits_ok = true;
        // S_hat' -> -inf / +inf and S_hat'' -> +inf toward the endpoints.
        double prev_d1 = fh.s_hat(1e-3, 1);
        double prev_d2 = fh.s_hat(1e-3, 2);
        for (double s = 1e-4; s > 1e-12; s *= 0.1) {
            const double d1 = fh.s_hat(s, 1);
            const double d2 = fh.s_hat(s, 2);
            if (!(d1 < prev_d1) || !(d2 > prev_d2)) limits_ok = false;
            prev_d1 = d1;
            prev_d2 = d2;
        }
        // Monotonicity of S_hat'' on (0, eps1] and [1-eps1, 1).
        double mono = std::numeric_limits<double>::max(), mono_at = 0.0;
        const int n_mono = std::max(100, sample_count / 10);
        for (int k = 0; k + 1 <= n_mono; ++k) {
            const double lo = 1e-8;
            const double s0 = lo + (fh.eps1 - lo) * static_cast<double>(k) / n_mono;
            const double s1 = lo + (fh.eps1 - lo) * static_cast<double>(k + 1) / n_mono;
            track(fh.s_hat(s0, 2) - fh.s_hat(s1, 2), mono, s0, mono_at);
            track(fh.s_hat(1.0 - s0, 2) - fh.s_hat(1.0 - s1, 2), mono, 1.0 - s0, mono_at);
        }
        const bool ok = worst >= 0.0 && limits_ok && mono >= -1e-12;
        report.checks.push_back({"H3 singular split", ok, std::min(worst, mono),
                                 limits_ok ? "|R''| <= L1; endpoint blow-up and monotonicity hold"
                                           : "endpoint limits failed"});
    }

    // H4: positivity (already enforced structurally; reported for completeness).
    {
        const double m = std::min({params.alpha, params.beta, params.theta});
        report.checks.push_back({"H4 positive coefficients", m > 0.0, m, ""});
    }

    // H5: S_hat''(s) <= C exp(C |S_hat'(s)|) on (0,1) minus a 1e-8 margin.
    {
        double worst = std::numeric_limits<double>::max(), at = 0.0;
        const double margin = 1e-8;
        const double C = ac.growth_C;
        for (int k = 0; k <= sample_count; ++k) {
            const double s = margin + (1.0 - 2.0 * margin) * static_cast<double>(k) / sample_count;
            const double lhs = fh.s_hat(s, 2);
            const double rhs = C * std::exp(std::min(700.0, C * std::abs(fh.s_hat(s, 1))));
            // Relative slack keeps the margin meaningful near the endpoints
            // where both sides blow up.
            track((rhs - lhs) / std::max(1.0, std::abs(rhs)), worst, s, at);
        }
        report.checks.push_back({"H5 exponential growth", worst >= 0.0, worst,
                                 "S_hat'' <= C exp(C|S_hat'|), worst at s=" + std::to_string(at)});
    }

    return report;
}

} // namespace nschs

#include "nschs/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace nschs {

ModelParams RunConfig::model_params() const {
    ModelParams p;
    p.alpha = alpha;
    p.beta = beta;
    p.theta = theta;
    p.penalty_omega = penalty_omega;
    p.viscosity = (viscosity == ViscosityKind::constant)
                      ? ViscosityLaw::constant(nu1)
                      : ViscosityLaw::smooth_blend(nu1, nu2);
    p.potentials.flory_huggins = FloryHugginsPotential{theta1, theta2, eps1};
    p.potentials.regularization_eps = regularization_eps;
    p.assumptions = assumptions;
    p.check_structure();
    return p;
}

StepConfig RunConfig::step_config() const {
    StepConfig s;
    s.dt = dt;
    s.stab_s1 = stab_s1.value_or(0.0);
    s.stab_s2 = stab_s2.value_or(0.0);
    // Explicit 0 disables the evaluation clamp (the NaN guard then throws
    // if rho leaves (0,1)); absent/auto defers to resolve_stabilization.
    s.rho_clip = rho_clip.value_or(-1.0);
    s.cfl_limit = cfl_limit;
    s.ns_enabled = ns_enabled;
    s.transport_only = transport_only;
    s.potential_mode = potential_mode;
    return s;
}

namespace {

struct Entry {
    std::string value;
    int line = 0;
    bool used = false;
};

struct ParsedFile {
    std::map<std::string, std::map<std::string, Entry>> sections;
    std::string origin;
};

[[noreturn]] void fail(const ParsedFile& f, int line, const std::string& msg) {
    throw ConfigError(f.origin + ":" + std::to_string(line) + ": " + msg);
}

ParsedFile tokenize(const std::string& text, const std::string& origin) {
    ParsedFile out;
    out.origin = origin;
    std::istringstream is(text);
    std::string line;
    std::string section;
    int lineno = 0;
    auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t\r");
        if (a == std::string::npos) return std::string();
        const auto b = s.find_last_not_of(" \t\r");
        return s.substr(a, b - a + 1);
    };
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                fail(out, lineno, "malformed section header '" + line + "'");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty()) fail(out, lineno, "empty section name");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            fail(out, lineno, "expected key = value, got '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) fail(out, lineno, "empty key");
        if (section.empty()) fail(out, lineno, "key '" + key + "' outside any section");
        auto& sec = out.sections[section];
        if (sec.count(key))
            fail(out, lineno, "duplicate key '" + key + "' in section [" + section + "]");
        sec[key] = Entry{value, lineno, false};
    }
    return out;
}

class Reader {
public:
    Reader(ParsedFile& f) : f_(f) {}

    bool has(const std::string& section, const std::string& key) const {
        auto s = f_.sections.find(section);
        return s != f_.sections.end() && s->second.count(key) > 0;
    }

    Entry& entry(const std::string& section, const std::string& key) {
        auto& e = f_.sections[section][key];
        e.used = true;
        return e;
    }

    double number(const std::string& section, const std::string& key, double fallback) {
        if (!has(section, key)) return fallback;
        Entry& e = entry(section, key);
        return parse_number(e);
    }

    int integer(const std::string& section, const std::string& key, int fallback) {
        if (!has(section, key)) return fallback;
        Entry& e = entry(section, key);
        std::size_t pos = 0;
        long long v = 0;
        try {
            v = std::stoll(e.value, &pos);
        } catch (...) {
            fail(f_, e.line, "expected integer for '" + key + "', got '" + e.value + "'");
        }
        if (pos != e.value.size())
            fail(f_, e.line, "trailing characters after integer for '" + key + "'");
        return static_cast<int>(v);
    }

    std::uint64_t uinteger(const std::string& section, const std::string& key,
                           std::uint64_t fallback) {
        if (!has(section, key)) return fallback;
        Entry& e = entry(section, key);
        try {
            return std::stoull(e.value);
        } catch (...) {
            fail(f_, e.line, "expected unsigned integer for '" + key + "'");
        }
    }

    bool boolean(const std::string& section, const std::string& key, bool fallback) {
        if (!has(section, key)) return fallback;
        Entry& e = entry(section, key);
        if (e.value == "true") return true;
        if (e.value == "false") return false;
        fail(f_, e.line, "expected true/false for '" + key + "', got '" + e.value + "'");
    }

    std::string text(const std::string& section, const std::string& key,
                     const std::string& fallback) {
        if (!has(section, key)) return fallback;
        return entry(section, key).value;
    }

    std::optional<double> optional_number(const std::string& section, const std::string& key,
                                          std::optional<double> fallback,
                                          const char* none_word) {
        if (!has(section, key)) return fallback;
        Entry& e = entry(section, key);
        if (e.value == none_word) return std::nullopt;
        return parse_number(e);
    }

    void check_all_used() {
        for (auto& [sec, entries] : f_.sections)
            for (auto& [key, e] : entries)
                if (!e.used)
                    fail(f_, e.line, "unknown key '" + key + "' in section [" + sec + "]");
    }

    ParsedFile& file() { return f_; }

private:
    double parse_number(Entry& e) {
        char* end = nullptr;
        const double v = std::strtod(e.value.c_str(), &end);
        if (end == e.value.c_str() || *end != '\0')
            fail(f_, e.line, "expected number, got '" + e.value + "'");
        return v;
    }

    ParsedFile& f_;
};

InitKind parse_init_kind(Reader& r, const std::string& section, const std::string& key,
                         InitKind fallback) {
    if (!r.has(section, key)) return fallback;
    Entry& e = r.entry(section, key);
    if (e.value == "constant") return InitKind::constant;
    if (e.value == "spinodal") return InitKind::spinodal;
    if (e.value == "tanh_stripe") return InitKind::tanh_stripe;
    if (e.value == "file") return InitKind::file;
    fail(r.file(), e.line, "unknown initial-condition preset '" + e.value + "'");
}

const char* init_kind_name(InitKind k) {
    switch (k) {
        case InitKind::constant: return "constant";
        case InitKind::spinodal: return "spinodal";
        case InitKind::tanh_stripe: return "tanh_stripe";
        case InitKind::file: return "file";
    }
    return "?";
}

std::string format_number(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

} // namespace

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
    ParsedFile file = tokenize(text, origin);
    Reader r(file);
    RunConfig cfg;

    cfg.nx = r.integer("grid", "nx", cfg.nx);
    cfg.ny = r.integer("grid", "ny", cfg.ny);
    cfg.Lx = r.number("grid", "Lx", cfg.Lx);
    cfg.Ly = r.number("grid", "Ly", cfg.Ly);

    cfg.alpha = r.number("model", "alpha", cfg.alpha);
    cfg.beta = r.number("model", "beta", cfg.beta);
    cfg.theta = r.number("model", "theta", cfg.theta);
    cfg.penalty_omega = r.number("model", "penalty_omega", cfg.penalty_omega);
    cfg.regularization_eps =
        r.optional_number("model", "regularization_eps", cfg.regularization_eps, "none");
    if (r.has("model", "viscosity")) {
        Entry& e = r.entry("model", "viscosity");
        if (e.value == "constant") cfg.viscosity = ViscosityKind::constant;
        else if (e.value == "smooth_blend") cfg.viscosity = ViscosityKind::smooth_blend;
        else fail(file, e.line, "unknown viscosity law '" + e.value + "'");
    }
    cfg.nu1 = r.number("model", "nu1", cfg.nu1);
    cfg.nu2 = r.number("model", "nu2", cfg.nu2);
    cfg.theta1 = r.number("model", "theta1", cfg.theta1);
    cfg.theta2 = r.number("model", "theta2", cfg.theta2);
    cfg.eps1 = r.number("model", "eps1", cfg.eps1);

    cfg.assumptions.c0 = r.number("assumptions", "c0", cfg.assumptions.c0);
    cfg.assumptions.c1 = r.number("assumptions", "c1", cfg.assumptions.c1);
    cfg.assumptions.c2 = r.number("assumptions", "c2", cfg.assumptions.c2);
    cfg.assumptions.c3 = r.number("assumptions", "c3", cfg.assumptions.c3);
    cfg.assumptions.c4 = r.number("assumptions", "c4", cfg.assumptions.c4);
    cfg.assumptions.L1 = r.number("assumptions", "L1", cfg.assumptions.L1);
    cfg.assumptions.growth_C = r.number("assumptions", "growth_C", cfg.assumptions.growth_C);

    cfg.dt = r.number("stepping", "dt", cfg.dt);
    cfg.t_end = r.number("stepping", "t_end", cfg.t_end);
    cfg.stab_s1 = r.optional_number("stepping", "stab_s1", cfg.stab_s1, "auto");
    cfg.stab_s2 = r.optional_number("stepping", "stab_s2", cfg.stab_s2, "auto");
    cfg.rho_clip = r.optional_number("stepping", "rho_clip", cfg.rho_clip, "auto");
    cfg.cfl_limit = r.number("stepping", "cfl_limit", cfg.cfl_limit);
    cfg.ns_enabled = r.boolean("stepping", "ns_enabled", cfg.ns_enabled);
    cfg.transport_only = r.boolean("stepping", "transport_only", cfg.transport_only);
    if (r.has("stepping", "potential_mode")) {
        Entry& e = r.entry("stepping", "potential_mode");
        if (e.value == "regularized") cfg.potential_mode = PotentialMode::regularized;
        else if (e.value == "singular") cfg.potential_mode = PotentialMode::singular;
        else fail(file, e.line, "unknown potential_mode '" + e.value + "'");
    }

    cfg.phi_init = parse_init_kind(r, "initial", "phi", cfg.phi_init);
    cfg.phi_value = r.number("initial", "phi_value", cfg.phi_value);
    cfg.phi_amplitude = r.number("initial", "phi_amplitude", cfg.phi_amplitude);
    cfg.phi_file = r.text("initial", "phi_file", cfg.phi_file);
    cfg.rho_init = parse_init_kind(r, "initial", "rho", cfg.rho_init);
    cfg.rho_value = r.number("initial", "rho_value", cfg.rho_value);
    cfg.rho_amplitude = r.number("initial", "rho_amplitude", cfg.rho_amplitude);
    cfg.rho_file = r.text("initial", "rho_file", cfg.rho_file);
    cfg.stripe_width = r.number("initial", "stripe_width", cfg.stripe_width);
    if (r.has("initial", "u")) {
        Entry& e = r.entry("initial", "u");
        if (e.value == "none") cfg.u_init = VelocityInit::none;
        else if (e.value == "vortex") cfg.u_init = VelocityInit::vortex;
        else if (e.value == "file") cfg.u_init = VelocityInit::file;
        else fail(file, e.line, "unknown velocity preset '" + e.value + "'");
    }
    cfg.u_scale = r.number("initial", "u_scale", cfg.u_scale);
    cfg.u_file = r.text("initial", "u_file", cfg.u_file);
    cfg.seed = r.uinteger("initial", "seed", cfg.seed);
    cfg.rho_regularize_k =
        r.optional_number("initial", "rho_regularize_k", cfg.rho_regularize_k, "none");

    cfg.directory = r.text("output", "directory", cfg.directory);
    cfg.trace_every = r.integer("output", "trace_every", cfg.trace_every);
    cfg.snapshot_every = r.integer("output", "snapshot_every", cfg.snapshot_every);
    cfg.pgm_every = r.integer("output", "pgm_every", cfg.pgm_every);

    r.check_all_used();

    // Structural validation (names the violated assumption where it can).
    (void)cfg.grid();
    (void)cfg.model_params();
    if (cfg.dt <= 0.0) throw ConfigError(origin + ": dt must be positive");
    if (cfg.t_end < 0.0) throw ConfigError(origin + ": t_end must be nonnegative");
    if (cfg.trace_every < 1) throw ConfigError(origin + ": trace_every must be >= 1");
    if (cfg.snapshot_every < 0 || cfg.pgm_every < 0)
        throw ConfigError(origin + ": output cadences must be nonnegative");
    if (cfg.rho_init == InitKind::constant || cfg.rho_init == InitKind::spinodal) {
        // mean(rho0) equals rho_value for these presets; the surfactant
        // cannot start from a pure state.
        if (!(cfg.rho_value > 0.0 && cfg.rho_value < 1.0))
            throw ConfigError(origin +
                              ": mean of rho0 must lie in (0,1); the initial surfactant "
                              "state cannot be a pure state");
    }
    for (const auto& [kind, path] :
         {std::pair<InitKind, std::string>{cfg.phi_init, cfg.phi_file},
          std::pair<InitKind, std::string>{cfg.rho_init, cfg.rho_file}}) {
        if (kind == InitKind::file) {
            if (path.empty())
                throw ConfigError(origin + ": file preset requires a file path");
            std::ifstream probe(path, std::ios::binary);
            if (!probe) throw ConfigError(origin + ": referenced file '" + path + "' not found");
        }
    }
    if (cfg.u_init == VelocityInit::file) {
        if (cfg.u_file.empty()) throw ConfigError(origin + ": u = file requires u_file");
        std::ifstream probe(cfg.u_file, std::ios::binary);
        if (!probe)
            throw ConfigError(origin + ": referenced file '" + cfg.u_file + "' not found");
    }
    return cfg;
}

RunConfig parse_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), path);
}

std::string serialize_config(const RunConfig& cfg) {
    std::ostringstream os;
    auto num = [](double v) { return format_number(v); };
    auto opt = [&](const std::optional<double>& v, const char* none_word) {
        return v ? num(*v) : std::string(none_word);
    };
    os << "[grid]\n"
       << "nx = " << cfg.nx << "\n"
       << "ny = " << cfg.ny << "\n"
       << "Lx = " << num(cfg.Lx) << "\n"
       << "Ly = " << num(cfg.Ly) << "\n\n";
    os << "[model]\n"
       << "alpha = " << num(cfg.alpha) << "\n"
       << "beta = " << num(cfg.beta) << "\n"
       << "theta = " << num(cfg.theta) << "\n"
       << "penalty_omega = " << num(cfg.penalty_omega) << "\n"
       << "regularization_eps = " << opt(cfg.regularization_eps, "none") << "\n"
       << "viscosity = "
       << (cfg.viscosity == ViscosityKind::constant ? "constant" : "smooth_blend") << "\n"
       << "nu1 = " << num(cfg.nu1) << "\n"
       << "nu2 = " << num(cfg.nu2) << "\n"
       << "theta1 = " << num(cfg.theta1) << "\n"
       << "theta2 = " << num(cfg.theta2) << "\n"
       << "eps1 = " << num(cfg.eps1) << "\n\n";
    os << "[assumptions]\n"
       << "c0 = " << num(cfg.assumptions.c0) << "\n"
       << "c1 = " << num(cfg.assumptions.c1) << "\n"
       << "c2 = " << num(cfg.assumptions.c2) << "\n"
       << "c3 = " << num(cfg.assumptions.c3) << "\n"
       << "c4 = " << num(cfg.assumptions.c4) << "\n"
       << "L1 = " << num(cfg.assumptions.L1) << "\n"
       << "growth_C = " << num(cfg.assumptions.growth_C) << "\n\n";
    os << "[stepping]\n"
       << "dt = " << num(cfg.dt) << "\n"
       << "t_end = " << num(cfg.t_end) << "\n"
       << "stab_s1 = " << opt(cfg.stab_s1, "auto") << "\n"
       << "stab_s2 = " << opt(cfg.stab_s2, "auto") << "\n"
       << "rho_clip = " << opt(cfg.rho_clip, "auto") << "\n"
       << "cfl_limit = " << num(cfg.cfl_limit) << "\n"
       << "ns_enabled = " << (cfg.ns_enabled ? "true" : "false") << "\n"
       << "transport_only = " << (cfg.transport_only ? "true" : "false") << "\n"
       << "potential_mode = "
       << (cfg.potential_mode == PotentialMode::regularized ? "regularized" : "singular")
       << "\n\n";
    os << "[initial]\n"
       << "phi = " << init_kind_name(cfg.phi_init) << "\n"
       << "phi_value = " << num(cfg.phi_value) << "\n"
       << "phi_amplitude = " << num(cfg.phi_amplitude) << "\n";
    if (!cfg.phi_file.empty()) os << "phi_file = " << cfg.phi_file << "\n";
    os << "rho = " << init_kind_name(cfg.rho_init) << "\n"
       << "rho_value = " << num(cfg.rho_value) << "\n"
       << "rho_amplitude = " << num(cfg.rho_amplitude) << "\n";
    if (!cfg.rho_file.empty()) os << "rho_file = " << cfg.rho_file << "\n";
    os << "stripe_width = " << num(cfg.stripe_width) << "\n"
       << "u = "
       << (cfg.u_init == VelocityInit::none
               ? "none"
               : (cfg.u_init == VelocityInit::vortex ? "vortex" : "file"))
       << "\n"
       << "u_scale = " << num(cfg.u_scale) << "\n";
    if (!cfg.u_file.empty()) os << "u_file = " << cfg.u_file << "\n";
    os << "seed = " << cfg.seed << "\n"
       << "rho_regularize_k = " << opt(cfg.rho_regularize_k, "none") << "\n\n";
    os << "[output]\n"
       << "directory = " << cfg.directory << "\n"
       << "trace_every = " << cfg.trace_every << "\n"
       << "snapshot_every = " << cfg.snapshot_every << "\n"
       << "pgm_every = " << cfg.pgm_every << "\n";
    return os.str();
}

} // namespace nschs

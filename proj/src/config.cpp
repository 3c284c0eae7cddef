#include "mixsim/config.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace mixsim {

namespace {

struct Entry {
    std::string value;
    int line;
    bool used = false;
};

using Section = std::map<std::string, Entry>;
using Tree = std::map<std::string, Section>;

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

Tree tokenize(const std::string& text) {
    static const char* known_sections[] = {"grid", "approx", "physics",
                                           "chemistry", "initial", "output"};
    Tree tree;
    std::istringstream in(text);
    std::string raw;
    std::string section;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = raw;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(lineno, "unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            bool ok = false;
            for (const char* s : known_sections) ok = ok || section == s;
            if (!ok) throw ConfigError(lineno, "unknown section [" + section + "]");
            tree.emplace(section, Section{});
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(lineno, "expected `key = value`");
        if (section.empty()) throw ConfigError(lineno, "key outside any section");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError(lineno, "empty key");
        auto& sec = tree[section];
        if (sec.count(key)) throw ConfigError(lineno, "duplicate key `" + key + "`");
        sec[key] = Entry{value, lineno, false};
    }
    return tree;
}

class Reader {
public:
    explicit Reader(Tree tree) : tree_(std::move(tree)) {}

    bool has(const std::string& sec, const std::string& key) {
        auto s = tree_.find(sec);
        return s != tree_.end() && s->second.count(key) > 0;
    }

    Entry& entry(const std::string& sec, const std::string& key) {
        auto& e = tree_[sec][key];
        e.used = true;
        return e;
    }

    double number(const std::string& sec, const std::string& key, double dflt) {
        if (!has(sec, key)) return dflt;
        Entry& e = entry(sec, key);
        try {
            std::size_t pos = 0;
            const double v = std::stod(e.value, &pos);
            if (pos != e.value.size()) throw std::invalid_argument("");
            return v;
        } catch (...) {
            throw ConfigError(e.line, "`" + key + "` is not a number: " + e.value);
        }
    }

    int integer(const std::string& sec, const std::string& key, int dflt) {
        const double v = number(sec, key, static_cast<double>(dflt));
        if (v != std::floor(v))
            throw ConfigError(entry(sec, key).line, "`" + key + "` must be an integer");
        return static_cast<int>(v);
    }

    std::string str(const std::string& sec, const std::string& key, const std::string& dflt) {
        if (!has(sec, key)) return dflt;
        return entry(sec, key).value;
    }

    std::vector<double> number_list(const std::string& sec, const std::string& key) {
        Entry& e = entry(sec, key);
        std::vector<double> out;
        std::istringstream in(e.value);
        std::string tok;
        while (std::getline(in, tok, ',')) {
            tok = trim(tok);
            if (tok.empty()) continue;
            try {
                out.push_back(std::stod(tok));
            } catch (...) {
                throw ConfigError(e.line, "`" + key + "` has a non-numeric item: " + tok);
            }
        }
        if (out.empty()) throw ConfigError(e.line, "`" + key + "` list is empty");
        return out;
    }

    // items `k:amp` or `k:amp:phase`, comma separated
    std::vector<TrigCoeff> coeff_list(const std::string& sec, const std::string& key) {
        Entry& e = entry(sec, key);
        std::vector<TrigCoeff> out;
        std::istringstream in(e.value);
        std::string tok;
        while (std::getline(in, tok, ',')) {
            tok = trim(tok);
            if (tok.empty()) continue;
            TrigCoeff c;
            std::istringstream item(tok);
            std::string part;
            int field = 0;
            while (std::getline(item, part, ':')) {
                try {
                    if (field == 0) c.k = std::stoi(part);
                    else if (field == 1) c.amp = std::stod(part);
                    else if (field == 2) c.phase = std::stod(part);
                    else throw std::invalid_argument("");
                } catch (...) {
                    throw ConfigError(e.line, "`" + key + "` item malformed: " + tok);
                }
                ++field;
            }
            if (field < 2) throw ConfigError(e.line, "`" + key + "` item needs k:amp");
            if (c.k < 1) throw ConfigError(e.line, "`" + key + "` wavenumber must be >= 1");
            out.push_back(c);
        }
        return out;
    }

    void reject_unused() const {
        for (const auto& [sec, entries] : tree_)
            for (const auto& [key, e] : entries)
                if (!e.used) throw ConfigError(e.line, "unknown key `" + key + "` in [" + sec + "]");
    }

private:
    Tree tree_;
};

int line_of(Reader& r, const std::string& sec, const std::string& key) {
    return r.has(sec, key) ? r.entry(sec, key).line : 0;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
    Reader r(tokenize(text));
    RunConfig cfg;

    cfg.dim = r.integer("grid", "dim", 1);
    cfg.M = r.integer("grid", "M", 64);
    if (cfg.dim < 1 || cfg.dim > 3)
        throw ConfigError(line_of(r, "grid", "dim"), "dim must be 1, 2 or 3");
    if (cfg.M < 4 || cfg.M % 2 != 0)
        throw ConfigError(line_of(r, "grid", "M"), "M must be even and >= 4");

    ApproxParams& ap = cfg.approx;
    ap.epsilon = r.number("approx", "epsilon", ap.epsilon);
    ap.delta = r.number("approx", "delta", ap.delta);
    ap.lambda = r.number("approx", "lambda", ap.lambda);
    ap.s = r.integer("approx", "s", ap.s);
    ap.N = r.integer("approx", "N", ap.N);
    ap.dt = r.number("approx", "dt", ap.dt);
    ap.t_end = r.number("approx", "t_end", ap.t_end);
    ap.picard_tol = r.number("approx", "picard_tol", ap.picard_tol);
    ap.picard_max = r.integer("approx", "picard_max", ap.picard_max);
    ap.r_min = r.number("approx", "r_min", ap.r_min);
    ap.retry_budget = r.integer("approx", "retry_budget", ap.retry_budget);

    ConstitutiveParams& cp = cfg.physics;
    cp.n_species = static_cast<std::size_t>(r.integer("physics", "n_species", 1));
    if (r.has("physics", "m")) cp.m = r.number_list("physics", "m");
    else cp.m.assign(cp.n_species, 1.0);
    cp.gamma_minus = r.number("physics", "gamma_minus", cp.gamma_minus);
    cp.gamma_plus = r.number("physics", "gamma_plus", cp.gamma_plus);
    cp.c_cold = r.number("physics", "c_cold", cp.c_cold);
    cp.beta = r.number("physics", "beta", cp.beta);
    cp.B = r.number("physics", "B", cp.B);
    cp.kappa0 = r.number("physics", "kappa0", cp.kappa0);
    cp.C0_bar = r.number("physics", "C0_bar", cp.C0_bar);

    ReactionModel& chem = cfg.chemistry;
    const std::string model = r.str("chemistry", "model", "inert");
    if (model == "inert") chem.kind = ReactionKind::Inert;
    else if (model == "reversible_pair") chem.kind = ReactionKind::ReversiblePair;
    else throw ConfigError(line_of(r, "chemistry", "model"),
                           "model must be `inert` or `reversible_pair`");
    if (r.has("chemistry", "pair")) {
        const auto pair = r.number_list("chemistry", "pair");
        if (pair.size() != 2)
            throw ConfigError(line_of(r, "chemistry", "pair"), "pair needs two 1-based indices");
        chem.pair_a = static_cast<std::size_t>(pair[0]) - 1;
        chem.pair_b = static_cast<std::size_t>(pair[1]) - 1;
    }
    chem.kappa_r = r.number("chemistry", "kappa_r", chem.kappa_r);
    chem.omega_bar = r.number("chemistry", "omega_bar", chem.omega_bar);
    cp.kappa_r = chem.kappa_r;
    cp.omega_bar = chem.omega_bar;

    InitialSpec& ic = cfg.initial;
    const std::string preset = r.str("initial", "preset", "uniform");
    if (preset == "uniform") ic.preset = InitialPreset::Uniform;
    else if (preset == "perturbed") ic.preset = InitialPreset::Perturbed;
    else if (preset == "two_blob") ic.preset = InitialPreset::TwoBlob;
    else throw ConfigError(line_of(r, "initial", "preset"),
                           "preset must be uniform, perturbed or two_blob");
    ic.rho0 = r.number("initial", "rho0", 1.0);
    ic.theta0 = r.number("initial", "theta0", 1.0);
    ic.u0 = r.number("initial", "u0", 0.0);
    if (r.has("initial", "Y0")) ic.Y0 = r.number_list("initial", "Y0");
    else ic.Y0.assign(cp.n_species, 1.0 / static_cast<double>(cp.n_species));
    // preset-dependent default amplitudes, overridable per key
    const bool perturb = ic.preset != InitialPreset::Uniform;
    ic.amp_rho = r.number("initial", "amp_rho", perturb ? 0.1 : 0.0);
    ic.amp_theta = r.number("initial", "amp_theta", perturb ? 0.05 : 0.0);
    ic.amp_u = r.number("initial", "amp_u", perturb ? 0.05 : 0.0);
    ic.amp_Y = r.number("initial", "amp_Y", ic.preset == InitialPreset::TwoBlob ? 0.2 : 0.0);
    if (r.has("initial", "rho_coeffs")) ic.rho_coeffs = r.coeff_list("initial", "rho_coeffs");
    if (r.has("initial", "theta_coeffs")) ic.theta_coeffs = r.coeff_list("initial", "theta_coeffs");
    if (r.has("initial", "u_coeffs")) ic.u_coeffs = r.coeff_list("initial", "u_coeffs");

    OutputOptions& out = cfg.output;
    out.out_dir = r.str("output", "out_dir", out.out_dir);
    out.diag_every = r.integer("output", "diag_every", out.diag_every);
    out.snapshot_every = r.integer("output", "snapshot_every", out.snapshot_every);
    out.bd_r = r.number("output", "bd_r", out.bd_r);
    out.consistency_band = r.number("output", "consistency_band", out.consistency_band);

    r.reject_unused();

    // cross-field validation with config-level messages
    if (!(cp.gamma_minus > 5.0))
        throw ConfigError(line_of(r, "physics", "gamma_minus"), "gamma_minus > 5 required");
    if (!(cp.gamma_plus > 3.0))
        throw ConfigError(line_of(r, "physics", "gamma_plus"), "gamma_plus > 3 required");
    if (!(cp.gamma_minus > (5.0 * cp.gamma_plus - 3.0) / (cp.gamma_plus - 3.0)))
        throw ConfigError(line_of(r, "physics", "gamma_minus"),
                          "gamma_minus > (5*gamma_plus - 3)/(gamma_plus - 3) required");
    if (!(cp.B >= 8.0)) throw ConfigError(line_of(r, "physics", "B"), "B >= 8 required");
    try {
        cp.validate();
    } catch (const std::exception& e) {
        throw ConfigError(0, e.what());
    }
    try {
        chem.validate(cp);
    } catch (const std::exception& e) {
        throw ConfigError(0, e.what());
    }
    if (ic.Y0.size() != cp.n_species)
        throw ConfigError(line_of(r, "initial", "Y0"), "Y0 length must equal n_species");
    double ysum = 0.0;
    for (double y : ic.Y0) {
        if (!(y >= 0.0 && y <= 1.0))
            throw ConfigError(line_of(r, "initial", "Y0"), "Y0 entries must lie in [0,1]");
        ysum += y;
    }
    if (std::abs(ysum - 1.0) > 1e-12)
        throw ConfigError(line_of(r, "initial", "Y0"), "Y0 must sum to 1");
    if (ic.preset == InitialPreset::TwoBlob && cp.n_species < 2)
        throw ConfigError(line_of(r, "initial", "preset"), "two_blob needs at least 2 species");
    if (!(ic.rho0 > 0.0)) throw ConfigError(line_of(r, "initial", "rho0"), "rho0 must be positive");
    if (!(ic.theta0 > 0.0))
        throw ConfigError(line_of(r, "initial", "theta0"), "theta0 must be positive");
    if (!(out.bd_r > 1.0)) throw ConfigError(line_of(r, "output", "bd_r"), "bd_r > 1 required");
    if (out.diag_every < 1)
        throw ConfigError(line_of(r, "output", "diag_every"), "diag_every must be >= 1");
    if (out.snapshot_every < 0)
        throw ConfigError(line_of(r, "output", "snapshot_every"), "snapshot_every must be >= 0");
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(0, "cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

namespace {

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string coeffs(const std::vector<TrigCoeff>& cs) {
    std::string out;
    for (const auto& c : cs) {
        if (!out.empty()) out += ",";
        out += std::to_string(c.k) + ":" + num(c.amp) + ":" + num(c.phase);
    }
    return out;
}

}  // namespace

std::string serialize_config(const RunConfig& cfg) {
    std::ostringstream out;
    out << "[grid]\n"
        << "dim = " << cfg.dim << "\n"
        << "M = " << cfg.M << "\n\n";

    const ApproxParams& ap = cfg.approx;
    out << "[approx]\n"
        << "epsilon = " << num(ap.epsilon) << "\n"
        << "delta = " << num(ap.delta) << "\n"
        << "lambda = " << num(ap.lambda) << "\n"
        << "s = " << ap.s << "\n"
        << "N = " << ap.N << "\n"
        << "dt = " << num(ap.dt) << "\n"
        << "t_end = " << num(ap.t_end) << "\n"
        << "picard_tol = " << num(ap.picard_tol) << "\n"
        << "picard_max = " << ap.picard_max << "\n"
        << "r_min = " << num(ap.r_min) << "\n"
        << "retry_budget = " << ap.retry_budget << "\n\n";

    const ConstitutiveParams& cp = cfg.physics;
    out << "[physics]\n"
        << "n_species = " << cp.n_species << "\n"
        << "m = ";
    for (std::size_t k = 0; k < cp.m.size(); ++k) out << (k ? "," : "") << num(cp.m[k]);
    out << "\n"
        << "gamma_minus = " << num(cp.gamma_minus) << "\n"
        << "gamma_plus = " << num(cp.gamma_plus) << "\n"
        << "c_cold = " << num(cp.c_cold) << "\n"
        << "beta = " << num(cp.beta) << "\n"
        << "B = " << num(cp.B) << "\n"
        << "kappa0 = " << num(cp.kappa0) << "\n"
        << "C0_bar = " << num(cp.C0_bar) << "\n\n";

    const ReactionModel& chem = cfg.chemistry;
    out << "[chemistry]\n"
        << "model = " << (chem.kind == ReactionKind::Inert ? "inert" : "reversible_pair") << "\n"
        << "pair = " << (chem.pair_a + 1) << "," << (chem.pair_b + 1) << "\n"
        << "kappa_r = " << num(chem.kappa_r) << "\n"
        << "omega_bar = " << num(chem.omega_bar) << "\n\n";

    const InitialSpec& ic = cfg.initial;
    const char* preset = ic.preset == InitialPreset::Uniform     ? "uniform"
                         : ic.preset == InitialPreset::Perturbed ? "perturbed"
                                                                 : "two_blob";
    out << "[initial]\n"
        << "preset = " << preset << "\n"
        << "rho0 = " << num(ic.rho0) << "\n"
        << "theta0 = " << num(ic.theta0) << "\n"
        << "u0 = " << num(ic.u0) << "\n"
        << "Y0 = ";
    for (std::size_t k = 0; k < ic.Y0.size(); ++k) out << (k ? "," : "") << num(ic.Y0[k]);
    out << "\n"
        << "amp_rho = " << num(ic.amp_rho) << "\n"
        << "amp_theta = " << num(ic.amp_theta) << "\n"
        << "amp_u = " << num(ic.amp_u) << "\n"
        << "amp_Y = " << num(ic.amp_Y) << "\n";
    if (!ic.rho_coeffs.empty()) out << "rho_coeffs = " << coeffs(ic.rho_coeffs) << "\n";
    if (!ic.theta_coeffs.empty()) out << "theta_coeffs = " << coeffs(ic.theta_coeffs) << "\n";
    if (!ic.u_coeffs.empty()) out << "u_coeffs = " << coeffs(ic.u_coeffs) << "\n";
    out << "\n";

    const OutputOptions& oo = cfg.output;
    out << "[output]\n"
        << "out_dir = " << oo.out_dir << "\n"
        << "diag_every = " << oo.diag_every << "\n"
        << "snapshot_every = " << oo.snapshot_every << "\n"
        << "bd_r = " << num(oo.bd_r) << "\n"
        << "consistency_band = " << num(oo.consistency_band) << "\n";
    return out.str();
}

InitialData build_initial_data(const RunConfig& cfg, const GridPtr& grid) {
    const std::size_t npts = grid->size();
    const std::size_t n = cfg.physics.n_species;
    const InitialSpec& ic = cfg.initial;

    auto profile = [&](double base, double cos_amp, const std::vector<TrigCoeff>& coeffs,
                       bool relative) {
        ScalarField f(grid);
        auto& v = f.values();
        for (std::size_t i = 0; i < npts; ++i) {
            const double x = grid->coord(0, i);
            double pert = cos_amp * std::cos(x);
            for (const auto& c : coeffs) pert += c.amp * std::cos(c.k * x + c.phase);
            v[i] = relative ? base * (1.0 + pert) : base + pert;
        }
        return f;
    };

    InitialData init;
    init.rho0 = profile(ic.rho0, ic.amp_rho, ic.rho_coeffs, true);
    dealias_inplace(init.rho0);
    init.rho0.to_grid();
    init.theta0 = profile(ic.theta0, ic.amp_theta, ic.theta_coeffs, true);
    dealias_inplace(init.theta0);
    init.theta0.to_grid();

    // velocity: mean + sin(x1) bump + coefficient list on the first component
    VectorField u(grid);
    {
        auto& v = u[0].values();
        for (std::size_t i = 0; i < npts; ++i) {
            const double x = grid->coord(0, i);
            double val = ic.u0 + ic.amp_u * std::sin(x);
            for (const auto& c : ic.u_coeffs) val += c.amp * std::cos(c.k * x + c.phase);
            v[i] = val;
        }
        dealias_inplace(u[0]);
        u[0].to_grid();
    }
    init.m0 = VectorField(grid);
    for (int d = 0; d < grid->dim(); ++d) {
        auto& mv = init.m0[d].values();
        const auto& rv = init.rho0.values();
        const auto& uv = u[d].values();
        for (std::size_t i = 0; i < npts; ++i) mv[i] = rv[i] * uv[i];
    }

    // species fractions: pointwise pattern summing to 1, applied to the
    // dealiased density so the species ledger starts exactly on the total
    std::vector<ScalarField> Y(n, ScalarField(grid));
    for (std::size_t i = 0; i < npts; ++i) {
        const double x = grid->coord(0, i);
        double blob = (ic.preset == InitialPreset::TwoBlob) ? ic.amp_Y * std::cos(x) : 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            double y = ic.Y0[k];
            if (k == 0) y += blob;
            else if (k == 1) y -= blob;
            Y[k].values()[i] = y;
        }
    }
    for (std::size_t k = 0; k < n; ++k) {
        const auto& yv = Y[k].values();
        for (std::size_t i = 0; i < npts; ++i)
            if (!(yv[i] >= 0.0 && yv[i] <= 1.0))
                throw ConfigError(0, "initial mass fractions leave [0,1]; reduce amp_Y");
    }
    for (std::size_t k = 0; k < n; ++k) {
        ScalarField dens(grid);
        auto& dv = dens.values();
        const auto& rv = init.rho0.values();
        const auto& yv = Y[k].values();
        for (std::size_t i = 0; i < npts; ++i) dv[i] = yv[i] * rv[i];
        init.rho_k0.push_back(std::move(dens));
    }
    return init;
}

}  // namespace mixsim

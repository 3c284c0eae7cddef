#include "mixsim/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mixsim {

EnergyBreakdown total_energy(const MixtureState& state, const ApproxParams& ap,
                             const ConstitutiveParams& cp) {
    const auto grid = state.rho.grid_ptr();
    const std::size_t npts = grid->size();

    ScalarField rho = state.rho;   rho.to_grid();
    ScalarField th = state.theta;  th.to_grid();

    EnergyBreakdown e{0.0, 0.0, 0.0, 0.0, 0.0};
    std::vector<const std::vector<double>*> uv;
    std::vector<ScalarField> ug(state.u.comp.size());
    for (std::size_t d = 0; d < ug.size(); ++d) {
        ug[d] = state.u.comp[d];
        ug[d].to_grid();
        uv.push_back(&ug[d].values());
    }
    const auto& rv = rho.values();
    const auto& tv = th.values();
    for (std::size_t i = 0; i < npts; ++i) {
        double usq = 0.0;
        for (const auto* c : uv) usq += (*c)[i] * (*c)[i];
        e.kinetic += 0.5 * rv[i] * usq;
        e.internal_molecular += rv[i] * tv[i];
        e.radiative += cp.beta * std::pow(tv[i], 4);
        e.cold += rv[i] * cold_energy(rv[i], cp);
    }
    const double cell = grid->volume() / static_cast<double>(npts);
    e.kinetic *= cell;
    e.internal_molecular *= cell;
    e.radiative *= cell;
    e.cold *= cell;

    if (ap.lambda > 0.0) {
        // |grad^{2s+1} rho|: the |k|^{2s+1} multiplier applied to rho
        ScalarField h = laplacian_power(state.rho, ap.s + 0.5);
        h.to_grid();
        const auto& hv = h.values();
        double s = 0.0;
        for (std::size_t i = 0; i < npts; ++i) s += hv[i] * hv[i];
        e.lambda_reg = 0.5 * ap.lambda * s * cell;
    }
    return e;
}

EntropyProduction entropy_production(const MixtureState& state, const ApproxParams& ap,
                                     const ConstitutiveParams& cp, const ReactionModel& chem) {
    const auto grid = state.rho.grid_ptr();
    const std::size_t npts = grid->size();
    const std::size_t n = cp.n_species;
    const int dim = grid->dim();

    ScalarField rho = state.rho;  rho.to_grid();
    ScalarField th = state.theta; th.to_grid();

    // velocity gradients and |D(u)|^2
    std::vector<std::vector<ScalarField>> du(static_cast<std::size_t>(dim));
    for (int i = 0; i < dim; ++i) {
        du[static_cast<std::size_t>(i)].resize(static_cast<std::size_t>(dim));
        for (int j = 0; j < dim; ++j) {
            ScalarField g = derivative(state.u[j], i);
            g.to_grid();
            du[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = std::move(g);
        }
    }

    VectorField gth = gradient(state.theta);
    for (int d = 0; d < dim; ++d) gth[d].to_grid();

    std::vector<ScalarField> r_g(n);
    std::vector<VectorField> gr(n);
    for (std::size_t k = 0; k < n; ++k) {
        r_g[k] = state.r[k];
        r_g[k].to_grid();
        gr[k] = gradient(state.r[k]);
        for (int d = 0; d < dim; ++d) gr[k][d].to_grid();
    }

    const auto& rv = rho.values();
    const auto& tv = th.values();
    const double m_min = cp.min_mass();
    const double floor_r = ap.r_min;

    double total = 0.0;
    double mn = std::numeric_limits<double>::infinity();
    std::size_t masked = 0;
    std::vector<double> w(n), rho_k_loc(n);
    for (std::size_t i = 0; i < npts; ++i) {
        bool at_floor = false;
        double wsum = 0.0, rho_n_loc = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            double rk = r_g[k].values()[i];
            if (rk <= floor_r) {
                at_floor = true;
                rk = floor_r;
            }
            w[k] = std::exp(rk);
            wsum += w[k];
            rho_n_loc += cp.m[k] * w[k];
            rho_k_loc[k] = cp.m[k] * w[k];
        }
        const double pim = tv[i] * wsum;
        const double c0 = ms_amplitude(rv[i], tv[i], cp);
        const double kap_eps = ap.epsilon / m_min * rho_n_loc + heat_conductivity(rv[i], tv[i], cp);

        double dsq = 0.0;
        for (int a = 0; a < dim; ++a)
            for (int b = 0; b < dim; ++b) {
                const double d = 0.5 *
                    (du[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)].values()[i] +
                     du[static_cast<std::size_t>(b)][static_cast<std::size_t>(a)].values()[i]);
                dsq += d * d;
            }
        double gth2 = 0.0;
        for (int d = 0; d < dim; ++d) {
            const double g = gth[d].values()[i];
            gth2 += g * g;
        }

        double sigma = 2.0 * rho_n_loc * dsq / tv[i] + kap_eps * gth2 / (tv[i] * tv[i]);

        // -sum_k (F_k/m_k) . grad log p_k with grad log p_k = grad r_k + grad log theta:
        // C0 times the quadratic form of Dhat in (grad r + grad log theta)
        for (int d = 0; d < dim; ++d) {
            const double glt = gth[d].values()[i] / tv[i];
            for (std::size_t k = 0; k < n; ++k) {
                double acc = 0.0;
                for (std::size_t l = 0; l < n; ++l) {
                    const double Ckl = (k == l) ? 1.0 - cp.m[k] * w[k] / rho_n_loc
                                                : -cp.m[k] * w[k] / rho_n_loc;
                    const double Dkl = tv[i] * Ckl * w[l] / (pim * cp.m[k]);
                    acc += Dkl * (gr[l][d].values()[i] + glt);
                }
                sigma += c0 * acc * (gr[k][d].values()[i] + glt);
            }
        }

        // chemical affinity -sum_k rho_n g_k omega_k
        if (chem.kind != ReactionKind::Inert) {
            ThermoPoint pt;
            pt.rho = rv[i];
            pt.theta = tv[i];
            pt.rho_k = rho_k_loc;
            const auto omega = production_rates(pt, chem, cp);
            double aff = 0.0;
            for (std::size_t k = 0; k < n; ++k)
                if (omega[k] != 0.0) aff += gibbs(tv[i], rho_k_loc[k], k, cp) * omega[k];
            sigma -= rho_n_loc * aff;
        }

        total += sigma;
        if (at_floor) {
            ++masked;
        } else {
            mn = std::min(mn, sigma);
        }
    }
    EntropyProduction out;
    out.total = total / static_cast<double>(npts) * grid->volume();
    out.min = (masked == npts) ? 0.0 : mn;
    out.masked_points = masked;
    return out;
}

double bd_functional(const MixtureState& state, const ApproxParams& ap,
                     const ConstitutiveParams& cp, double r) {
    const auto grid = state.rho.grid_ptr();
    const std::size_t npts = grid->size();
    const int dim = grid->dim();

    ScalarField rho = state.rho;
    rho.to_grid();
    ScalarField log_rho(grid);
    {
        auto& lv = log_rho.values();
        const auto& rv = rho.values();
        for (std::size_t i = 0; i < npts; ++i) lv[i] = std::log(rv[i]);
    }
    VectorField glr = gradient(log_rho);
    for (int d = 0; d < dim; ++d) glr[d].to_grid();

    std::vector<ScalarField> ug(static_cast<std::size_t>(dim));
    for (int d = 0; d < dim; ++d) {
        ug[static_cast<std::size_t>(d)] = state.u[d];
        ug[static_cast<std::size_t>(d)].to_grid();
    }

    ScalarField hyper(grid);
    if (ap.lambda > 0.0) {
        // |grad Lap^s rho|^2 accumulated over components
        ScalarField ls = laplacian_power(state.rho, static_cast<double>(ap.s));
        for (int d = 0; d < dim; ++d) {
            ScalarField h = derivative(ls, d);
            h.to_grid();
            auto& acc = hyper.values();
            const auto& hv = h.values();
            for (std::size_t i = 0; i < npts; ++i) acc[i] += hv[i] * hv[i];
        }
    }

    const auto& rv = rho.values();
    const auto& hv = hyper.values();
    double total = 0.0;
    for (std::size_t i = 0; i < npts; ++i) {
        double drift = 0.0, usq = 0.0;
        for (int d = 0; d < dim; ++d) {
            const double ud = ug[static_cast<std::size_t>(d)].values()[i];
            const double v = ud + 2.0 * glr[d].values()[i];
            drift += v * v;
            usq += ud * ud;
        }
        total += 0.5 * rv[i] * drift + 0.5 * (r - 1.0) * rv[i] * usq +
                 0.5 * r * ap.lambda * hv[i] + r * rv[i] * cold_energy(rv[i], cp);
    }
    return total / static_cast<double>(npts) * grid->volume();
}

double energy_residual(double E_prev, double E_next, const StepRecord& rec) {
    const double source = rec.dt_used * rec.eps_source_integral;
    return std::abs(E_next - E_prev - source) / std::max(std::abs(E_next), 1e-300);
}

DiagnosticsReport ledgers_and_positivity(const MixtureState& state, const ApproxParams& ap,
                                         const ConstitutiveParams& cp) {
    const auto grid = state.rho.grid_ptr();
    const std::size_t npts = grid->size();
    const std::size_t n = cp.n_species;

    DiagnosticsReport rep;
    rep.time = state.time;

    ScalarField rho = state.rho;  rho.to_grid();
    ScalarField th = state.theta; th.to_grid();
    std::vector<ScalarField> r_g(n);
    for (std::size_t k = 0; k < n; ++k) {
        r_g[k] = state.r[k];
        r_g[k].to_grid();
    }

    const auto& rv = rho.values();
    const auto& tv = th.values();
    double mass = 0.0, ledger = 0.0;
    double min_rho = std::numeric_limits<double>::infinity();
    double min_theta = std::numeric_limits<double>::infinity();
    double min_rk = std::numeric_limits<double>::infinity();
    double dev = 0.0;
    for (std::size_t i = 0; i < npts; ++i) {
        mass += rv[i];
        min_rho = std::min(min_rho, rv[i]);
        min_theta = std::min(min_theta, tv[i]);
        double rho_n_loc = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double rk = r_g[k].values()[i];
            const double dens = cp.m[k] * std::exp(rk);
            rho_n_loc += dens;
            min_rk = std::min(min_rk, dens);
            ledger += ap.delta * cp.m[k] * rk + dens;
        }
        dev = std::max(dev, std::abs(rho_n_loc - rv[i]) / rv[i]);
    }
    const double cell = grid->volume() / static_cast<double>(npts);
    rep.total_mass = mass * cell;
    rep.species_ledger = ledger * cell;
    rep.min_rho = min_rho;
    rep.min_theta = min_theta;
    rep.min_rho_k = min_rk;
    rep.sum_rhok_dev = dev;
    return rep;
}

DiagnosticsReport assemble_report(const MixtureState& state, const ApproxParams& ap,
                                  const ConstitutiveParams& cp, const ReactionModel& chem,
                                  const StepRecord& rec, double prev_total_energy,
                                  const DiagnosticsOptions& opt) {
    DiagnosticsReport rep = ledgers_and_positivity(state, ap, cp);

    const EnergyBreakdown e = total_energy(state, ap, cp);
    rep.E_kin = e.kinetic;
    rep.E_int = e.internal_molecular;
    rep.E_rad = e.radiative;
    rep.E_cold = e.cold;
    rep.E_lambda = e.lambda_reg;
    rep.E_total = e.total();

    // int rho s with rho_k = m_k e^{r_k}: the species term is sum_k e^{r_k} r_k
    {
        const auto grid = state.rho.grid_ptr();
        const std::size_t npts = grid->size();
        ScalarField rho = state.rho;  rho.to_grid();
        ScalarField th = state.theta; th.to_grid();
        double s = 0.0;
        std::vector<ScalarField> r_g(cp.n_species);
        for (std::size_t k = 0; k < cp.n_species; ++k) {
            r_g[k] = state.r[k];
            r_g[k].to_grid();
        }
        const auto& rv = rho.values();
        const auto& tv = th.values();
        for (std::size_t i = 0; i < npts; ++i) {
            double v = rv[i] * std::log(tv[i]) + 4.0 * cp.beta / 3.0 * std::pow(tv[i], 3);
            for (std::size_t k = 0; k < cp.n_species; ++k) {
                const double rk = r_g[k].values()[i];
                v -= std::exp(rk) * rk;
            }
            s += v;
        }
        rep.entropy = s / static_cast<double>(npts) * grid->volume();
    }

    const EntropyProduction sp = entropy_production(state, ap, cp, chem);
    rep.sigma_total = sp.total;
    rep.sigma_min = sp.min;

    rep.bd = bd_functional(state, ap, cp, opt.bd_r);
    rep.picard_iters = rec.picard_iters;
    rep.energy_residual =
        (prev_total_energy >= 0.0) ? energy_residual(prev_total_energy, rep.E_total, rec) : 0.0;
    return rep;
}

}  // namespace mixsim

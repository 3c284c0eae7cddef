#include "mixsim/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mixsim {

namespace {

// Grid fields of all partial derivatives d u_j / d x_i.
std::vector<std::vector<ScalarField>> velocity_gradients(const VectorField& u) {
    const int dim = u.dim();
    std::vector<std::vector<ScalarField>> du(static_cast<std::size_t>(dim));
    for (int i = 0; i < dim; ++i) {
        du[static_cast<std::size_t>(i)].resize(static_cast<std::size_t>(dim));
        for (int j = 0; j < dim; ++j) {
            ScalarField g = derivative(u[j], i);
            g.to_grid();
            du[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = std::move(g);
        }
    }
    return du;
}

// |D(u)|^2 with D = (grad u + grad u^T)/2, pointwise on the grid.
ScalarField strain_rate_squared(const std::vector<std::vector<ScalarField>>& du, GridPtr grid) {
    ScalarField out(grid);
    auto& v = out.values();
    const int dim = static_cast<int>(du.size());
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) {
            const auto& a = du[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].values();
            const auto& b = du[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)].values();
            for (std::size_t q = 0; q < v.size(); ++q) {
                const double d = 0.5 * (a[q] + b[q]);
                v[q] += d * d;
            }
        }
    return out;
}

// Invert rho z + beta z^4 = W for z > 0 (monotone); Newton with bisection
// safeguard. Returns a negative value if W <= 0 (caller reports positivity).
double invert_theta(double rho, double beta, double W, double guess) {
    if (!(W > 0.0)) return -1.0;
    if (beta == 0.0) return W / rho;
    double lo = 0.0;
    double hi = std::max({guess, W / rho, std::pow(W / beta, 0.25)}) + 1.0;
    double z = std::min(std::max(guess, 1e-14), hi);
    for (int it = 0; it < 100; ++it) {
        const double f = rho * z + beta * z * z * z * z - W;
        if (std::abs(f) <= 1e-13 * std::max(1.0, std::abs(W))) return z;
        if (f > 0.0) hi = z; else lo = z;
        const double fp = rho + 4.0 * beta * z * z * z;
        double znew = z - f / fp;
        if (!(znew > lo && znew < hi)) znew = 0.5 * (lo + hi);
        z = znew;
    }
    return z;
}

// Invert delta z + e^z = V (monotone, onto R for delta > 0).
double invert_species(double delta, double V, double guess, double r_min, bool& floored) {
    floored = false;
    if (delta == 0.0) {
        const double floor_v = std::exp(r_min);
        if (!(V > floor_v)) {
            floored = true;
            return r_min;
        }
        return std::log(V);
    }
    double z = guess;
    for (int it = 0; it < 200; ++it) {
        const double ez = std::exp(std::min(z, 700.0));
        const double f = delta * z + ez - V;
        if (std::abs(f) <= 1e-13 * std::max(1.0, std::abs(V))) break;
        double step = f / (delta + ez);
        step = std::clamp(step, -40.0, 40.0);
        z -= step;
    }
    if (z < r_min) {
        floored = true;
        return r_min;
    }
    return z;
}

}  // namespace

void ApproxParams::validate(const SpectralGrid& grid) const {
    if (!(epsilon >= 0.0)) throw std::invalid_argument("epsilon must be nonnegative");
    if (!(delta >= 0.0)) throw std::invalid_argument("delta must be nonnegative");
    if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be nonnegative");
    if (s < 0) throw std::invalid_argument("s must be nonnegative");
    if (lambda > 0.0 && 2 * s + 1 < 3)
        throw std::invalid_argument("2s+1 >= 3 required when lambda > 0");
    if (N < 0 || N > grid.modes_per_dim() / 2)
        throw std::invalid_argument("truncation N exceeds grid capacity");
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
    if (!(t_end >= 0.0)) throw std::invalid_argument("t_end must be nonnegative");
    if (!(picard_tol > 0.0)) throw std::invalid_argument("picard_tol must be positive");
    if (picard_max < 1) throw std::invalid_argument("picard_max must be at least 1");
    if (retry_budget < 0) throw std::invalid_argument("retry_budget must be nonnegative");
}

int ApproxParams::truncation(const SpectralGrid& grid) const {
    return (N > 0) ? N : grid.dealias_cut();
}

void InitialData::validate() const {
    const auto& rv = rho0.values();
    for (std::size_t i = 0; i < rv.size(); ++i)
        if (!(rv[i] > 0.0)) throw std::invalid_argument("initial density must be strictly positive");
    const auto& tv = theta0.values();
    for (std::size_t i = 0; i < tv.size(); ++i)
        if (!(tv[i] > 0.0)) throw std::invalid_argument("initial temperature must be strictly positive");
    // species must add up to the total density
    for (std::size_t i = 0; i < rv.size(); ++i) {
        double s = 0.0;
        for (const auto& rk : rho_k0) {
            const double v = rk.values()[i];
            if (!(v >= 0.0)) throw std::invalid_argument("initial species densities must be nonnegative");
            s += v;
        }
        if (std::abs(s - rv[i]) > 1e-12 * std::max(1.0, std::abs(rv[i])))
            throw std::invalid_argument("initial species densities must sum to the total density");
    }
}

PositivityError::PositivityError(const std::string& inv, double t, std::size_t idx, double val)
    : std::runtime_error("positivity failure: " + inv + " at t=" + std::to_string(t) +
                         ", grid index " + std::to_string(idx) + ", value " + std::to_string(val)),
      invariant(inv), time(t), grid_index(idx), value(val) {}

StepError::StepError(const std::string& what, double t)
    : std::runtime_error(what + " at t=" + std::to_string(t)), time(t) {}

Stepper::Stepper(GridPtr grid, ApproxParams ap, ConstitutiveParams cp, ReactionModel chem)
    : grid_(std::move(grid)), ap_(ap), cp_(cp), chem_(chem) {
    cp_.validate();
    chem_.validate(cp_);
    ap_.validate(*grid_);
    N_ = ap_.truncation(*grid_);
}

ScalarField Stepper::rho_n_field(const std::vector<ScalarField>& r) const {
    ScalarField out(grid_);
    auto& v = out.values();
    for (std::size_t k = 0; k < r.size(); ++k) {
        ScalarField rk = r[k];
        rk.to_grid();
        const auto& rv = rk.values();
        for (std::size_t i = 0; i < v.size(); ++i) v[i] += cp_.m[k] * std::exp(rv[i]);
    }
    return out;
}

ScalarField Stepper::mass_solve(const ScalarField& rho, const ScalarField& m) const {
    ScalarField rho_g = rho;
    rho_g.to_grid();
    const double rho_bar = integrate(rho_g) / grid_->volume();
    ScalarField mm = project(m, N_);
    const double mnorm = std::max(l2_norm(mm), 1e-300);

    ScalarField u = mm;
    for (auto& c : u.coeffs()) c /= rho_bar;
    for (int it = 0; it < 500; ++it) {
        ScalarField pu = multiply_dealias(rho_g, u);
        project_inplace(pu, N_);
        ScalarField res = sub(mm, pu);
        const double rn = l2_norm(res);
        if (rn <= 1e-13 * mnorm) {
            u.to_grid();
            return u;
        }
        for (auto& c : res.coeffs()) c /= rho_bar;
        axpy_inplace(u, 1.0, res);
    }
    throw StepError("weighted projection solve did not converge", 0.0);
}

MixtureState Stepper::make_initial_state(const InitialData& init) const {
    init.validate();
    MixtureState st;
    st.time = 0.0;
    st.rho = init.rho0;
    st.rho.to_grid();

    st.theta = init.theta0;
    st.theta.to_grid();

    st.u = VectorField(grid_);
    for (int d = 0; d < grid_->dim(); ++d)
        st.u[d] = mass_solve(st.rho, project(init.m0[d], N_));

    st.r.resize(cp_.n_species);
    for (std::size_t k = 0; k < cp_.n_species; ++k) {
        ScalarField rk(grid_);
        ScalarField dens = init.rho_k0[k];
        dens.to_grid();
        auto& out = rk.values();
        const auto& dv = dens.values();
        for (std::size_t i = 0; i < out.size(); ++i) {
            const double v = dv[i] / cp_.m[k];
            out[i] = (v > std::exp(ap_.r_min)) ? std::log(v) : ap_.r_min;
        }
        st.r[k] = std::move(rk);
    }
    return st;
}

ScalarField Stepper::step_continuity(const ScalarField& rho_old, const VectorField& u_frozen,
                                     double dt, const ScalarField* forcing) const {
    ScalarField rhs(grid_);
    {
        VectorField flux(grid_);
        for (int d = 0; d < grid_->dim(); ++d) flux[d] = multiply_dealias(rho_old, u_frozen[d]);
        rhs = divergence(flux);
        for (auto& c : rhs.coeffs()) c = -c;
    }
    if (forcing) axpy_inplace(rhs, 1.0, *forcing);
    dealias_inplace(rhs);

    ScalarField rho_new = rho_old;
    rho_new.to_spectral();
    auto& c = rho_new.coeffs();
    const auto& rc = rhs.coeffs();
    const auto& ksq = grid_->ksq();
    for (std::size_t i = 0; i < c.size(); ++i)
        c[i] = std::exp(-ap_.epsilon * ksq[i] * dt) * (c[i] + dt * rc[i]);
    rho_new.to_grid();

    const auto& v = rho_new.values();
    for (std::size_t i = 0; i < v.size(); ++i)
        if (!(v[i] > 0.0)) throw PositivityError("rho > 0", 0.0, i, v[i]);
    return rho_new;
}

ScalarField Stepper::step_thermal(const ScalarField& rho_old, const ScalarField& theta_old,
                                  const ScalarField& rho_new, const VectorField& u_frozen,
                                  const ScalarField& theta_frozen,
                                  const std::vector<ScalarField>& r_frozen, double dt,
                                  const ScalarField* forcing, double* eps_source_out) const {
    const std::size_t npts = grid_->size();
    const std::size_t n = cp_.n_species;
    const double eps = ap_.epsilon;
    const double lam = ap_.lambda;
    const double del = ap_.delta;
    const double beta = cp_.beta;

    ScalarField rho_g = rho_new;   rho_g.to_grid();
    ScalarField th_f = theta_frozen; th_f.to_grid();
    ScalarField rho_old_g = rho_old; rho_old_g.to_grid();
    ScalarField th_old = theta_old; th_old.to_grid();

    std::vector<ScalarField> r_g(n), exp_r(n);
    for (std::size_t k = 0; k < n; ++k) {
        r_g[k] = r_frozen[k];
        r_g[k].to_grid();
        exp_r[k] = ScalarField(grid_);
        auto& e = exp_r[k].values();
        const auto& rv = r_g[k].values();
        for (std::size_t i = 0; i < npts; ++i) e[i] = std::exp(rv[i]);
    }

    ScalarField rho_n(grid_);
    {
        auto& v = rho_n.values();
        for (std::size_t k = 0; k < n; ++k) {
            const auto& e = exp_r[k].values();
            for (std::size_t i = 0; i < npts; ++i) v[i] += cp_.m[k] * e[i];
        }
    }

    // conserved quantity at the start of the step
    ScalarField W_old(grid_);
    {
        auto& w = W_old.values();
        const auto& rv = rho_old_g.values();
        const auto& tv = th_old.values();
        for (std::size_t i = 0; i < npts; ++i)
            w[i] = rv[i] * tv[i] + beta * std::pow(tv[i], 4);
    }
    // iterate value, used by the transport term and the stabilizer correction
    ScalarField W_f(grid_);
    {
        auto& w = W_f.values();
        const auto& rv = rho_g.values();
        const auto& tv = th_f.values();
        for (std::size_t i = 0; i < npts; ++i)
            w[i] = rv[i] * tv[i] + beta * std::pow(tv[i], 4);
    }

    ScalarField kappa_eps(grid_);
    double Dbar = 0.0;
    {
        auto& kv = kappa_eps.values();
        const auto& rv = rho_g.values();
        const auto& tv = th_f.values();
        const auto& rn = rho_n.values();
        const double m_min = cp_.min_mass();
        for (std::size_t i = 0; i < npts; ++i) {
            kv[i] = eps / m_min * rn[i] + heat_conductivity(rv[i], tv[i], cp_);
            const double cap = rv[i] + 4.0 * beta * std::pow(tv[i], 3);
            Dbar = std::max(Dbar, kv[i] / cap);
        }
    }

    ScalarField rhs(grid_, 0.0);
    rhs.to_spectral();

    // transport of the conserved quantity
    {
        VectorField flux(grid_);
        for (int d = 0; d < grid_->dim(); ++d) flux[d] = multiply_dealias(u_frozen[d], W_f);
        axpy_inplace(rhs, -1.0, divergence(flux));
    }
    // conduction (explicit; stabilized through the integrating factor below)
    {
        VectorField gth = gradient(th_f);
        VectorField flux(grid_);
        for (int d = 0; d < grid_->dim(); ++d) flux[d] = multiply_dealias(kappa_eps, gth[d]);
        axpy_inplace(rhs, 1.0, divergence(flux));
    }
    // species heat fluxes: theta F_k/m_k - delta theta grad r_k - eps theta e^{r_k} grad r_k
    {
        ScalarField log_th(grid_);
        {
            auto& lv = log_th.values();
            const auto& tv = th_f.values();
            for (std::size_t i = 0; i < npts; ++i) lv[i] = std::log(tv[i]);
        }
        VectorField glog = gradient(log_th);
        for (int d = 0; d < grid_->dim(); ++d) glog[d].to_grid();
        std::vector<VectorField> gr(n);
        for (std::size_t k = 0; k < n; ++k) {
            gr[k] = gradient(r_g[k]);
            for (int d = 0; d < grid_->dim(); ++d) gr[k][d].to_grid();
        }
        const auto& rv = rho_g.values();
        const auto& tv = th_f.values();

        // pointwise entropic fluxes F_k/m_k = -C0 (sum_l Dhat_kl grad r_l
        //                                          + grad log theta sum_l Dhat_kl)
        std::vector<VectorField> q(n);
        for (std::size_t k = 0; k < n; ++k) q[k] = VectorField(grid_);
        std::vector<double> w(n), rloc(n);
        for (std::size_t i = 0; i < npts; ++i) {
            double wsum = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                rloc[k] = std::max(r_g[k].values()[i], ap_.r_min);
                w[k] = std::exp(rloc[k]);
                wsum += w[k];
            }
            double rho_n_loc = 0.0;
            for (std::size_t k = 0; k < n; ++k) rho_n_loc += cp_.m[k] * w[k];
            const double pim = tv[i] * wsum;
            const double c0 = ms_amplitude(rv[i], tv[i], cp_);
            for (std::size_t k = 0; k < n; ++k) {
                for (int d = 0; d < grid_->dim(); ++d) {
                    double acc = 0.0;
                    for (std::size_t l = 0; l < n; ++l) {
                        const double Ckl = (k == l) ? 1.0 - cp_.m[k] * w[k] / rho_n_loc
                                                    : -cp_.m[k] * w[k] / rho_n_loc;
                        const double Dkl = tv[i] * Ckl * w[l] / (pim * cp_.m[k]);
                        acc += Dkl * (gr[l][d].values()[i] + glog[d].values()[i]);
                    }
                    // q_k = theta F_k/m_k - delta theta grad r_k - eps theta e^r grad r_k
                    const double Fk_over_mk = -c0 * acc;
                    q[k][d].values()[i] = tv[i] * Fk_over_mk
                                          - del * tv[i] * gr[k][d].values()[i]
                                          - eps * tv[i] * w[k] * gr[k][d].values()[i];
                }
            }
        }
        for (std::size_t k = 0; k < n; ++k) {
            for (int d = 0; d < grid_->dim(); ++d) dealias_inplace(q[k][d]);
            axpy_inplace(rhs, -1.0, divergence(q[k]));
        }
    }

    // sources
    double eps_source = 0.0;
    {
        auto du = velocity_gradients(u_frozen);
        ScalarField dsq = strain_rate_squared(du, grid_);
        ScalarField divu = divergence(u_frozen);
        divu.to_grid();

        // lambda |Lap^s grad(rho u)|^2, same g = dealias(rho u) as the momentum update
        ScalarField lam_heat(grid_);
        if (lam > 0.0) {
            for (int cmp = 0; cmp < grid_->dim(); ++cmp) {
                ScalarField g = multiply_dealias(rho_g, u_frozen[cmp]);
                ScalarField gs = laplacian_power(g, static_cast<double>(ap_.s));
                for (int d = 0; d < grid_->dim(); ++d) {
                    ScalarField h = derivative(gs, d);
                    h.to_grid();
                    auto& acc = lam_heat.values();
                    const auto& hv = h.values();
                    for (std::size_t i = 0; i < npts; ++i) acc[i] += hv[i] * hv[i];
                }
            }
        }
        ScalarField lap_s1(grid_);
        if (lam > 0.0 && eps > 0.0) {
            lap_s1 = laplacian_power(rho_g, static_cast<double>(ap_.s + 1));
            lap_s1.to_grid();
        }
        VectorField grho = gradient(rho_g);
        for (int d = 0; d < grid_->dim(); ++d) grho[d].to_grid();

        ScalarField src(grid_);
        auto& sv = src.values();
        const auto& tv = th_f.values();
        const auto& rv = rho_g.values();
        const auto& rn = rho_n.values();
        const auto& dq = dsq.values();
        const auto& dv = divu.values();
        const auto& lh = lam_heat.values();
        const auto& l1 = lap_s1.values();
        for (std::size_t i = 0; i < npts; ++i) {
            double pim = 0.0;
            for (std::size_t k = 0; k < n; ++k) pim += tv[i] * exp_r[k].values()[i];
            double gr2 = 0.0;
            for (int d = 0; d < grid_->dim(); ++d) {
                const double g = grho[d].values()[i];
                gr2 += g * g;
            }
            const double es = eps / (tv[i] * tv[i]) - eps * std::pow(tv[i], 5);
            eps_source += es;
            sv[i] = es - (pim + beta / 3.0 * std::pow(tv[i], 4)) * dv[i] +
                    2.0 * rn[i] * dq[i] + lam * lh[i] + lam * eps * l1[i] * l1[i] +
                    eps * cold_pressure_derivative(rv[i], cp_) / rv[i] * gr2;
        }
        eps_source = eps_source / static_cast<double>(npts) * grid_->volume();
        axpy_inplace(rhs, 1.0, src);
    }
    if (forcing) axpy_inplace(rhs, 1.0, *forcing);
    dealias_inplace(rhs);
    if (eps_source_out) *eps_source_out = eps_source;

    // integrating-factor update of the conserved quantity
    W_old.to_spectral();
    W_f.to_spectral();
    ScalarField W_new = W_old;
    {
        auto& c = W_new.coeffs();
        const auto& rc = rhs.coeffs();
        const auto& fc = W_f.coeffs();
        const auto& ksq = grid_->ksq();
        for (std::size_t i = 0; i < c.size(); ++i) {
            const double a = Dbar * ksq[i];
            c[i] = std::exp(-a * dt) * (c[i] + dt * (rc[i] + a * fc[i]));
        }
    }
    W_new.to_grid();

    // recover theta from rho z + beta z^4 = W
    ScalarField theta_new(grid_);
    {
        auto& tn = theta_new.values();
        const auto& wv = W_new.values();
        const auto& rv = rho_g.values();
        const auto& tg = th_f.values();
        for (std::size_t i = 0; i < npts; ++i) {
            const double z = invert_theta(rv[i], beta, wv[i], tg[i]);
            if (!(z > 0.0)) throw PositivityError("theta > 0", 0.0, i, wv[i]);
            tn[i] = z;
        }
    }
    return theta_new;
}

VectorField Stepper::step_momentum(const ScalarField& rho_old, const VectorField& u_old,
                                   const ScalarField& rho_new, const VectorField& u_frozen,
                                   const ScalarField& theta_new,
                                   const std::vector<ScalarField>& r_frozen, double dt,
                                   const VectorField* forcing) const {
    const std::size_t npts = grid_->size();
    const std::size_t n = cp_.n_species;
    const int dim = grid_->dim();
    const double eps = ap_.epsilon;
    const double lam = ap_.lambda;

    ScalarField rho_g = rho_new;   rho_g.to_grid();
    ScalarField rho_old_g = rho_old; rho_old_g.to_grid();
    ScalarField th_g = theta_new;  th_g.to_grid();

    ScalarField rho_n = rho_n_field(r_frozen);

    // total pressure at the iterate
    ScalarField pi(grid_);
    {
        auto& pv = pi.values();
        const auto& rv = rho_g.values();
        const auto& tv = th_g.values();
        std::vector<const std::vector<double>*> rvals(n);
        std::vector<ScalarField> r_g(n);
        for (std::size_t k = 0; k < n; ++k) {
            r_g[k] = r_frozen[k];
            r_g[k].to_grid();
            rvals[k] = &r_g[k].values();
        }
        for (std::size_t i = 0; i < npts; ++i) {
            double pim = 0.0;
            for (std::size_t k = 0; k < n; ++k)
                pim += tv[i] * std::exp((*rvals[k])[i]);
            pv[i] = cold_pressure(rv[i], cp_) + cp_.beta / 3.0 * std::pow(tv[i], 4) + pim;
        }
        dealias_inplace(pi);
    }

    // dealiased momentum iterate g = rho u (shared with the thermal heating)
    VectorField g(grid_);
    for (int d = 0; d < dim; ++d) g[d] = multiply_dealias(rho_g, u_frozen[d]);

    auto du = velocity_gradients(u_frozen);
    VectorField grho = gradient(rho_g);
    for (int d = 0; d < dim; ++d) grho[d].to_grid();

    // per-mode integrating-factor rates from maximal diffusivities
    double nu_bar = 0.0, rho_max = 0.0;
    {
        const auto& rv = rho_g.values();
        const auto& rn = rho_n.values();
        for (std::size_t i = 0; i < npts; ++i) {
            nu_bar = std::max(nu_bar, 2.0 * rn[i] / rv[i]);
            rho_max = std::max(rho_max, rv[i]);
        }
    }

    VectorField m_new(grid_);
    for (int i = 0; i < dim; ++i) {
        ScalarField rhs(grid_, 0.0);
        rhs.to_spectral();

        // convection: -d_j (g_i u_j)
        for (int j = 0; j < dim; ++j) {
            ScalarField a = multiply_dealias(g[i], u_frozen[j]);
            axpy_inplace(rhs, -1.0, derivative(a, j));
        }
        // viscous stress: +d_j (2 rho_n D_ij)
        for (int j = 0; j < dim; ++j) {
            ScalarField Dij(grid_);
            {
                auto& v = Dij.values();
                const auto& a = du[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].values();
                const auto& b = du[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)].values();
                for (std::size_t q = 0; q < npts; ++q) v[q] = a[q] + b[q];  // 2 D_ij
            }
            ScalarField Sij = multiply_dealias(rho_n, Dij);
            axpy_inplace(rhs, 1.0, derivative(Sij, j));
        }
        // pressure gradient
        axpy_inplace(rhs, -1.0, derivative(pi, i));
        // lambda rho Lap^{2s+1}(rho u) + lambda rho grad Lap^{2s+1} rho
        if (lam > 0.0) {
            ScalarField hyper = laplacian_power(g[i], static_cast<double>(2 * ap_.s + 1));
            axpy_inplace(rhs, lam, multiply_dealias(rho_g, hyper));
            ScalarField dlap = derivative(laplacian_power(rho_g, static_cast<double>(2 * ap_.s + 1)), i);
            axpy_inplace(rhs, lam, multiply_dealias(rho_g, dlap));
        }
        // -eps (grad rho . grad) u_i
        if (eps > 0.0) {
            ScalarField adv(grid_);
            auto& av = adv.values();
            for (int j = 0; j < dim; ++j) {
                const auto& gv = grho[j].values();
                const auto& dv = du[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)].values();
                for (std::size_t q = 0; q < npts; ++q) av[q] += gv[q] * dv[q];
            }
            axpy_inplace(rhs, -eps, adv);
        }
        if (forcing) axpy_inplace(rhs, 1.0, (*forcing)[i]);
        project_inplace(rhs, N_);

        ScalarField m_old = multiply_dealias(rho_old_g, u_old[i]);
        project_inplace(m_old, N_);
        ScalarField m_it = project(g[i], N_);

        ScalarField mn = m_old;
        auto& c = mn.coeffs();
        const auto& rc = rhs.coeffs();
        const auto& fc = m_it.coeffs();
        const auto& ksq = grid_->ksq();
        for (std::size_t q = 0; q < c.size(); ++q) {
            const double rate = nu_bar * ksq[q] +
                                lam * rho_max * std::pow(ksq[q], 2 * ap_.s + 1);
            c[q] = std::exp(-rate * dt) * (c[q] + dt * (rc[q] + rate * fc[q]));
        }
        m_new[i] = std::move(mn);
    }

    VectorField u_new(grid_);
    for (int i = 0; i < dim; ++i) u_new[i] = mass_solve(rho_g, m_new[i]);
    return u_new;
}

std::vector<ScalarField> Stepper::step_species(const std::vector<ScalarField>& r_old,
                                               const ScalarField& rho_new,
                                               const VectorField& u_frozen,
                                               const ScalarField& theta_new,
                                               const std::vector<ScalarField>& r_frozen,
                                               double dt,
                                               const std::vector<ScalarField>* forcing,
                                               std::size_t* floored_out) const {
    const std::size_t npts = grid_->size();
    const std::size_t n = cp_.n_species;
    const int dim = grid_->dim();
    const double eps = ap_.epsilon;
    const double del = ap_.delta;

    ScalarField rho_g = rho_new; rho_g.to_grid();
    ScalarField th_g = theta_new; th_g.to_grid();

    std::vector<ScalarField> r_g(n), exp_r(n), exp_r_old(n);
    for (std::size_t k = 0; k < n; ++k) {
        r_g[k] = r_frozen[k];
        r_g[k].to_grid();
        exp_r[k] = ScalarField(grid_);
        auto& e = exp_r[k].values();
        const auto& rv = r_g[k].values();
        for (std::size_t i = 0; i < npts; ++i) e[i] = std::exp(rv[i]);
        // transport is explicit at the start-of-step state, mirroring the
        // continuity update so that sum_k m_k e^{r_k} tracks rho exactly
        ScalarField rk_old = r_old[k];
        rk_old.to_grid();
        exp_r_old[k] = ScalarField(grid_);
        auto& eo = exp_r_old[k].values();
        const auto& ro = rk_old.values();
        for (std::size_t i = 0; i < npts; ++i) eo[i] = std::exp(ro[i]);
    }

    ScalarField log_th(grid_);
    {
        auto& lv = log_th.values();
        const auto& tv = th_g.values();
        for (std::size_t i = 0; i < npts; ++i) lv[i] = std::log(tv[i]);
    }
    VectorField glog = gradient(log_th);
    for (int d = 0; d < dim; ++d) glog[d].to_grid();
    std::vector<VectorField> gr(n);
    for (std::size_t k = 0; k < n; ++k) {
        gr[k] = gradient(r_g[k]);
        for (int d = 0; d < dim; ++d) gr[k][d].to_grid();
    }

    // Maxwell-Stefan term C0 sum_l Dhat_kl (grad r_l + grad log theta) in the
    // factored form (C0 theta / (pi_m m_k)) w_k (v_k - m_k S / rho_n), plus
    // the reaction source, both pointwise. The diagonal diffusivity bound
    // feeds the high-mode stabilizer below.
    std::vector<VectorField> ms(n);
    std::vector<ScalarField> src(n);
    std::vector<double> ms_diffusivity(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        ms[k] = VectorField(grid_);
        src[k] = ScalarField(grid_);
    }
    {
        std::vector<double> w(n), rho_k_loc(n);
        const auto& rv = rho_g.values();
        const auto& tv = th_g.values();
        for (std::size_t i = 0; i < npts; ++i) {
            double wsum = 0.0, rho_n_loc = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                w[k] = std::exp(std::max(r_g[k].values()[i], ap_.r_min));
                wsum += w[k];
                rho_n_loc += cp_.m[k] * w[k];
                rho_k_loc[k] = cp_.m[k] * w[k];
            }
            const double pim = tv[i] * wsum;
            const double c0 = ms_amplitude(rv[i], tv[i], cp_);
            const double pref = c0 * tv[i] / pim;

            ThermoPoint pt;
            pt.rho = rv[i];
            pt.theta = tv[i];
            pt.rho_k = rho_k_loc;
            const auto omega = production_rates(pt, chem_, cp_);

            for (int d = 0; d < dim; ++d) {
                const double glt = glog[d].values()[i];
                double S = 0.0;
                for (std::size_t l = 0; l < n; ++l)
                    S += w[l] * (gr[l][d].values()[i] + glt);
                const double t_over = S / rho_n_loc;
                for (std::size_t k = 0; k < n; ++k)
                    ms[k][d].values()[i] = pref * w[k] *
                                           ((gr[k][d].values()[i] + glt) - cp_.m[k] * t_over) /
                                           cp_.m[k];
            }
            for (std::size_t k = 0; k < n; ++k) {
                const double Ykk = rho_k_loc[k] / rho_n_loc;
                const double Dkk = tv[i] * (1.0 - Ykk) * w[k] / (pim * cp_.m[k]);
                ms_diffusivity[k] = std::max(ms_diffusivity[k],
                                             c0 * Dkk / (del + exp_r[k].values()[i]));
                src[k].values()[i] = rho_n_loc * tv[i] * omega[k] / cp_.m[k];
            }
        }
    }

    std::size_t floored = 0;
    std::vector<ScalarField> r_new(n);
    for (std::size_t k = 0; k < n; ++k) {
        ScalarField rhs(grid_, 0.0);
        rhs.to_spectral();

        // transport -div(e^{r_k} u)
        {
            VectorField flux(grid_);
            for (int d = 0; d < dim; ++d) flux[d] = multiply_dealias(exp_r_old[k], u_frozen[d]);
            axpy_inplace(rhs, -1.0, divergence(flux));
        }
        // delta relaxation remainder: the eps part is folded into the
        // integrating factor as eps Lap(V), leaving delta(1-eps) Lap(r_k)
        if (del > 0.0) {
            axpy_inplace(rhs, del * (1.0 - eps), laplacian_power(r_g[k], 1.0));
        }
        // Maxwell-Stefan diffusion
        for (int d = 0; d < dim; ++d) dealias_inplace(ms[k][d]);
        axpy_inplace(rhs, 1.0, divergence(ms[k]));
        // reaction source
        axpy_inplace(rhs, 1.0, src[k]);
        if (forcing) axpy_inplace(rhs, 1.0, (*forcing)[k]);
        project_inplace(rhs, N_);

        // conserved variable V = delta r + e^r at start of step and iterate
        ScalarField V_old(grid_);
        {
            ScalarField rk = r_old[k];
            rk.to_grid();
            auto& v = V_old.values();
            const auto& rv = rk.values();
            for (std::size_t i = 0; i < npts; ++i) v[i] = del * rv[i] + std::exp(rv[i]);
        }
        // The eps Laplacian of V is integrated by the same exact factor as the
        // continuity equation, so the m_k-weighted sum of the species updates
        // reproduces the density update to round-off (the Maxwell-Stefan
        // contributions cancel pointwise). The explicit Maxwell-Stefan and
        // delta diffusion are stabilized only on modes where they would not
        // be contractive; smooth states carry no energy there, which keeps
        // the species/density identification intact.
        double stab = ms_diffusivity[k];
        if (del > 0.0) {
            const auto& e = exp_r[k].values();
            double ds = 0.0;
            for (std::size_t i = 0; i < npts; ++i)
                ds = std::max(ds, del * (1.0 - eps) / (del + e[i]));
            stab += ds;
        }
        ScalarField V_it(grid_);
        {
            auto& v = V_it.values();
            const auto& rv = r_g[k].values();
            for (std::size_t i = 0; i < npts; ++i) v[i] = del * rv[i] + std::exp(rv[i]);
        }
        V_old.to_spectral();
        V_it.to_spectral();
        ScalarField V_new = V_old;
        {
            constexpr double kContractionCap = 0.25;
            auto& c = V_new.coeffs();
            const auto& rc = rhs.coeffs();
            const auto& fc = V_it.coeffs();
            const auto& ksq = grid_->ksq();
            for (std::size_t i = 0; i < c.size(); ++i) {
                const double extra = stab * ksq[i] * dt;
                double a = eps * ksq[i] * dt;
                std::complex<double> corr = 0.0;
                if (extra > kContractionCap) {
                    a += extra;
                    corr = extra * fc[i];
                }
                c[i] = std::exp(-a) * (c[i] + dt * rc[i] + corr);
            }
        }
        V_new.to_grid();

        ScalarField rk_new(grid_);
        {
            auto& out = rk_new.values();
            const auto& vv = V_new.values();
            const auto& guess = r_g[k].values();
            for (std::size_t i = 0; i < npts; ++i) {
                bool fl = false;
                out[i] = invert_species(del, vv[i], guess[i], ap_.r_min, fl);
                if (fl) ++floored;
            }
        }
        r_new[k] = std::move(rk_new);
    }
    if (floored_out) *floored_out = floored;
    return r_new;
}

namespace {

double rel_change(const ScalarField& a, const ScalarField& b) {
    ScalarField d = sub(a, b);
    return l2_norm(d) / std::max(l2_norm(b), 1e-12);
}

}  // namespace

StepRecord Stepper::picard_coupled_step(MixtureState& state, double dt,
                                        const StepForcing* forcing) const {
    StepRecord rec;
    rec.dt_used = dt;

    // forcing snapshots at the step's start time
    std::optional<ScalarField> f_rho;
    std::optional<VectorField> f_mom;
    std::optional<ScalarField> f_W;
    std::optional<std::vector<ScalarField>> f_V;
    if (forcing) {
        if (forcing->rho) f_rho = forcing->rho(state.time);
        if (forcing->momentum) f_mom = forcing->momentum(state.time);
        if (forcing->thermal) f_W = forcing->thermal(state.time);
        if (forcing->species) f_V = forcing->species(state.time);
    }

    VectorField u_f = state.u;
    ScalarField theta_f = state.theta;
    std::vector<ScalarField> r_f = state.r;

    ScalarField rho_new;
    ScalarField theta_new;
    VectorField u_new;
    std::vector<ScalarField> r_new;

    bool converged = false;
    int iters = 0;
    double eps_source = 0.0;
    std::size_t floored = 0;
    for (int j = 0; j < ap_.picard_max; ++j) {
        ++iters;
        rho_new = step_continuity(state.rho, u_f, dt, f_rho ? &*f_rho : nullptr);
        theta_new = step_thermal(state.rho, state.theta, rho_new, u_f, theta_f, r_f, dt,
                                 f_W ? &*f_W : nullptr, &eps_source);
        u_new = step_momentum(state.rho, state.u, rho_new, u_f, theta_new, r_f, dt,
                              f_mom ? &*f_mom : nullptr);
        r_new = step_species(state.r, rho_new, u_f, theta_new, r_f, dt,
                             f_V ? &*f_V : nullptr, &floored);

        double err = rel_change(theta_new, theta_f);
        for (int d = 0; d < grid_->dim(); ++d) err = std::max(err, rel_change(u_new[d], u_f[d]));
        for (std::size_t k = 0; k < r_new.size(); ++k)
            err = std::max(err, rel_change(r_new[k], r_f[k]));

        u_f = u_new;
        theta_f = theta_new;
        r_f = r_new;

        if (!(err == err)) break;  // NaN: diverged, reject
        if (err < ap_.picard_tol) {
            converged = true;
            break;
        }
    }

    rec.picard_iters = iters;
    rec.converged = converged;
    rec.eps_source_integral = eps_source;
    rec.floored_points = floored;
    if (converged) {
        state.rho = std::move(rho_new);
        state.u = std::move(u_new);
        state.theta = std::move(theta_new);
        state.r = std::move(r_new);
        state.time += dt;
    }
    return rec;
}

MixtureState Stepper::run(const InitialData& init, const StepHook& hook,
                          const StepForcing* forcing) const {
    MixtureState state = make_initial_state(init);
    if (hook) hook(state, StepRecord{});

    const double t_end = ap_.t_end;
    while (state.time < t_end - 1e-12 * std::max(1.0, t_end)) {
        double dt_try = std::min(ap_.dt, t_end - state.time);
        bool accepted = false;
        for (int attempt = 0; attempt <= ap_.retry_budget; ++attempt) {
            StepRecord rec;
            bool positivity_failed = false;
            try {
                rec = picard_coupled_step(state, dt_try, forcing);
            } catch (const PositivityError& e) {
                if (attempt == ap_.retry_budget)
                    throw PositivityError(e.invariant, state.time, e.grid_index, e.value);
                positivity_failed = true;
            }
            if (!positivity_failed && rec.converged) {
                accepted = true;
                if (hook) hook(state, rec);
                break;
            }
            dt_try *= 0.5;
        }
        if (!accepted)
            throw StepError("step rejected: Picard iteration did not converge within the retry budget",
                            state.time);
    }
    return state;
}

}  // namespace mixsim

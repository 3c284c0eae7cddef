#include "mixsim/verification.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace mixsim {

namespace {

// Copy the coarse-representable modes out of a fine-grid field.
ScalarField restrict_to(const ScalarField& fine, const GridPtr& coarse) {
    ScalarField src = fine;
    src.to_spectral();
    const SpectralGrid& gf = src.grid();
    const SpectralGrid& gc = *coarse;
    const int dim = gc.dim();
    const int Mc = gc.modes_per_dim();
    const int Mf = gf.modes_per_dim();

    ScalarField out(coarse);
    out.to_spectral();
    auto& oc = out.coeffs();
    const auto& ic = src.coeffs();
    for (std::size_t idx = 0; idx < oc.size(); ++idx) {
        std::size_t rem = idx;
        std::size_t fidx = 0;
        std::size_t fstride = 1;
        // decode last axis first (fastest-varying), build fine index alongside
        for (int d = dim - 1; d >= 0; --d) {
            const int jc = static_cast<int>(rem % static_cast<std::size_t>(Mc));
            rem /= static_cast<std::size_t>(Mc);
            const int k = (jc < Mc / 2) ? jc : jc - Mc;
            const int jf = (k >= 0) ? k : k + Mf;
            fidx += static_cast<std::size_t>(jf) * fstride;
            fstride *= static_cast<std::size_t>(Mf);
        }
        oc[idx] = ic[fidx];
    }
    out.to_grid();
    return out;
}

ScalarField sample(const GridPtr& g, double t,
                   const std::function<double(double, double)>& f) {
    ScalarField out(g);
    auto& v = out.values();
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(t, g->coord(0, i));
    return out;
}

}  // namespace

MmsCaseKind mms_case_from_name(const std::string& name) {
    if (name == "continuity") return MmsCaseKind::Continuity;
    if (name == "species_single") return MmsCaseKind::SpeciesSingle;
    if (name == "coupled2" || name == "coupled_two_species") return MmsCaseKind::CoupledTwoSpecies;
    throw std::invalid_argument("unknown manufactured case: " + name +
                                " (expected continuity, species_single or coupled2)");
}

ManufacturedCase::ManufacturedCase(MmsCaseKind kind, int M, ApproxParams ap,
                                   ConstitutiveParams cp, ReactionModel chem)
    : kind_(kind), ap_(ap), cp_(cp), chem_(chem) {
    grid_ = std::make_shared<SpectralGrid>(1, M);
    fine_ = std::make_shared<SpectralGrid>(1, 2 * M);

    switch (kind_) {
        case MmsCaseKind::Continuity: {
            tgt_.rho = [](double t, double x) { return 2.0 + 0.5 * std::cos(x - t); };
            tgt_.drho_dt = [](double t, double x) { return 0.5 * std::sin(x - t); };
            tgt_.u = [](double, double x) { return 0.3 * std::sin(x); };
            tgt_.du_dt = [](double, double) { return 0.0; };
            tgt_.theta = [](double, double) { return 1.0; };
            tgt_.dtheta_dt = [](double, double) { return 0.0; };
            const auto rho_t = tgt_.rho;
            const auto drho_t = tgt_.drho_dt;
            const double m0 = cp_.m[0];
            tgt_.r.push_back([rho_t, m0](double t, double x) {
                return std::log(rho_t(t, x) / m0);
            });
            tgt_.dr_dt.push_back([rho_t, drho_t](double t, double x) {
                return drho_t(t, x) / rho_t(t, x);
            });
            break;
        }
        case MmsCaseKind::SpeciesSingle: {
            tgt_.rho = [](double t, double x) { return 2.0 + 0.8 * std::cos(x - 0.7 * t); };
            tgt_.drho_dt = [](double t, double x) { return 0.56 * std::sin(x - 0.7 * t); };
            tgt_.u = [](double t, double x) { return 0.35 * std::sin(x + 0.3 * t); };
            tgt_.du_dt = [](double t, double x) { return 0.105 * std::cos(x + 0.3 * t); };
            tgt_.theta = [](double t, double x) { return 1.0 + 0.25 * std::cos(x - t); };
            tgt_.dtheta_dt = [](double t, double x) { return 0.25 * std::sin(x - t); };
            const auto rho_t = tgt_.rho;
            const auto drho_t = tgt_.drho_dt;
            const double m0 = cp_.m[0];
            tgt_.r.push_back([rho_t, m0](double t, double x) {
                return std::log(rho_t(t, x) / m0);
            });
            tgt_.dr_dt.push_back([rho_t, drho_t](double t, double x) {
                return drho_t(t, x) / rho_t(t, x);
            });
            break;
        }
        case MmsCaseKind::CoupledTwoSpecies: {
            tgt_.rho = [](double t, double x) { return 2.0 + 0.3 * std::cos(x - t); };
            tgt_.drho_dt = [](double t, double x) { return 0.3 * std::sin(x - t); };
            tgt_.u = [](double t, double x) { return 0.35 * std::sin(x) * std::cos(t); };
            tgt_.du_dt = [](double t, double x) { return -0.35 * std::sin(x) * std::sin(t); };
            tgt_.theta = [](double t, double x) { return 1.0 + 0.25 * std::cos(2.0 * x - t); };
            tgt_.dtheta_dt = [](double t, double x) { return 0.25 * std::sin(2.0 * x - t); };
            auto r1 = [](double t, double x) { return -0.7 + 0.5 * std::cos(x - 0.5 * t); };
            auto dr1 = [](double t, double x) { return 0.25 * std::sin(x - 0.5 * t); };
            tgt_.r.push_back(r1);
            tgt_.dr_dt.push_back(dr1);
            // second species carries the remainder so that sum_k rho_k = rho
            const auto rho_t = tgt_.rho;
            const auto drho_t = tgt_.drho_dt;
            const double m0 = cp_.m[0];
            const double m1 = cp_.m[1];
            tgt_.r.push_back([rho_t, r1, m0, m1](double t, double x) {
                return std::log((rho_t(t, x) - m0 * std::exp(r1(t, x))) / m1);
            });
            tgt_.dr_dt.push_back([rho_t, drho_t, r1, dr1, m0](double t, double x) {
                const double e1 = m0 * std::exp(r1(t, x));
                return (drho_t(t, x) - e1 * dr1(t, x)) / (rho_t(t, x) - e1);
            });
            break;
        }
    }
}

ManufacturedCase build_case(MmsCaseKind kind, int M, ApproxParams ap) {
    ConstitutiveParams cp;
    ReactionModel chem;
    switch (kind) {
        case MmsCaseKind::Continuity:
        case MmsCaseKind::SpeciesSingle:
            cp.n_species = 1;
            cp.m = {1.0};
            chem.kind = ReactionKind::Inert;
            break;
        case MmsCaseKind::CoupledTwoSpecies:
            cp.n_species = 2;
            cp.m = {1.0, 1.0};
            chem.kind = ReactionKind::ReversiblePair;
            chem.pair_a = 0;
            chem.pair_b = 1;
            chem.kappa_r = cp.kappa_r;
            chem.omega_bar = cp.omega_bar;
            break;
    }
    return ManufacturedCase(kind, M, ap, cp, chem);
}

MixtureState ManufacturedCase::sample_targets(const GridPtr& g, double t) const {
    MixtureState st;
    st.time = t;
    st.rho = sample(g, t, tgt_.rho);
    st.u = VectorField(g);
    st.u[0] = sample(g, t, tgt_.u);
    st.theta = sample(g, t, tgt_.theta);
    for (const auto& rk : tgt_.r) st.r.push_back(sample(g, t, rk));
    return st;
}

MixtureState ManufacturedCase::target_state(double t) const {
    return sample_targets(grid_, t);
}

InitialData ManufacturedCase::initial_data() const {
    MixtureState st = sample_targets(grid_, 0.0);
    InitialData init;
    init.rho0 = st.rho;
    init.theta0 = st.theta;
    init.m0 = VectorField(grid_);
    {
        ScalarField m(grid_);
        auto& mv = m.values();
        const auto& rv = init.rho0.values();
        const auto& uv = st.u[0].values();
        for (std::size_t i = 0; i < mv.size(); ++i) mv[i] = rv[i] * uv[i];
        init.m0[0] = std::move(m);
    }
    for (std::size_t k = 0; k < st.r.size(); ++k) {
        ScalarField dens(grid_);
        auto& dv = dens.values();
        const auto& rv = st.r[k].values();
        for (std::size_t i = 0; i < dv.size(); ++i) dv[i] = cp_.m[k] * std::exp(rv[i]);
        init.rho_k0.push_back(std::move(dens));
    }
    // targets are built with sum_k rho_k = rho only for the coupled case;
    // otherwise rebalance exactly onto the single species
    if (cp_.n_species == 1) init.rho_k0[0] = init.rho0;
    return init;
}

// Discrete evaluation of f = d_t(target) - RHS(target) on grid g, without any
// dealiasing (the doubled grid stands in for the continuous operators).
ManufacturedCase::ForcingFields ManufacturedCase::sample_forcing(const GridPtr& g,
                                                                 double t) const {
    const std::size_t npts = g->size();
    const std::size_t n = cp_.n_species;
    const double eps = ap_.epsilon;
    const double del = ap_.delta;
    const double lam = ap_.lambda;
    const double beta = cp_.beta;

    ScalarField rho = sample(g, t, tgt_.rho);
    ScalarField u0 = sample(g, t, tgt_.u);
    ScalarField th = sample(g, t, tgt_.theta);
    std::vector<ScalarField> r(n), exp_r(n);
    for (std::size_t k = 0; k < n; ++k) {
        r[k] = sample(g, t, tgt_.r[k]);
        exp_r[k] = ScalarField(g);
        auto& e = exp_r[k].values();
        const auto& rv = r[k].values();
        for (std::size_t i = 0; i < npts; ++i) e[i] = std::exp(rv[i]);
    }
    ScalarField rho_n(g);
    {
        auto& v = rho_n.values();
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t i = 0; i < npts; ++i) v[i] += cp_.m[k] * exp_r[k].values()[i];
    }

    auto pointwise = [&](auto&& fn) {
        ScalarField out(g);
        auto& v = out.values();
        for (std::size_t i = 0; i < npts; ++i) v[i] = fn(i);
        return out;
    };
    auto product = [&](const ScalarField& a, const ScalarField& b) {
        ScalarField out(g);
        auto& v = out.values();
        const auto& av = a.values();
        const auto& bv = b.values();
        for (std::size_t i = 0; i < npts; ++i) v[i] = av[i] * bv[i];
        return out;
    };
    auto ddx = [&](const ScalarField& a) {
        ScalarField out = derivative(a, 0);
        out.to_grid();
        return out;
    };

    ForcingFields out;

    // continuity
    {
        ScalarField f = sample(g, t, tgt_.drho_dt);
        axpy_inplace(f, 1.0, ddx(product(rho, u0)));
        ScalarField lap = laplacian_power(rho, 1.0);
        lap.to_grid();
        axpy_inplace(f, -eps, lap);
        out.rho = std::move(f);
    }

    ScalarField dudx = ddx(u0);
    ScalarField drhodx = ddx(rho);
    ScalarField dthdx = ddx(th);

    // momentum (d_t(rho u) form)
    {
        ScalarField du_dt = sample(g, t, tgt_.du_dt);
        ScalarField drho_dt = sample(g, t, tgt_.drho_dt);
        ScalarField f = pointwise([&](std::size_t i) {
            return drho_dt.values()[i] * u0.values()[i] + rho.values()[i] * du_dt.values()[i];
        });
        // + div(rho u u)
        axpy_inplace(f, 1.0, ddx(product(product(rho, u0), u0)));
        // - div(2 rho_n D(u)); in 1D D_11 = du/dx
        axpy_inplace(f, -1.0, ddx(pointwise([&](std::size_t i) {
            return 2.0 * rho_n.values()[i] * dudx.values()[i];
        })));
        // + grad pi
        ScalarField pi = pointwise([&](std::size_t i) {
            double pim = 0.0;
            for (std::size_t k = 0; k < n; ++k) pim += th.values()[i] * exp_r[k].values()[i];
            return cold_pressure(rho.values()[i], cp_) +
                   beta / 3.0 * std::pow(th.values()[i], 4) + pim;
        });
        axpy_inplace(f, 1.0, ddx(pi));
        if (lam > 0.0) {
            ScalarField hyper = laplacian_power(product(rho, u0), static_cast<double>(2 * ap_.s + 1));
            hyper.to_grid();
            axpy_inplace(f, -lam, product(rho, hyper));
            ScalarField dlap = ddx(laplacian_power(rho, static_cast<double>(2 * ap_.s + 1)));
            axpy_inplace(f, -lam, product(rho, dlap));
        }
        if (eps > 0.0) axpy_inplace(f, eps, product(drhodx, dudx));
        out.momentum = VectorField(g);
        out.momentum[0] = std::move(f);
    }

    // thermal (conserved W = rho theta + beta theta^4)
    {
        ScalarField drho_dt = sample(g, t, tgt_.drho_dt);
        ScalarField dth_dt = sample(g, t, tgt_.dtheta_dt);
        ScalarField f = pointwise([&](std::size_t i) {
            const double tv = th.values()[i];
            return drho_dt.values()[i] * tv +
                   (rho.values()[i] + 4.0 * beta * tv * tv * tv) * dth_dt.values()[i];
        });
        // + div(u W)
        ScalarField W = pointwise([&](std::size_t i) {
            const double tv = th.values()[i];
            return rho.values()[i] * tv + beta * std::pow(tv, 4);
        });
        axpy_inplace(f, 1.0, ddx(product(u0, W)));
        // - div(kappa_eps grad theta)
        ScalarField kap = pointwise([&](std::size_t i) {
            return eps / cp_.min_mass() * rho_n.values()[i] +
                   heat_conductivity(rho.values()[i], th.values()[i], cp_);
        });
        axpy_inplace(f, -1.0, ddx(product(kap, dthdx)));
        // + div species heat fluxes
        std::vector<ScalarField> dr(n);
        for (std::size_t k = 0; k < n; ++k) dr[k] = ddx(r[k]);
        for (std::size_t k = 0; k < n; ++k) {
            ScalarField q = pointwise([&](std::size_t i) {
                const double tv = th.values()[i];
                double wsum = 0.0;
                for (std::size_t l = 0; l < n; ++l) wsum += exp_r[l].values()[i];
                const double pim = tv * wsum;
                const double c0 = ms_amplitude(rho.values()[i], tv, cp_);
                double acc = 0.0;
                for (std::size_t l = 0; l < n; ++l) {
                    const double Yk = cp_.m[k] * exp_r[k].values()[i] / rho_n.values()[i];
                    const double Ckl = (k == l) ? 1.0 - Yk : -Yk;
                    const double Dkl = tv * Ckl * exp_r[l].values()[i] / (pim * cp_.m[k]);
                    acc += Dkl * (dr[l].values()[i] + dthdx.values()[i] / tv);
                }
                const double Fk_over_mk = -c0 * acc;
                return tv * Fk_over_mk - del * tv * dr[k].values()[i] -
                       eps * tv * exp_r[k].values()[i] * dr[k].values()[i];
            });
            axpy_inplace(f, 1.0, ddx(q));
        }
        // - sources
        ScalarField lam_heat(g);
        if (lam > 0.0) {
            ScalarField gs = laplacian_power(product(rho, u0), static_cast<double>(ap_.s));
            ScalarField h = ddx(gs);
            lam_heat = pointwise([&](std::size_t i) {
                const double hv = h.values()[i];
                return hv * hv;
            });
        }
        ScalarField lap_s1(g);
        if (lam > 0.0 && eps > 0.0) {
            lap_s1 = laplacian_power(rho, static_cast<double>(ap_.s + 1));
            lap_s1.to_grid();
        }
        ScalarField src = pointwise([&](std::size_t i) {
            const double tv = th.values()[i];
            const double rv = rho.values()[i];
            double pim = 0.0;
            for (std::size_t k = 0; k < n; ++k) pim += tv * exp_r[k].values()[i];
            const double dsq = dudx.values()[i] * dudx.values()[i];
            const double l1 = lap_s1.values()[i];
            return eps / (tv * tv) - eps * std::pow(tv, 5) -
                   (pim + beta / 3.0 * std::pow(tv, 4)) * dudx.values()[i] +
                   2.0 * rho_n.values()[i] * dsq + lam * lam_heat.values()[i] +
                   lam * eps * l1 * l1 +
                   eps * cold_pressure_derivative(rv, cp_) / rv * drhodx.values()[i] *
                       drhodx.values()[i];
        });
        axpy_inplace(f, -1.0, src);
        out.thermal = std::move(f);
    }

    // species (conserved V_k = delta r_k + e^{r_k})
    {
        std::vector<ScalarField> dr(n);
        for (std::size_t k = 0; k < n; ++k) dr[k] = ddx(r[k]);
        for (std::size_t k = 0; k < n; ++k) {
            ScalarField dr_dt = sample(g, t, tgt_.dr_dt[k]);
            ScalarField f = pointwise([&](std::size_t i) {
                return (del + exp_r[k].values()[i]) * dr_dt.values()[i];
            });
            axpy_inplace(f, 1.0, ddx(product(exp_r[k], u0)));
            if (del > 0.0) {
                ScalarField lap_r = laplacian_power(r[k], 1.0);
                lap_r.to_grid();
                axpy_inplace(f, -del, lap_r);
            }
            if (eps > 0.0) {
                ScalarField lap_e = laplacian_power(exp_r[k], 1.0);
                lap_e.to_grid();
                axpy_inplace(f, -eps, lap_e);
            }
            ScalarField ms = pointwise([&](std::size_t i) {
                const double tv = th.values()[i];
                double wsum = 0.0;
                for (std::size_t l = 0; l < n; ++l) wsum += exp_r[l].values()[i];
                const double pim = tv * wsum;
                const double c0 = ms_amplitude(rho.values()[i], tv, cp_);
                double acc = 0.0;
                for (std::size_t l = 0; l < n; ++l) {
                    const double Yk = cp_.m[k] * exp_r[k].values()[i] / rho_n.values()[i];
                    const double Ckl = (k == l) ? 1.0 - Yk : -Yk;
                    const double Dkl = tv * Ckl * exp_r[l].values()[i] / (pim * cp_.m[k]);
                    acc += Dkl * (dr[l].values()[i] + dthdx.values()[i] / tv);
                }
                return c0 * acc;
            });
            axpy_inplace(f, -1.0, ddx(ms));
            if (chem_.kind != ReactionKind::Inert) {
                ScalarField src = pointwise([&](std::size_t i) {
                    ThermoPoint pt;
                    pt.rho = rho.values()[i];
                    pt.theta = th.values()[i];
                    pt.rho_k.resize(n);
                    for (std::size_t l = 0; l < n; ++l)
                        pt.rho_k[l] = cp_.m[l] * exp_r[l].values()[i];
                    const auto omega = production_rates(pt, chem_, cp_);
                    return rho_n.values()[i] * th.values()[i] * omega[k] / cp_.m[k];
                });
                axpy_inplace(f, -1.0, src);
            }
            out.species.push_back(std::move(f));
        }
    }
    return out;
}

StepForcing ManufacturedCase::forcing() const {
    StepForcing f;
    // capture by value: the case object may go out of scope before the run
    auto self = *this;
    f.rho = [self](double t) {
        return restrict_to(self.sample_forcing(self.fine_, t).rho, self.grid_);
    };
    f.momentum = [self](double t) {
        VectorField out(self.grid_);
        out[0] = restrict_to(self.sample_forcing(self.fine_, t).momentum[0], self.grid_);
        return out;
    };
    f.thermal = [self](double t) {
        return restrict_to(self.sample_forcing(self.fine_, t).thermal, self.grid_);
    };
    f.species = [self](double t) {
        auto fine = self.sample_forcing(self.fine_, t);
        std::vector<ScalarField> out;
        out.reserve(fine.species.size());
        for (const auto& s : fine.species) out.push_back(restrict_to(s, self.grid_));
        return out;
    };
    return f;
}

std::vector<double> ManufacturedCase::forcing_residual(double t) const {
    ForcingFields coarse = sample_forcing(grid_, t);
    ForcingFields fine = sample_forcing(fine_, t);
    auto resid = [&](const ScalarField& c, const ScalarField& fnorm) {
        ScalarField d = sub(c, restrict_to(fnorm, grid_));
        return l2_norm(d) / std::max(l2_norm(fnorm), 1.0);
    };
    std::vector<double> out;
    out.push_back(resid(coarse.rho, fine.rho));
    out.push_back(resid(coarse.momentum[0], fine.momentum[0]));
    out.push_back(resid(coarse.thermal, fine.thermal));
    for (std::size_t k = 0; k < coarse.species.size(); ++k)
        out.push_back(resid(coarse.species[k], fine.species[k]));
    return out;
}

double ManufacturedCase::state_error(const MixtureState& state) const {
    MixtureState tstar = sample_targets(grid_, state.time);
    double num = 0.0, den = 0.0;
    auto acc = [&](const ScalarField& a, const ScalarField& b) {
        ScalarField d = sub(a, b);
        const double e = l2_norm(d);
        const double n = l2_norm(b);
        num += e * e;
        den += n * n;
    };
    acc(state.rho, tstar.rho);
    acc(state.u[0], tstar.u[0]);
    acc(state.theta, tstar.theta);
    for (std::size_t k = 0; k < state.r.size(); ++k) acc(state.r[k], tstar.r[k]);
    return std::sqrt(num) / std::sqrt(den);
}

namespace {

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    // least squares slope of log(y) against log(x)
    const std::size_t n = x.size();
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double lx = std::log(x[i]);
        const double ly = std::log(std::max(y[i], 1e-300));
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double d = static_cast<double>(n) * sxx - sx * sx;
    return (static_cast<double>(n) * sxy - sx * sy) / d;
}

}  // namespace

namespace {

// a diverged or aborted run shows up as an infinite error, not an exception
double forced_run_error(const ManufacturedCase& mc) {
    try {
        Stepper stepper(mc.grid(), mc.approx(), mc.physics(), mc.chemistry());
        StepForcing f = mc.forcing();
        MixtureState final = stepper.run(mc.initial_data(), {}, &f);
        return mc.state_error(final);
    } catch (const PositivityError&) {
        return std::numeric_limits<double>::infinity();
    } catch (const StepError&) {
        return std::numeric_limits<double>::infinity();
    }
}

}  // namespace

ConvergenceStudy spatial_study(MmsCaseKind kind, const std::vector<int>& Ms, ApproxParams ap) {
    ConvergenceStudy out;
    for (int M : Ms) {
        ManufacturedCase mc = build_case(kind, M, ap);
        out.levels.push_back(static_cast<double>(M));
        out.errors.push_back(forced_run_error(mc));
    }
    out.observed_order = -fit_slope(out.levels, out.errors);
    return out;
}

ConvergenceStudy temporal_study(MmsCaseKind kind, int M, const std::vector<double>& dts,
                                ApproxParams ap) {
    ConvergenceStudy out;
    for (double dt : dts) {
        ApproxParams a = ap;
        a.dt = dt;
        ManufacturedCase mc = build_case(kind, M, a);
        out.levels.push_back(dt);
        out.errors.push_back(forced_run_error(mc));
    }
    out.observed_order = fit_slope(out.levels, out.errors);
    return out;
}

}  // namespace mixsim

#include "mixsim/chemistry.hpp"

#include <cmath>
#include <stdexcept>

namespace mixsim {

void ReactionModel::validate(const ConstitutiveParams& p) const {
    if (!(omega_bar > 0.0)) throw std::invalid_argument("omega_bar must be strictly positive");
    if (!(kappa_r >= 0.0)) throw std::invalid_argument("kappa_r must be nonnegative");
    if (kind == ReactionKind::Inert) return;
    if (pair_a >= p.n_species || pair_b >= p.n_species)
        throw std::invalid_argument("reaction pair index out of range");
    if (pair_a == pair_b) throw std::invalid_argument("reaction pair must be two distinct species");
    if (p.m[pair_a] != p.m[pair_b])
        throw std::invalid_argument("reversible_pair requires equal molar masses");
}

std::vector<double> production_rates(const ThermoPoint& pt, const ReactionModel& model,
                                     const ConstitutiveParams& p) {
    if (!(pt.theta > 0.0)) throw std::domain_error("production_rates requires theta > 0");
    std::vector<double> omega(p.n_species, 0.0);
    if (model.kind == ReactionKind::Inert) return omega;

    const std::size_t a = model.pair_a;
    const std::size_t b = model.pair_b;
    const double ra = pt.rho_k.at(a);
    const double rb = pt.rho_k.at(b);

    double wa;
    if (ra <= 0.0 && rb <= 0.0) {
        wa = 0.0;
    } else if (ra <= 0.0) {
        wa = model.omega_bar;   // g_a -> -inf: full production of the absent species
    } else if (rb <= 0.0) {
        wa = -model.omega_bar;
    } else {
        const double ga = gibbs(pt.theta, ra, a, p);
        const double gb = gibbs(pt.theta, rb, b, p);
        wa = model.omega_bar * std::tanh(-model.kappa_r * (ga - gb) / pt.theta);
    }
    omega[a] = wa;
    omega[b] = -wa;
    return omega;
}

}  // namespace mixsim

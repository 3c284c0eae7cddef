#include "mixsim/constitutive.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mixsim {

namespace {

double xlogx(double x) {
    return (x > 0.0) ? x * std::log(x) : 0.0;
}

}  // namespace

double ConstitutiveParams::min_mass() const {
    double mn = m.empty() ? 0.0 : m[0];
    for (double v : m) mn = std::min(mn, v);
    return mn;
}

void ConstitutiveParams::validate() const {
    if (n_species == 0) throw std::invalid_argument("n_species must be positive");
    if (m.size() != n_species) throw std::invalid_argument("molar mass list length must equal n_species");
    for (double v : m)
        if (!(v > 0.0)) throw std::invalid_argument("molar masses must be strictly positive");
    if (!(gamma_minus > 5.0)) throw std::invalid_argument("gamma_minus > 5 required");
    if (!(gamma_plus > 3.0)) throw std::invalid_argument("gamma_plus > 3 required");
    if (!(gamma_minus > (5.0 * gamma_plus - 3.0) / (gamma_plus - 3.0)))
        throw std::invalid_argument("gamma_minus > (5*gamma_plus - 3)/(gamma_plus - 3) required");
    if (!(c_cold > 0.0)) throw std::invalid_argument("c_cold must be strictly positive");
    if (!(beta > 0.0)) throw std::invalid_argument("beta must be strictly positive");
    if (!(B >= 8.0)) throw std::invalid_argument("B >= 8 required");
    if (!(kappa0 > 0.0)) throw std::invalid_argument("kappa0 must be strictly positive");
    if (!(C0_bar > 0.0)) throw std::invalid_argument("C0_bar must be strictly positive");
    if (!(omega_bar > 0.0)) throw std::invalid_argument("omega_bar must be strictly positive");
    if (!(kappa_r >= 0.0)) throw std::invalid_argument("kappa_r must be nonnegative");
}

void ThermoPoint::validate(std::size_t n_species) const {
    if (!(rho > 0.0)) throw std::domain_error("rho must be strictly positive");
    if (!(theta > 0.0)) throw std::domain_error("theta must be strictly positive");
    if (rho_k.size() != n_species) throw std::domain_error("species density count mismatch");
    for (double v : rho_k)
        if (!(v >= 0.0)) throw std::domain_error("species densities must be nonnegative");
}

std::vector<double> ThermoPoint::mass_fractions() const {
    double tot = 0.0;
    for (double v : rho_k) tot += v;
    if (!(tot > 0.0)) throw std::domain_error("total species density vanishes");
    std::vector<double> Y(rho_k.size());
    for (std::size_t k = 0; k < rho_k.size(); ++k) Y[k] = rho_k[k] / tot;
    return Y;
}

double cold_pressure(double rho, const ConstitutiveParams& p) {
    if (!(rho > 0.0)) throw std::domain_error("cold_pressure requires rho > 0");
    const double c = p.c_cold;
    if (rho <= 1.0) {
        // int_1^rho c y^(-gm-1) dy = (c/gm)(1 - rho^-gm)
        return c / p.gamma_minus * (1.0 - std::pow(rho, -p.gamma_minus));
    }
    // int_1^rho c y^(gp-1) dy = (c/gp)(rho^gp - 1)
    return c / p.gamma_plus * (std::pow(rho, p.gamma_plus) - 1.0);
}

double cold_pressure_derivative(double rho, const ConstitutiveParams& p) {
    if (!(rho > 0.0)) throw std::domain_error("cold_pressure_derivative requires rho > 0");
    const double c = p.c_cold;
    if (rho <= 1.0) return c * std::pow(rho, -p.gamma_minus - 1.0);
    return c * std::pow(rho, p.gamma_plus - 1.0);
}

double cold_energy(double rho, const ConstitutiveParams& p) {
    if (!(rho > 0.0)) throw std::domain_error("cold_energy requires rho > 0");
    const double c = p.c_cold;
    const double gm = p.gamma_minus;
    const double gp = p.gamma_plus;
    if (rho <= 1.0) {
        // antiderivative of pi_c(y)/y^2 = (c/gm)(y^-2 - y^(-gm-2)):
        //   F(y) = (c/gm)(-1/y + y^(-gm-1)/(gm+1)),  e_c = F(rho) - F(1)
        const double F = (c / gm) * (-1.0 / rho + std::pow(rho, -gm - 1.0) / (gm + 1.0));
        const double F1 = (c / gm) * (-1.0 + 1.0 / (gm + 1.0));
        return F - F1;
    }
    // antiderivative of pi_c(y)/y^2 = (c/gp)(y^(gp-2) - y^-2):
    //   G(y) = (c/gp)(y^(gp-1)/(gp-1) + 1/y),  e_c = G(rho) - G(1)
    const double G = (c / gp) * (std::pow(rho, gp - 1.0) / (gp - 1.0) + 1.0 / rho);
    const double G1 = (c / gp) * (1.0 / (gp - 1.0) + 1.0);
    return G - G1;
}

double molecular_pressure(double theta, const std::vector<double>& rho_k,
                          const ConstitutiveParams& p) {
    if (!(theta >= 0.0)) throw std::domain_error("molecular_pressure requires theta >= 0");
    if (rho_k.size() != p.n_species) throw std::domain_error("species density count mismatch");
    double s = 0.0;
    for (std::size_t k = 0; k < rho_k.size(); ++k) {
        if (!(rho_k[k] >= 0.0)) throw std::domain_error("species densities must be nonnegative");
        s += rho_k[k] / p.m[k];
    }
    return theta * s;
}

double total_pressure(const ThermoPoint& pt, const ConstitutiveParams& p) {
    pt.validate(p.n_species);
    return cold_pressure(pt.rho, p) + p.beta / 3.0 * std::pow(pt.theta, 4) +
           molecular_pressure(pt.theta, pt.rho_k, p);
}

double internal_energy(const ThermoPoint& pt, const ConstitutiveParams& p) {
    pt.validate(p.n_species);
    return pt.theta + p.beta * std::pow(pt.theta, 4) / pt.rho + cold_energy(pt.rho, p);
}

double specific_entropy_density(const ThermoPoint& pt, const ConstitutiveParams& p) {
    if (!(pt.theta > 0.0)) throw std::domain_error("entropy requires theta > 0");
    double s = pt.rho * std::log(pt.theta);
    for (std::size_t k = 0; k < pt.rho_k.size(); ++k) s -= xlogx(pt.rho_k[k] / p.m[k]);
    s += 4.0 * p.beta / 3.0 * std::pow(pt.theta, 3);
    return s;
}

double gibbs(double theta, double rho_k, std::size_t k, const ConstitutiveParams& p) {
    if (!(theta > 0.0)) throw std::domain_error("gibbs requires theta > 0");
    if (!(rho_k > 0.0)) throw std::domain_error("gibbs requires rho_k > 0");
    const double mk = p.m.at(k);
    const double cpk = 1.0 + 1.0 / mk;
    return cpk * theta - theta * std::log(theta) + theta / mk * std::log(rho_k / mk);
}

double enthalpy(double theta, std::size_t k, const ConstitutiveParams& p) {
    if (!(theta >= 0.0)) throw std::domain_error("enthalpy requires theta >= 0");
    return (1.0 + 1.0 / p.m.at(k)) * theta;
}

double heat_conductivity(double rho, double theta, const ConstitutiveParams& p) {
    if (!(rho >= 0.0) || !(theta >= 0.0))
        throw std::domain_error("heat_conductivity requires nonnegative arguments");
    return p.kappa0 + rho + rho * theta * theta + p.beta * std::pow(theta, p.B);
}

double ms_amplitude(double rho, double theta, const ConstitutiveParams& p) {
    if (!(rho >= 0.0) || !(theta >= 0.0))
        throw std::domain_error("ms_amplitude requires nonnegative arguments");
    return p.C0_bar * rho * (1.0 + theta);
}

}  // namespace mixsim

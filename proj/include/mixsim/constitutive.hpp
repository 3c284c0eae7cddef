#pragma once

// Thermodynamic closures for the reacting mixture: cold (barotropic) pressure
// singular near vacuum, Boyle-law molecular pressure, radiative contributions,
// internal energy, entropy, Gibbs functions, and the transport coefficients.
// Everything here is a pure function of its arguments.

#include <cstddef>
#include <vector>

namespace mixsim {

struct ConstitutiveParams {
    std::size_t n_species = 0;
    std::vector<double> m;      // molar masses, all > 0
    double gamma_minus = 10.0;  // cold-pressure exponent below rho = 1, > 5
    double gamma_plus = 6.0;    // cold-pressure exponent above rho = 1, > 3
    double c_cold = 1.0;        // shared branch amplitude; pi_c' continuous at rho = 1
    double beta = 0.1;          // radiation constant, > 0
    double B = 8.0;             // conductivity exponent, >= 8
    double kappa0 = 0.5;        // base conductivity, > 0
    double C0_bar = 0.5;        // diffusion amplitude, > 0
    double omega_bar = 0.5;     // production-rate saturation, > 0
    double kappa_r = 1.0;       // reaction rate constant, >= 0

    double min_mass() const;

    // Throws std::invalid_argument naming the violated constraint.
    void validate() const;
};

// One thermodynamic state: total density, temperature, species densities.
struct ThermoPoint {
    double rho = 1.0;                // > 0
    double theta = 1.0;              // > 0
    std::vector<double> rho_k;       // >= 0 componentwise

    void validate(std::size_t n_species) const;
    std::vector<double> mass_fractions() const;  // Y_k = rho_k / sum(rho_l)
};

// Cold pressure pi_c, normalized so pi_c(1) = 0. Strictly increasing,
// -> -inf as rho -> 0+ and +inf as rho -> inf.
double cold_pressure(double rho, const ConstitutiveParams& p);

// pi_c'(rho) = c rho^(-gm-1) for rho <= 1, c rho^(gp-1) for rho > 1.
double cold_pressure_derivative(double rho, const ConstitutiveParams& p);

// Cold specific energy: rho^2 e_c'(rho) = pi_c(rho), normalized so that
// inf e_c = 0 (attained at rho = 1, the unique root of pi_c). Evaluated from
// the closed-form branch antiderivatives; no quadrature.
double cold_energy(double rho, const ConstitutiveParams& p);

// Boyle law: pi_m = sum_k theta rho_k / m_k.
double molecular_pressure(double theta, const std::vector<double>& rho_k,
                          const ConstitutiveParams& p);

// pi = pi_c(rho) + beta/3 theta^4 + pi_m.
double total_pressure(const ThermoPoint& pt, const ConstitutiveParams& p);

// Specific internal energy e = theta + beta theta^4 / rho + e_c(rho).
double internal_energy(const ThermoPoint& pt, const ConstitutiveParams& p);

// Entropy per unit volume:
//   rho s = rho log theta - sum_k (rho_k/m_k) log(rho_k/m_k) + (4 beta/3) theta^3,
// with x log x extended by 0 at x = 0.
double specific_entropy_density(const ThermoPoint& pt, const ConstitutiveParams& p);

// Gibbs function of species k:
//   g_k = c_pk theta - theta log theta + (theta/m_k) log(rho_k/m_k),
// c_pk = 1 + 1/m_k. Requires rho_k > 0 (g_k -> -inf as rho_k -> 0).
double gibbs(double theta, double rho_k, std::size_t k, const ConstitutiveParams& p);

// h_k = c_pk theta.
double enthalpy(double theta, std::size_t k, const ConstitutiveParams& p);

// kappa = kappa0 + rho + rho theta^2 + beta theta^B.
double heat_conductivity(double rho, double theta, const ConstitutiveParams& p);

// Maxwell-Stefan amplitude C0(rho,theta) = C0_bar rho (1+theta).
double ms_amplitude(double rho, double theta, const ConstitutiveParams& p);

}  // namespace mixsim

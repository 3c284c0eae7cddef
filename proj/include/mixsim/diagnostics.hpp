#pragma once

// Per-step audit of the functionals the analysis of the continuous system
// tracks: energy components, entropy and its production rate, the
// Bresch-Desjardins functional, mass/species ledgers, and positivity minima.
// Every field is a pure function of a state snapshot (plus the step record
// for the two step-coupled entries), so rows can be recomputed exactly.

#include <cstddef>
#include <vector>

#include "mixsim/chemistry.hpp"
#include "mixsim/constitutive.hpp"
#include "mixsim/solver.hpp"
#include "mixsim/spectral.hpp"

namespace mixsim {

struct DiagnosticsReport {
    double time = 0.0;
    double total_mass = 0.0;
    double species_ledger = 0.0;   // delta sum_k m_k int r_k + sum_k int m_k e^{r_k}
    double E_total = 0.0;
    double E_kin = 0.0;
    double E_int = 0.0;            // int rho theta
    double E_rad = 0.0;            // int beta theta^4
    double E_cold = 0.0;           // int rho e_c(rho)
    double E_lambda = 0.0;         // (lambda/2) int |grad^{2s+1} rho|^2
    double entropy = 0.0;          // int rho s
    double sigma_total = 0.0;
    double sigma_min = 0.0;        // pointwise minimum (floored points excluded)
    double bd = 0.0;               // Bresch-Desjardins functional
    double min_rho = 0.0;
    double min_theta = 0.0;
    double min_rho_k = 0.0;
    double sum_rhok_dev = 0.0;     // max |sum_k rho_k - rho| / rho
    int picard_iters = 0;
    double energy_residual = 0.0;
};

struct DiagnosticsOptions {
    double bd_r = 2.0;  // the constant r > 1 in the B-D functional
};

// Energy components of 1/2 rho|u|^2 + (lambda/2)|grad^{2s+1} rho|^2 + rho e.
struct EnergyBreakdown {
    double kinetic, internal_molecular, radiative, cold, lambda_reg;
    double total() const {
        return kinetic + internal_molecular + radiative + cold + lambda_reg;
    }
};

EnergyBreakdown total_energy(const MixtureState& state, const ApproxParams& ap,
                             const ConstitutiveParams& cp);

// Pointwise entropy production
//   sigma = 2 rho_n |D(u)|^2/theta + kappa_eps |grad theta|^2/theta^2
//           - sum_k (F_k/m_k) . grad log p_k - sum_k rho_n g_k omega_k,
// with the solver's viscosity rho_n and conductivity kappa_eps. Returns the
// integral and the pointwise minimum; points with a species at the r_min
// floor are excluded from the minimum and counted separately.
struct EntropyProduction {
    double total;
    double min;
    std::size_t masked_points;
};

EntropyProduction entropy_production(const MixtureState& state, const ApproxParams& ap,
                                     const ConstitutiveParams& cp, const ReactionModel& chem);

// int [ 1/2 rho|u + 2 grad log rho|^2 + (r-1)/2 rho|u|^2
//       + (r lambda/2)|grad Lap^s rho|^2 + r rho e_c(rho) ], r > 1.
double bd_functional(const MixtureState& state, const ApproxParams& ap,
                     const ConstitutiveParams& cp, double r = 2.0);

// |E_next - E_prev - dt (eps int theta^-2 - eps int theta^5)| / E_next with
// the source integral the step actually added.
double energy_residual(double E_prev, double E_next, const StepRecord& rec);

// Mass/species ledgers and positivity minima (the state-only report fields).
DiagnosticsReport ledgers_and_positivity(const MixtureState& state, const ApproxParams& ap,
                                         const ConstitutiveParams& cp);

// Full report for one snapshot. prev_total_energy < 0 marks the first row
// (no residual available).
DiagnosticsReport assemble_report(const MixtureState& state, const ApproxParams& ap,
                                  const ConstitutiveParams& cp, const ReactionModel& chem,
                                  const StepRecord& rec, double prev_total_energy,
                                  const DiagnosticsOptions& opt = {});

}  // namespace mixsim

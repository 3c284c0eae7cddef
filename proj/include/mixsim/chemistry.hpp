#pragma once

// Species production rates. The built-in models are structurally safe by
// construction: rates sum to zero, saturate at omega_bar, are nonnegative on
// depleted species, and dissipate Gibbs energy (second law).

#include <cstddef>
#include <vector>

#include "mixsim/constitutive.hpp"

namespace mixsim {

enum class ReactionKind { Inert, ReversiblePair };

struct ReactionModel {
    ReactionKind kind = ReactionKind::Inert;
    std::size_t pair_a = 0;   // species indices, ReversiblePair only
    std::size_t pair_b = 1;
    double kappa_r = 1.0;     // rate constant, >= 0
    double omega_bar = 0.5;   // saturation bound, > 0

    // ReversiblePair requires distinct in-range indices with equal molar
    // masses (mass bookkeeping without stoichiometric coefficients).
    void validate(const ConstitutiveParams& p) const;
};

// omega_k(theta, rho_1..rho_n). Inert: all zeros. ReversiblePair (a,b):
//   omega_a = omega_bar * tanh(-kappa_r (g_a - g_b)/theta), omega_b = -omega_a.
// tanh saturation keeps the rate Lipschitz and bounded; the Gibbs-difference
// sign makes -sum_k g_k omega_k >= 0 and pushes depleted species up.
std::vector<double> production_rates(const ThermoPoint& pt, const ReactionModel& model,
                                     const ConstitutiveParams& p);

}  // namespace mixsim

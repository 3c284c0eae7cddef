#pragma once

// Time integration of the regularized mixture system on the torus:
//
//   d_t rho + div(rho u) = eps Lap(rho)                          (pointwise)
//   d_t(rho u) = -div(rho u x u) + div(2 rho_n D(u)) - grad pi
//                + lambda rho Lap^{2s+1}(rho u)
//                + lambda rho grad Lap^{2s+1} rho
//                - eps (grad rho . grad) u                       (Galerkin)
//   d_t(rho theta + beta theta^4) + div(u (rho theta + beta theta^4))
//       = div(kappa_eps grad theta)
//         - sum_k div(theta F_k/m_k - delta theta grad r_k
//                     - eps theta e^{r_k} grad r_k)
//         + eps/theta^2 - eps theta^5 - (pi_m + beta/3 theta^4) div u
//         + 2 rho_n |D(u)|^2 + lambda |Lap^s grad(rho u)|^2
//         + lambda eps |Lap^{s+1} rho|^2
//         + eps (pi_c'(rho)/rho) |grad rho|^2                    (pointwise)
//   d_t(delta r_k + e^{r_k}) = -div(e^{r_k} u)
//         + div((delta + eps e^{r_k}) grad r_k)
//         + div(C0 sum_l Dhat_kl (grad r_l + grad log theta))
//         + rho_n theta omega_k / m_k                            (Galerkin)
//
// with rho_n = sum_k m_k e^{r_k} and kappa_eps = (eps/min m) rho_n + kappa.
//
// Scheme: first-order IMEX. Constant-coefficient stiff parts (the eps
// Laplacians and per-step maximal bounds on the variable diffusivities of
// conduction, viscosity, Maxwell-Stefan diffusion, and the lambda
// hyperdiffusion) are integrated exactly by Fourier integrating factors; the
// variable-coefficient remainders, transport, and sources are explicit. Each
// step runs an inner Picard iteration over the coupled sub-updates
// (rho, theta, u, r in that order) with the remaining unknowns frozen.
// The conserved quantities rho*theta + beta*theta^4 and delta*r_k + e^{r_k}
// are updated in conservation form and the primitive variables recovered by
// pointwise Newton inversion of their monotone defining maps, so the discrete
// mass, momentum, species, and energy ledgers close to round-off plus O(dt^2)
// per step.

#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mixsim/chemistry.hpp"
#include "mixsim/constitutive.hpp"
#include "mixsim/spectral.hpp"

namespace mixsim {

struct ApproxParams {
    double epsilon = 1e-3;   // parabolic regularization, >= 0
    double delta = 0.0;      // species relaxation, >= 0
    double lambda = 1e-6;    // high-order density/momentum smoothing, >= 0
    int s = 1;               // 2s+1 >= 3 required when lambda > 0
    int N = 0;               // Galerkin truncation; 0 means the dealias cut
    double dt = 1e-3;
    double t_end = 0.1;
    double picard_tol = 1e-9;
    int picard_max = 30;
    double r_min = -40.0;    // entropy-variable floor
    int retry_budget = 3;    // dt-halving retries on step rejection

    void validate(const SpectralGrid& grid) const;
    int truncation(const SpectralGrid& grid) const;
};

struct MixtureState {
    double time = 0.0;
    ScalarField rho;
    VectorField u;
    ScalarField theta;
    std::vector<ScalarField> r;  // entropy variables, one per species
};

struct InitialData {
    ScalarField rho0;                  // strictly positive minimum
    VectorField m0;                    // momentum
    ScalarField theta0;                // within positive bounds
    std::vector<ScalarField> rho_k0;   // nonnegative, sum to rho0

    void validate() const;
};

// Per-step bookkeeping consumed by the diagnostics.
struct StepRecord {
    bool converged = false;
    int picard_iters = 0;
    double dt_used = 0.0;
    // integral of (eps/theta^2 - eps theta^5) actually added to the thermal
    // budget this step, per unit time
    double eps_source_integral = 0.0;
    std::size_t floored_points = 0;  // entropy variables clipped at r_min
};

// MMS hooks: optional forcing added to the right-hand side of each equation,
// evaluated at the step's start time.
struct StepForcing {
    std::function<ScalarField(double)> rho;
    std::function<VectorField(double)> momentum;
    std::function<ScalarField(double)> thermal;
    std::function<std::vector<ScalarField>(double)> species;
};

class PositivityError : public std::runtime_error {
public:
    PositivityError(const std::string& invariant, double time, std::size_t grid_index,
                    double value);
    std::string invariant;
    double time;
    std::size_t grid_index;
    double value;
};

class StepError : public std::runtime_error {
public:
    StepError(const std::string& what, double time);
    double time;
};

class Stepper {
public:
    Stepper(GridPtr grid, ApproxParams ap, ConstitutiveParams cp, ReactionModel chem);

    const ApproxParams& approx() const { return ap_; }
    const ConstitutiveParams& physics() const { return cp_; }
    const ReactionModel& chemistry() const { return chem_; }
    GridPtr grid() const { return grid_; }

    // Initial state: u0 solves the weighted projection rho0 u0 = P_N m0,
    // r_k0 = log(rho_k0/m_k) floored at r_min.
    MixtureState make_initial_state(const InitialData& init) const;

    // One coupled step of size dt. On Picard convergence the state is
    // advanced and record.converged is true; otherwise the state is left
    // untouched. Positivity violations throw PositivityError.
    StepRecord picard_coupled_step(MixtureState& state, double dt,
                                   const StepForcing* forcing = nullptr) const;

    // Sub-updates, exposed for verification. Frozen arguments are the current
    // Picard iterate; *_old arguments are the start-of-step fields.
    ScalarField step_continuity(const ScalarField& rho_old, const VectorField& u_frozen,
                                double dt, const ScalarField* forcing = nullptr) const;

    ScalarField step_thermal(const ScalarField& rho_old, const ScalarField& theta_old,
                             const ScalarField& rho_new, const VectorField& u_frozen,
                             const ScalarField& theta_frozen,
                             const std::vector<ScalarField>& r_frozen, double dt,
                             const ScalarField* forcing = nullptr,
                             double* eps_source_out = nullptr) const;

    VectorField step_momentum(const ScalarField& rho_old, const VectorField& u_old,
                              const ScalarField& rho_new, const VectorField& u_frozen,
                              const ScalarField& theta_new,
                              const std::vector<ScalarField>& r_frozen, double dt,
                              const VectorField* forcing = nullptr) const;

    std::vector<ScalarField> step_species(const std::vector<ScalarField>& r_old,
                                          const ScalarField& rho_new,
                                          const VectorField& u_frozen,
                                          const ScalarField& theta_new,
                                          const std::vector<ScalarField>& r_frozen,
                                          double dt,
                                          const std::vector<ScalarField>* forcing = nullptr,
                                          std::size_t* floored_out = nullptr) const;

    // Steps to t_end, invoking the hook after the initial state and after
    // every accepted step. Rejected steps are retried with halved dt up to
    // the retry budget, then the run aborts with StepError.
    using StepHook = std::function<void(const MixtureState&, const StepRecord&)>;
    MixtureState run(const InitialData& init, const StepHook& hook = {},
                     const StepForcing* forcing = nullptr) const;

    // sum_k m_k e^{r_k}
    ScalarField rho_n_field(const std::vector<ScalarField>& r) const;

    // Weighted Galerkin inversion: find band-limited u with P_N(rho u) = m.
    ScalarField mass_solve(const ScalarField& rho, const ScalarField& m) const;

private:
    GridPtr grid_;
    ApproxParams ap_;
    ConstitutiveParams cp_;
    ReactionModel chem_;
    int N_;
};

}  // namespace mixsim

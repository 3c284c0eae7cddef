#pragma once

// Manufactured-solution harness. Closed-form low-mode targets are injected
// into the full solver through per-equation forcing computed by evaluating
// each equation's left-hand side with the discrete operators on a doubled
// grid (derivatives are exact there; only far-tail aliasing of the
// non-polynomial compositions remains). Convergence studies then measure the
// solver's spatial truncation error and temporal order against the targets.

#include <functional>
#include <string>
#include <vector>

#include "mixsim/chemistry.hpp"
#include "mixsim/constitutive.hpp"
#include "mixsim/solver.hpp"
#include "mixsim/spectral.hpp"

namespace mixsim {

enum class MmsCaseKind { Continuity, SpeciesSingle, CoupledTwoSpecies };

MmsCaseKind mms_case_from_name(const std::string& name);

// 1D closed-form targets (t,x) -> value with hand-coded time derivatives.
struct Target1D {
    std::function<double(double, double)> rho, u, theta;
    std::function<double(double, double)> drho_dt, du_dt, dtheta_dt;
    std::vector<std::function<double(double, double)>> r, dr_dt;
};

class ManufacturedCase {
public:
    ManufacturedCase(MmsCaseKind kind, int M, ApproxParams ap, ConstitutiveParams cp,
                     ReactionModel chem);

    GridPtr grid() const { return grid_; }
    const ApproxParams& approx() const { return ap_; }
    const ConstitutiveParams& physics() const { return cp_; }
    const ReactionModel& chemistry() const { return chem_; }

    MixtureState target_state(double t) const;   // targets sampled on the run grid
    InitialData initial_data() const;
    StepForcing forcing() const;                  // built on the doubled grid

    // Spatial consistency defect of the forced discrete system at the target:
    // per-equation L2 norm of [forcing at this resolution] - [forcing from the
    // doubled grid], normalized by the forcing size. Decays spectrally.
    std::vector<double> forcing_residual(double t) const;

    // Combined relative L2 error of (rho, u, theta, r_k) against the target.
    double state_error(const MixtureState& state) const;

private:
    struct ForcingFields {
        ScalarField rho;
        VectorField momentum;
        ScalarField thermal;
        std::vector<ScalarField> species;
    };
    ForcingFields sample_forcing(const GridPtr& g, double t) const;
    MixtureState sample_targets(const GridPtr& g, double t) const;

    MmsCaseKind kind_;
    GridPtr grid_;
    GridPtr fine_;
    ApproxParams ap_;
    ConstitutiveParams cp_;
    ReactionModel chem_;
    Target1D tgt_;
};

ManufacturedCase build_case(MmsCaseKind kind, int M, ApproxParams ap);

struct ConvergenceStudy {
    std::vector<double> levels;   // M values or dt values
    std::vector<double> errors;
    double observed_order = 0.0;  // least-squares slope in log-log
};

// Runs the forced solver on M in Ms (fixed small dt) and reports final-state
// errors; for smooth targets the error collapses spectrally in M.
ConvergenceStudy spatial_study(MmsCaseKind kind, const std::vector<int>& Ms,
                               ApproxParams ap);

// Runs the forced solver at fixed M over the listed dt values.
ConvergenceStudy temporal_study(MmsCaseKind kind, int M, const std::vector<double>& dts,
                                ApproxParams ap);

}  // namespace mixsim

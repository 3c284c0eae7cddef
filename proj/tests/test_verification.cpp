#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "mixsim/verification.hpp"

using namespace mixsim;

namespace {

ApproxParams mms_params() {
    ApproxParams ap;
    ap.epsilon = 1e-3;
    ap.delta = 0.0;
    ap.lambda = 1e-6;
    ap.s = 1;
    ap.dt = 1e-4;
    ap.t_end = 0.02;
    return ap;
}

}  // namespace

TEST_CASE("case names resolve") {
    CHECK(mms_case_from_name("continuity") == MmsCaseKind::Continuity);
    CHECK(mms_case_from_name("coupled2") == MmsCaseKind::CoupledTwoSpecies);
    CHECK(mms_case_from_name("coupled_two_species") == MmsCaseKind::CoupledTwoSpecies);
    CHECK_THROWS_AS(mms_case_from_name("bogus"), std::invalid_argument);
}

TEST_CASE("targets are positive and consistent") {
    ManufacturedCase mc = build_case(MmsCaseKind::CoupledTwoSpecies, 32, mms_params());
    for (double t : {0.0, 0.05, 0.1}) {
        MixtureState st = mc.target_state(t);
        for (double v : st.rho.values()) CHECK(v > 0.0);
        for (double v : st.theta.values()) CHECK(v > 0.0);
        // the two species sum to the total density by construction
        for (std::size_t i = 0; i < st.rho.values().size(); ++i) {
            const double sum = std::exp(st.r[0].values()[i]) + std::exp(st.r[1].values()[i]);
            CHECK(sum == doctest::Approx(st.rho.values()[i]).epsilon(1e-12));
        }
    }
}

TEST_CASE("forcing consistency: defect against the doubled grid decays spectrally") {
    // at M = 64 the forcing evaluated on the run grid agrees with the
    // restriction from the doubled grid to round-off
    for (MmsCaseKind kind :
         {MmsCaseKind::Continuity, MmsCaseKind::SpeciesSingle, MmsCaseKind::CoupledTwoSpecies}) {
        ManufacturedCase mc = build_case(kind, 64, mms_params());
        for (double t : {0.0, 0.01}) {
            const auto resid = mc.forcing_residual(t);
            for (double r : resid) CHECK(r <= 1e-10);
        }
    }
    // and is visibly worse on a coarse grid (the quantity the studies measure)
    ManufacturedCase coarse = build_case(MmsCaseKind::CoupledTwoSpecies, 8, mms_params());
    const auto resid = coarse.forcing_residual(0.0);
    double worst = 0.0;
    for (double r : resid) worst = std::max(worst, r);
    CHECK(worst > 1e-8);
}

TEST_CASE("single-species forcing reduces to the density forcing over the molar mass") {
    ManufacturedCase mc = build_case(MmsCaseKind::SpeciesSingle, 32, mms_params());
    StepForcing f = mc.forcing();
    ScalarField f_rho = f.rho(0.01);
    std::vector<ScalarField> f_v = f.species(0.01);
    REQUIRE(f_v.size() == 1);
    // m_1 = 1 here, so the two forcings coincide (no Maxwell-Stefan flux for n=1)
    ScalarField d = sub(f_v[0], f_rho);
    CHECK(l2_norm(d) <= 1e-10 * std::max(l2_norm(f_rho), 1.0));
}

TEST_CASE("forced solver follows the manufactured target") {
    ApproxParams ap = mms_params();
    ManufacturedCase mc = build_case(MmsCaseKind::Continuity, 32, ap);
    Stepper stepper(mc.grid(), mc.approx(), mc.physics(), mc.chemistry());
    StepForcing f = mc.forcing();
    MixtureState final = stepper.run(mc.initial_data(), {}, &f);
    CHECK(final.time == doctest::Approx(ap.t_end));
    CHECK(mc.state_error(final) < 1e-5);
}

TEST_CASE("spatial error collapses under grid refinement") {
    ApproxParams ap = mms_params();
    ap.dt = 1e-5;
    ConvergenceStudy st = spatial_study(MmsCaseKind::CoupledTwoSpecies, {8, 16, 32}, ap);
    REQUIRE(st.errors.size() == 3);
    // spectral decay: over a decade per doubling, two decades across the sweep
    CHECK(st.errors[1] < st.errors[0] / 10.0);
    CHECK(st.errors[2] < st.errors[0] / 100.0);

    // the single-species case is nearly linear, so only the first doubling
    // rises above the temporal floor at this dt
    ConvergenceStudy s1 = spatial_study(MmsCaseKind::SpeciesSingle, {8, 16}, ap);
    CHECK(s1.errors[1] < s1.errors[0] / 10.0);
}

TEST_CASE("temporal order is first order") {
    ApproxParams ap = mms_params();
    ap.t_end = 0.05;
    ConvergenceStudy st = temporal_study(MmsCaseKind::Continuity, 32, {4e-3, 2e-3, 1e-3}, ap);
    CHECK(st.observed_order >= 0.9);
    CHECK(st.observed_order <= 1.5);
}

TEST_CASE("temporal order holds with the regularizations switched off") {
    ApproxParams ap = mms_params();
    ap.epsilon = 0.0;
    ap.lambda = 0.0;
    ap.t_end = 0.05;
    ConvergenceStudy st = temporal_study(MmsCaseKind::SpeciesSingle, 32, {4e-3, 2e-3, 1e-3}, ap);
    CHECK(st.observed_order >= 0.9);
    CHECK(st.observed_order <= 1.5);
}

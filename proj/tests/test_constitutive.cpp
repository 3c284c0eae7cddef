#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <random>

#include "mixsim/constitutive.hpp"

using namespace mixsim;

namespace {

ConstitutiveParams two_species() {
    ConstitutiveParams p;
    p.n_species = 2;
    p.m = {1.0, 1.0};
    return p;
}

// 100 log-spaced densities in [1e-2, 1e2]
std::vector<double> density_sweep() {
    std::vector<double> out;
    for (int i = 0; i < 100; ++i)
        out.push_back(std::pow(10.0, -2.0 + 4.0 * i / 99.0));
    return out;
}

}  // namespace

TEST_CASE("parameter validation enforces the exponent constraints") {
    ConstitutiveParams p = two_species();
    CHECK_NOTHROW(p.validate());

    SUBCASE("gamma_minus <= 5 rejected") {
        p.gamma_minus = 4.0;
        CHECK_THROWS_WITH_AS(p.validate(), "gamma_minus > 5 required", std::invalid_argument);
    }
    SUBCASE("gamma_plus <= 3 rejected") {
        p.gamma_plus = 3.0;
        CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    }
    SUBCASE("coupled exponent constraint rejected") {
        // gamma_plus = 4 forces gamma_minus > 17
        p.gamma_plus = 4.0;
        p.gamma_minus = 10.0;
        CHECK_THROWS_AS(p.validate(), std::invalid_argument);
        p.gamma_minus = 17.5;
        CHECK_NOTHROW(p.validate());
    }
    SUBCASE("B < 8 rejected") {
        p.B = 6.0;
        CHECK_THROWS_WITH_AS(p.validate(), "B >= 8 required", std::invalid_argument);
    }
    SUBCASE("nonpositive mass rejected") {
        p.m[1] = 0.0;
        CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    }
}

TEST_CASE("cold pressure closed forms") {
    ConstitutiveParams p = two_species();
    p.c_cold = 1.0;

    CHECK(cold_pressure(1.0, p) == 0.0);

    SUBCASE("upper branch, gamma_plus = 4") {
        // int_1^2 y^3 dy = (2^4 - 1)/4
        ConstitutiveParams q = p;
        q.gamma_plus = 4.0;
        q.gamma_minus = 18.0;
        CHECK(cold_pressure(2.0, q) == doctest::Approx(3.75).epsilon(1e-14));
        CHECK(cold_pressure_derivative(2.0, q) == doctest::Approx(8.0).epsilon(1e-14));
    }
    SUBCASE("lower branch, gamma_minus = 6") {
        ConstitutiveParams q = p;
        q.gamma_minus = 6.0;
        q.gamma_plus = 6.0;
        CHECK(cold_pressure(0.5, q) == doctest::Approx(-10.5).epsilon(1e-14));
        CHECK(cold_pressure_derivative(0.5, q) == doctest::Approx(128.0).epsilon(1e-14));
    }
    SUBCASE("derivative continuous at rho = 1") {
        CHECK(cold_pressure_derivative(1.0, p) == doctest::Approx(p.c_cold));
        CHECK(cold_pressure_derivative(1.0 + 1e-12, p) ==
              doctest::Approx(p.c_cold).epsilon(1e-9));
    }
    SUBCASE("monotone, singular at vacuum, growing at infinity") {
        CHECK(cold_pressure(1e-3, p) < -1e10);
        CHECK(cold_pressure(50.0, p) > 1e8);
    }
    CHECK_THROWS_AS(cold_pressure(0.0, p), std::domain_error);
    CHECK_THROWS_AS(cold_pressure_derivative(-1.0, p), std::domain_error);
}

TEST_CASE("cold pressure derivative matches central differences") {
    ConstitutiveParams p = two_species();
    for (double rho : density_sweep()) {
        const double h = 1e-6 * rho;
        const double fd = (cold_pressure(rho + h, p) - cold_pressure(rho - h, p)) / (2.0 * h);
        const double exact = cold_pressure_derivative(rho, p);
        CHECK(fd == doctest::Approx(exact).epsilon(1e-8));
    }
}

TEST_CASE("cold energy solves rho^2 e_c' = pi_c and is normalized to min 0") {
    ConstitutiveParams p = two_species();
    for (double rho : density_sweep()) {
        const double h = 1e-6 * rho;
        const double fd = (cold_energy(rho + h, p) - cold_energy(rho - h, p)) / (2.0 * h);
        CHECK(rho * rho * fd == doctest::Approx(cold_pressure(rho, p)).epsilon(1e-6));
        CHECK(cold_energy(rho, p) >= 0.0);
    }
    // the minimizer is the root of pi_c, located by bisection
    double lo = 0.5, hi = 2.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (cold_pressure(mid, p) < 0.0) lo = mid; else hi = mid;
    }
    const double rho_star = 0.5 * (lo + hi);
    CHECK(rho_star == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(cold_energy(rho_star, p) == doctest::Approx(0.0).epsilon(1e-12));

    SUBCASE("closed form on the lower branch agrees with quadrature") {
        ConstitutiveParams q = two_species();
        q.gamma_minus = 6.0;
        q.gamma_plus = 6.0;
        q.c_cold = 1.0;
        // e_c(0.5) = int_0.5^1 -pi_c(y)/y^2 dy with pi_c = (1 - y^-6)/6; 4000-panel
        // midpoint rule is plenty at this smoothness
        double quad = 0.0;
        const int npanel = 4000;
        for (int i = 0; i < npanel; ++i) {
            const double y = 0.5 + (i + 0.5) * 0.5 / npanel;
            quad -= cold_pressure(y, q) / (y * y) * (0.5 / npanel);
        }
        CHECK(cold_energy(0.5, q) == doctest::Approx(quad).epsilon(1e-6));
    }
    SUBCASE("blows up toward vacuum") { CHECK(cold_energy(1e-3, p) > 1e20); }
}

TEST_CASE("molecular pressure follows the Boyle law") {
    ConstitutiveParams p = two_species();
    CHECK(molecular_pressure(1.0, {1.0, 1.0}, p) == doctest::Approx(2.0));
    CHECK(molecular_pressure(1.0, {0.0, 0.0}, p) == 0.0);
    ConstitutiveParams q = two_species();
    q.m = {1.0, 2.0};
    CHECK(molecular_pressure(2.0, {1.0, 2.0}, q) == doctest::Approx(4.0));
    CHECK_THROWS_AS(molecular_pressure(-1.0, {1.0, 1.0}, p), std::domain_error);
}

TEST_CASE("total pressure assembles the three components") {
    ConstitutiveParams p = two_species();
    p.beta = 3.0;
    ThermoPoint pt{1.0, 1.0, {0.5, 0.5}};
    // pi_c(1) = 0, radiation = beta/3 = 1, molecular = 1
    CHECK(total_pressure(pt, p) == doctest::Approx(2.0).epsilon(1e-14));

    ThermoPoint cold_pt{1.0, 1e-8, {0.0, 0.0}};
    CHECK(total_pressure(cold_pt, p) == doctest::Approx(0.0).epsilon(1e-20));
}

TEST_CASE("internal energy combines molecular, radiative and cold parts") {
    ConstitutiveParams p = two_species();
    p.beta = 1.0;
    ThermoPoint pt{1.0, 1.0, {0.5, 0.5}};
    CHECK(internal_energy(pt, p) ==
          doctest::Approx(2.0 + cold_energy(1.0, p)).epsilon(1e-14));

    ConstitutiveParams q = two_species();
    q.beta = 1e-14;  // radiation negligible
    CHECK(internal_energy(pt, q) == doctest::Approx(1.0 + cold_energy(1.0, q)).epsilon(1e-12));

    ThermoPoint nearly_vacuum{1e-3, 1.0, {5e-4, 5e-4}};
    CHECK(internal_energy(nearly_vacuum, p) > 1e20);
}

TEST_CASE("entropy density closed forms and the x log x limit") {
    ConstitutiveParams p = two_species();
    SUBCASE("all logs vanish") {
        ConstitutiveParams q = two_species();
        q.m = {1.0, 2.0};
        q.beta = 1e-300;
        ThermoPoint pt{3.0, 1.0, {1.0, 2.0}};  // rho_k = m_k
        CHECK(specific_entropy_density(pt, q) == doctest::Approx(0.0).epsilon(1e-14));
    }
    SUBCASE("theta = e contributes rho") {
        ConstitutiveParams q = two_species();
        q.m = {1.0, 2.0};
        q.beta = 1e-300;
        ThermoPoint pt{3.0, std::exp(1.0), {1.0, 2.0}};
        CHECK(specific_entropy_density(pt, q) == doctest::Approx(3.0).epsilon(1e-13));
    }
    SUBCASE("a vanishing species contributes 0 continuously") {
        ThermoPoint a{1.0, 1.0, {1.0, 1e-300}};
        ThermoPoint b{1.0, 1.0, {1.0, 0.0}};
        CHECK(specific_entropy_density(a, p) ==
              doctest::Approx(specific_entropy_density(b, p)).epsilon(1e-12));
    }
    CHECK_THROWS_AS(specific_entropy_density(ThermoPoint{1.0, 0.0, {1.0, 0.0}}, p),
                    std::domain_error);
}

TEST_CASE("Gibbs function values") {
    ConstitutiveParams p = two_species();
    CHECK(gibbs(1.0, 1.0, 0, p) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(gibbs(1.0, std::exp(1.0), 0, p) == doctest::Approx(3.0).epsilon(1e-13));
    CHECK(gibbs(1.0, 1e-200, 0, p) < -400.0);
    CHECK_THROWS_AS(gibbs(1.0, 0.0, 0, p), std::domain_error);
}

TEST_CASE("Gibbs equals h_k - theta s_k with the non-radiative species entropy") {
    ConstitutiveParams p = two_species();
    p.m = {1.0, 2.0};
    std::mt19937 rng(23);
    std::uniform_real_distribution<double> dist(0.2, 3.0);
    for (int trial = 0; trial < 200; ++trial) {
        const double theta = dist(rng);
        const double rho_k = dist(rng);
        for (std::size_t k = 0; k < 2; ++k) {
            const double sk = std::log(theta) - std::log(rho_k / p.m[k]) / p.m[k];
            const double g = enthalpy(theta, k, p) - theta * sk;
            CHECK(gibbs(theta, rho_k, k, p) == doctest::Approx(g).epsilon(1e-12));
        }
    }
}

TEST_CASE("enthalpy is c_pk theta") {
    ConstitutiveParams p = two_species();
    p.m = {1.0, 2.0};
    CHECK(enthalpy(0.0, 0, p) == 0.0);
    CHECK(enthalpy(1.0, 0, p) == doctest::Approx(2.0));
    CHECK(enthalpy(2.0, 1, p) == doctest::Approx(3.0));
}

TEST_CASE("heat conductivity closed form and monotonicity") {
    ConstitutiveParams p = two_species();
    SUBCASE("closed-form values") {
        ConstitutiveParams q = two_species();
        q.kappa0 = 1.0;
        q.beta = 1.0;
        q.B = 8.0;
        CHECK(heat_conductivity(0.0, 0.0, q) == doctest::Approx(1.0));
        CHECK(heat_conductivity(1.0, 1.0, q) == doctest::Approx(4.0));
        ConstitutiveParams r = q;
        r.kappa0 = 1e-300;
        CHECK(heat_conductivity(2.0, 2.0, r) == doctest::Approx(266.0).epsilon(1e-14));
    }
    SUBCASE("monotone in each argument") {
        std::mt19937 rng(5);
        std::uniform_real_distribution<double> dist(0.0, 3.0);
        for (int trial = 0; trial < 100; ++trial) {
            const double rho = dist(rng), theta = dist(rng), h = 0.1;
            CHECK(heat_conductivity(rho + h, theta, p) >= heat_conductivity(rho, theta, p));
            CHECK(heat_conductivity(rho, theta + h, p) >= heat_conductivity(rho, theta, p));
        }
    }
}

TEST_CASE("Maxwell-Stefan amplitude: linear in rho, affine in theta") {
    ConstitutiveParams p = two_species();
    p.C0_bar = 1.0;
    CHECK(ms_amplitude(0.0, 5.0, p) == 0.0);
    CHECK(ms_amplitude(1.0, 1.0, p) == doctest::Approx(2.0));
    std::mt19937 rng(9);
    std::uniform_real_distribution<double> dist(0.0, 4.0);
    for (int trial = 0; trial < 100; ++trial) {
        const double rho = dist(rng), theta = dist(rng);
        const double v = ms_amplitude(rho, theta, p);
        CHECK(v >= 0.0);
        CHECK(v == doctest::Approx(p.C0_bar * rho * (1.0 + theta)).epsilon(1e-14));
        CHECK(ms_amplitude(rho + 0.1, theta, p) >= v);
        CHECK(ms_amplitude(rho, theta + 0.1, p) >= v);
    }
}

TEST_CASE("Gibbs relation: d(rho s)/d theta = (1/theta) d(rho e)/d theta at fixed fractions") {
    ConstitutiveParams p = two_species();
    p.beta = 0.7;
    std::mt19937 rng(31);
    std::uniform_real_distribution<double> dist(0.3, 2.5);
    for (int trial = 0; trial < 100; ++trial) {
        ThermoPoint pt;
        pt.rho = dist(rng);
        pt.theta = dist(rng);
        pt.rho_k = {0.4 * pt.rho, 0.6 * pt.rho};
        const double h = 1e-6 * pt.theta;
        ThermoPoint up = pt, dn = pt;
        up.theta += h;
        dn.theta -= h;
        const double fd = (specific_entropy_density(up, p) - specific_entropy_density(dn, p)) /
                          (2.0 * h);
        // analytic: rho/theta + 4 beta theta^2
        const double exact = pt.rho / pt.theta + 4.0 * p.beta * pt.theta * pt.theta;
        CHECK(fd == doctest::Approx(exact).epsilon(1e-6));
    }
}

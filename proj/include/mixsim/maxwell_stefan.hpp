#pragma once

// Multicomponent diffusion closure: the explicit mixing matrix C built from
// mass fractions, diffusion driving forces, the primitive (partial-pressure)
// and entropy-variable flux forms, the symmetric PSD matrix D-hat of the
// entropy-variable formulation, and the partial-pressure gradient
// decomposition. All per-point; matrices are small (n <= ~10).

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

#include "mixsim/constitutive.hpp"

namespace mixsim {

// C_kl = -Y_k for l != k, C_kk = 1 - Y_k. Every column sums to zero, which is
// what forces the fluxes to cancel pointwise.
Eigen::MatrixXd mixing_matrix(const std::vector<double>& Y);

// d_k = grad(p_k/pi_m) + (p_k/pi_m - rho_k/rho) grad log pi_m, evaluated in the
// equivalent expanded form (grad p_k - Y_k grad pi_m)/pi_m.
// grad_pk: n x dim (row k = grad p_k); grad_pim: dim entries.
Eigen::MatrixXd diffusion_forces(const ThermoPoint& pt,
                                 const Eigen::MatrixXd& grad_pk,
                                 const Eigen::VectorXd& grad_pim,
                                 const ConstitutiveParams& p);

// F_k = -(C0/pi_m) sum_l C_kl grad p_l. Rows of the result are the F_k.
Eigen::MatrixXd flux_primitive(const ThermoPoint& pt,
                               const Eigen::MatrixXd& grad_pk,
                               const ConstitutiveParams& p);

// D-hat_kl(r) = theta C_kl e^{r_l} / (pi_m m_k), pi_m = theta sum_k e^{r_k}.
// Symmetric, positive semi-definite, |entries| <= 1/min(m).
Eigen::MatrixXd dhat_matrix(const std::vector<double>& r, double theta,
                            const ConstitutiveParams& p);

// F_k = -C0 m_k (sum_l Dhat_kl grad r_l + grad log theta sum_l Dhat_kl).
// Under r_k = log(rho_k/m_k) this coincides with flux_primitive at
// p_k = theta rho_k / m_k.
Eigen::MatrixXd flux_entropic(const std::vector<double>& r,
                              const Eigen::MatrixXd& grad_r,
                              const Eigen::VectorXd& grad_log_theta,
                              double rho, double theta,
                              const ConstitutiveParams& p);

struct PressureGradientDecomposition {
    Eigen::MatrixXd projected;  // (grad p)^I = C grad p, n x dim
    Eigen::VectorXd alpha;      // dim entries; grad p_k = projected_k + alpha Y_k
};

// Splits the partial-pressure gradients into the mixing-matrix image and a
// rank-one remainder along Y. Reconstruction is exact; for thermodynamically
// consistent inputs alpha equals grad pi_m.
PressureGradientDecomposition pressure_gradient_decomposition(
    const ThermoPoint& pt, const Eigen::MatrixXd& grad_pk,
    const ConstitutiveParams& p);

}  // namespace mixsim

#include "mixsim/maxwell_stefan.hpp"

#include <cmath>
#include <stdexcept>

namespace mixsim {

Eigen::MatrixXd mixing_matrix(const std::vector<double>& Y) {
    const auto n = static_cast<Eigen::Index>(Y.size());
    double sum = 0.0;
    for (double y : Y) {
        if (!(y >= 0.0 && y <= 1.0)) throw std::domain_error("mass fractions must lie in [0,1]");
        sum += y;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw std::domain_error("mass fractions must sum to 1");
    Eigen::MatrixXd C(n, n);
    for (Eigen::Index k = 0; k < n; ++k)
        for (Eigen::Index l = 0; l < n; ++l)
            C(k, l) = (k == l) ? 1.0 - Y[static_cast<std::size_t>(k)]
                               : -Y[static_cast<std::size_t>(k)];
    return C;
}

Eigen::MatrixXd diffusion_forces(const ThermoPoint& pt,
                                 const Eigen::MatrixXd& grad_pk,
                                 const Eigen::VectorXd& grad_pim,
                                 const ConstitutiveParams& p) {
    const double pim = molecular_pressure(pt.theta, pt.rho_k, p);
    if (!(pim > 0.0)) throw std::domain_error("diffusion force requires pi_m > 0");
    const auto Y = pt.mass_fractions();
    Eigen::MatrixXd d(grad_pk.rows(), grad_pk.cols());
    for (Eigen::Index k = 0; k < grad_pk.rows(); ++k)
        d.row(k) = (grad_pk.row(k) - Y[static_cast<std::size_t>(k)] * grad_pim.transpose()) / pim;
    return d;
}

Eigen::MatrixXd flux_primitive(const ThermoPoint& pt,
                               const Eigen::MatrixXd& grad_pk,
                               const ConstitutiveParams& p) {
    const double pim = molecular_pressure(pt.theta, pt.rho_k, p);
    if (!(pim > 0.0)) throw std::domain_error("flux requires pi_m > 0");
    const auto Y = pt.mass_fractions();
    const Eigen::MatrixXd C = mixing_matrix(Y);
    const double c0 = ms_amplitude(pt.rho, pt.theta, p);
    return -(c0 / pim) * (C * grad_pk);
}

Eigen::MatrixXd dhat_matrix(const std::vector<double>& r, double theta,
                            const ConstitutiveParams& p) {
    if (!(theta > 0.0)) throw std::domain_error("dhat_matrix requires theta > 0");
    if (r.size() != p.n_species) throw std::domain_error("entropy variable count mismatch");
    const auto n = static_cast<Eigen::Index>(r.size());
    std::vector<double> w(r.size());
    double rho_n = 0.0, wsum = 0.0;
    for (std::size_t k = 0; k < r.size(); ++k) {
        w[k] = std::exp(r[k]);
        rho_n += p.m[k] * w[k];
        wsum += w[k];
    }
    const double pim = theta * wsum;
    std::vector<double> Y(r.size());
    for (std::size_t k = 0; k < r.size(); ++k) Y[k] = p.m[k] * w[k] / rho_n;
    Eigen::MatrixXd D(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const auto ku = static_cast<std::size_t>(k);
        for (Eigen::Index l = 0; l < n; ++l) {
            const auto lu = static_cast<std::size_t>(l);
            const double Ckl = (k == l) ? 1.0 - Y[ku] : -Y[ku];
            D(k, l) = theta * Ckl * w[lu] / (pim * p.m[ku]);
        }
    }
    return D;
}

Eigen::MatrixXd flux_entropic(const std::vector<double>& r,
                              const Eigen::MatrixXd& grad_r,
                              const Eigen::VectorXd& grad_log_theta,
                              double rho, double theta,
                              const ConstitutiveParams& p) {
    if (!(theta > 0.0)) throw std::domain_error("flux_entropic requires theta > 0");
    if (r.size() != p.n_species) throw std::domain_error("entropy variable count mismatch");
    const double c0 = ms_amplitude(rho, theta, p);
    const auto n = grad_r.rows();

    // Factored evaluation of -C0 m_k sum_l Dhat_kl (grad r_l + grad log theta):
    // with v_l = grad r_l + grad log theta and w_l = e^{r_l},
    //   m_k sum_l Dhat_kl v_l = (theta/pi_m) w_k (v_k - m_k sum_l w_l v_l / rho_n),
    // which keeps the pointwise cancellation sum_k F_k = 0 at round-off even
    // for strongly skewed mixtures.
    std::vector<double> w(r.size());
    double wsum = 0.0, rho_n = 0.0;
    for (std::size_t k = 0; k < r.size(); ++k) {
        w[k] = std::exp(r[k]);
        wsum += w[k];
        rho_n += p.m[k] * w[k];
    }
    const double pref = c0 * theta / (theta * wsum);

    Eigen::MatrixXd F(n, grad_r.cols());
    for (Eigen::Index d = 0; d < grad_r.cols(); ++d) {
        const double glt = grad_log_theta(d);
        double S = 0.0;
        for (Eigen::Index l = 0; l < n; ++l)
            S += w[static_cast<std::size_t>(l)] * (grad_r(l, d) + glt);
        const double t_over = S / rho_n;
        for (Eigen::Index k = 0; k < n; ++k) {
            const auto ku = static_cast<std::size_t>(k);
            F(k, d) = -pref * w[ku] * ((grad_r(k, d) + glt) - p.m[ku] * t_over);
        }
    }
    return F;
}

PressureGradientDecomposition pressure_gradient_decomposition(
    const ThermoPoint& pt, const Eigen::MatrixXd& grad_pk,
    const ConstitutiveParams& p) {
    const auto Y = pt.mass_fractions();
    double mY = 0.0;
    for (std::size_t k = 0; k < Y.size(); ++k) mY += p.m[k] * Y[k];
    if (!(mY > 0.0)) throw std::domain_error("degenerate mass-fraction denominator");

    PressureGradientDecomposition out;
    const Eigen::MatrixXd C = mixing_matrix(Y);
    out.projected = C * grad_pk;

    // sum_k m_k grad p_k recovers grad(rho theta) when sum rho_k = rho
    Eigen::VectorXd grad_rho_theta = Eigen::VectorXd::Zero(grad_pk.cols());
    Eigen::VectorXd m_proj = Eigen::VectorXd::Zero(grad_pk.cols());
    for (Eigen::Index k = 0; k < grad_pk.rows(); ++k) {
        grad_rho_theta += p.m[static_cast<std::size_t>(k)] * grad_pk.row(k).transpose();
        m_proj += p.m[static_cast<std::size_t>(k)] * out.projected.row(k).transpose();
    }
    out.alpha = (grad_rho_theta - m_proj) / mY;
    return out;
}

}  // namespace mixsim

// equilibrium.hpp — Asymptotic dispersions of the system oscillators:
// exact reduction of the global Gibbs state of the discretized model, an
// independent continuum fluctuation-dissipation quadrature, and the
// inversion of the stationary dispersions into master-equation constants.

#pragma once

#include <cmath>
#include <utility>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "qbm/propagation.hpp"
#include "qbm/reduced.hpp"

namespace qbm {

// Reduced 4x4 covariance of the global Gibbs state at temperature T:
// every normal mode k carries <X_k^2> = coth(nu_k/2T)/(2 nu_k) and
// <P_k^2> = nu_k coth(nu_k/2T)/2; the system block is rotated back and
// mass-unweighted. Ordering (x_1, p_1, x_2, p_2).
inline CovarianceMatrix equilibrium_covariance(const NormalModeDecomposition& decomp,
                                               double temperature) {
    if (temperature < 0.0) throw std::invalid_argument("equilibrium_covariance: T must be >= 0");
    const Eigen::Index n = decomp.size();
    const Eigen::VectorXd& nu = decomp.frequencies();
    Eigen::VectorXd gx(n), gp(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const double c = thermal_coth(nu(k), temperature);
        gx(k) = c / (2.0 * nu(k));
        gp(k) = nu(k) * c / 2.0;
    }
    const Matrix b = decomp.mode_matrix().topRows<2>();
    const Matrix vyy = (b.array().rowwise() * gx.transpose().array()).matrix() * b.transpose();
    const Matrix vpp = (b.array().rowwise() * gp.transpose().array()).matrix() * b.transpose();
    const double m = decomp.params().mass;
    Matrix v = Matrix::Zero(4, 4);
    v(0, 0) = vyy(0, 0) / m;
    v(0, 2) = v(2, 0) = vyy(0, 1) / m;
    v(2, 2) = vyy(1, 1) / m;
    v(1, 1) = vpp(0, 0) * m;
    v(1, 3) = v(3, 1) = vpp(0, 1) * m;
    v(3, 3) = vpp(1, 1) * m;
    return CovarianceMatrix(std::move(v));
}

// Asymptotic x_+ dispersions (dx_+, dp_+) of the resonant model read off
// the +/- basis Gibbs covariance.
inline std::pair<double, double> equilibrium_dispersions(const NormalModeDecomposition& decomp,
                                                         double temperature) {
    const CovarianceMatrix pm =
        basis_change_pm(equilibrium_covariance(decomp, temperature), BasisDirection::to_pm);
    return {std::sqrt(pm(2, 2)), std::sqrt(pm(3, 3))};
}

// Continuum fluctuation-dissipation cross-check (ohmic only): x_+ couples
// with doubled strength, so
//   Im chi_+(w) = (4 gamma0 w / m) / [(O^2 - w^2)^2 + 16 gamma0^2 w^2],
//   dx_+^2 = (1/pi)   int_0^L coth(w/2T) Im chi_+(w) dw,
//   dp_+^2 = (m^2/pi) int_0^L w^2 coth(w/2T) Im chi_+(w) dw.
inline std::pair<double, double> equilibrium_dispersions_fd(const SpectralDensity& j, double omega,
                                                            double temperature) {
    j.validate();
    if (j.kind != BathKind::ohmic) {
        throw std::invalid_argument("equilibrium_dispersions_fd: only the ohmic density is supported");
    }
    if (temperature < 0.0) throw std::invalid_argument("equilibrium_dispersions_fd: T must be >= 0");
    if (!(omega > 0.0)) throw std::invalid_argument("equilibrium_dispersions_fd: omega must be > 0");
    const double m = j.m;
    const double g = j.gamma0;
    const auto im_chi = [&](double w) {
        const double d = omega * omega - w * w;
        return (4.0 * g * w / m) / (d * d + 16.0 * g * g * w * w);
    };
    const auto weight = [&](double w) { return thermal_coth(w, temperature); };
    using quad = boost::math::quadrature::gauss_kronrod<double, 15>;
    double err = 0.0;
    const double x2 = quad::integrate([&](double w) { return weight(w) * im_chi(w) / M_PI; }, 0.0,
                                      j.cutoff, 15, 1e-12, &err);
    const double p2 = quad::integrate(
        [&](double w) { return m * m / M_PI * w * w * weight(w) * im_chi(w); }, 0.0, j.cutoff, 15,
        1e-12, &err);
    return {std::sqrt(x2), std::sqrt(p2)};
}

// Inverts the stationary dispersions into the asymptotic constants:
// D = 2 gamma dp_+^2, f = dp_+^2 / m - m O^2 dx_+^2.
inline ReducedCoefficients asymptotic_coefficients(double dx_plus, double dp_plus, double gamma,
                                                   double m, double omega) {
    if (!(dx_plus > 0.0) || !(dp_plus > 0.0)) {
        throw std::invalid_argument("asymptotic_coefficients: dispersions must be > 0");
    }
    ReducedCoefficients c;
    c.omega = omega;
    c.gamma = gamma;
    c.m = m;
    c.diffusion = 2.0 * gamma * dp_plus * dp_plus;
    c.anomalous = dp_plus * dp_plus / m - m * omega * omega * dx_plus * dx_plus;
    c.validate();
    return c;
}

} // namespace qbm

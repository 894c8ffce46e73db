// reduced.hpp — Constant-coefficient reduced integrator for the resonant
// two-oscillator covariance in the +/- basis.
//
// The (x_-, p_-) block evolves as a free oscillator at Omega_-; the
// (x_+, p_+) block carries damping gamma, normal diffusion D and anomalous
// diffusion f:
//   d<x^2>/dt  = 2 <xp>/m
//   d<xp>/dt   = <p^2>/m - m O^2 <x^2> - 2 gamma <xp> - f
//   d<p^2>/dt  = -2 m O^2 <xp> - 4 gamma <p^2> + 2 D.

#pragma once

#include <cmath>

#include <Eigen/Dense>

#include "qbm/covariance.hpp"

namespace qbm {

// Asymptotic master-equation constants for the x_+ oscillator.
struct ReducedCoefficients {
    double omega = 1.0; // asymptotic renormalized frequency
    double gamma = 0.0; // asymptotic damping (= 2 gamma0 for the ohmic bath)
    double diffusion = 0.0; // D
    double anomalous = 0.0; // f
    double m = 1.0;

    void validate() const {
        if (!(gamma > 0.0)) throw std::invalid_argument("ReducedCoefficients: gamma must be > 0");
        if (!(diffusion > 0.0)) throw std::invalid_argument("ReducedCoefficients: D must be > 0");
        if (!(m > 0.0)) throw std::invalid_argument("ReducedCoefficients: m must be > 0");
        if (!(stationary_x2() > 0.0)) {
            throw std::invalid_argument(
                "ReducedCoefficients: D/(2 m^2 gamma) - f/m must be > 0 (stationary <x_+^2>)");
        }
    }

    // Stationary dispersions: dp_+ = sqrt(D / 2 gamma),
    // O dx_+ = sqrt(D / (2 m^2 gamma) - f / m).
    double stationary_p2() const { return diffusion / (2.0 * gamma); }
    double stationary_x2() const {
        return (diffusion / (2.0 * m * m * gamma) - anomalous / m) / (omega * omega);
    }
};

namespace detail {

// dV/dt = A V + V A^T + D_mat in the (x_-, p_-, x_+, p_+) ordering.
inline Matrix reduced_drift(const Matrix& v, const ReducedCoefficients& c, double omega_minus) {
    Matrix a = Matrix::Zero(4, 4);
    a(0, 1) = 1.0 / c.m;
    a(1, 0) = -c.m * omega_minus * omega_minus;
    a(2, 3) = 1.0 / c.m;
    a(3, 2) = -c.m * c.omega * c.omega;
    a(3, 3) = -2.0 * c.gamma;
    Matrix d = Matrix::Zero(4, 4);
    d(2, 3) = d(3, 2) = -c.anomalous;
    d(3, 3) = 2.0 * c.diffusion;
    return a * v + v * a.transpose() + d;
}

} // namespace detail

// One classical Runge-Kutta step of the drift/diffusion flow (fourth-order
// accurate in dt). The affine flow makes the continuous fixed point an
// exact fixed point of the discrete map.
inline CovarianceMatrix reduced_master_step(const CovarianceMatrix& cov,
                                            const ReducedCoefficients& coeffs, double omega_minus,
                                            double dt) {
    if (cov.modes() != 2) throw std::invalid_argument("reduced_master_step: needs a 2-mode covariance");
    coeffs.validate();
    const Matrix& v = cov.matrix();
    const Matrix k1 = detail::reduced_drift(v, coeffs, omega_minus);
    const Matrix k2 = detail::reduced_drift(v + 0.5 * dt * k1, coeffs, omega_minus);
    const Matrix k3 = detail::reduced_drift(v + 0.5 * dt * k2, coeffs, omega_minus);
    const Matrix k4 = detail::reduced_drift(v + dt * k3, coeffs, omega_minus);
    Matrix next = v + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    return CovarianceMatrix(std::move(next));
}

// Instantaneous drift, exposed for fixed-point and balance checks.
inline Matrix reduced_drift(const CovarianceMatrix& cov, const ReducedCoefficients& coeffs,
                            double omega_minus) {
    return detail::reduced_drift(cov.matrix(), coeffs, omega_minus);
}

// Integrates to t_final with fixed-step RK4 and returns the final state.
inline CovarianceMatrix evolve_reduced(CovarianceMatrix cov, const ReducedCoefficients& coeffs,
                                       double omega_minus, double t_final, double dt = 1e-3) {
    if (!(dt > 0.0) || !(t_final >= 0.0)) throw std::invalid_argument("evolve_reduced: bad arguments");
    const auto steps = static_cast<std::size_t>(std::ceil(t_final / dt - 1e-12));
    for (std::size_t i = 0; i < steps; ++i) {
        cov = reduced_master_step(cov, coeffs, omega_minus, dt);
    }
    return cov;
}

} // namespace qbm

// bath.hpp — Continuum spectral densities, N-mode discretizations and
// thermal initial covariances for the environment.
//
// NOTE on the cutoff: J(omega) carries a sharp HIGH-frequency cutoff,
// J(omega) = 0 for omega > Lambda. All bath masses are fixed to 1 (any
// m_n can be absorbed into the coupling c_n of a quadratic model).

#pragma once

#include <cmath>
#include <cstddef>

#include <Eigen/Dense>

#include "qbm/covariance.hpp"
#include "qbm/errors.hpp"

namespace qbm {

enum class BathKind { ohmic, superohmic };

// Continuum spectral density:
//   ohmic:      J(w) = 2 m gamma0 w / pi                    for w <= Lambda
//   superohmic: J(w) = 2 m gamma0 w^s / (pi Lambda^{s-1})   for w <= Lambda
// The superohmic normalization matches the ohmic form at s = 1.
struct SpectralDensity {
    BathKind kind = BathKind::ohmic;
    double gamma0 = 0.15; // damping-rate parameter
    double cutoff = 20.0; // Lambda
    double m = 1.0;       // system mass entering J
    double s = 3.0;       // superohmic exponent

    void validate() const {
        if (!(gamma0 >= 0.0)) throw std::invalid_argument("SpectralDensity: gamma0 must be >= 0");
        if (!(cutoff > 0.0)) throw std::invalid_argument("SpectralDensity: cutoff must be > 0");
        if (!(m > 0.0)) throw std::invalid_argument("SpectralDensity: m must be > 0");
        if (kind == BathKind::superohmic && !(s > 1.0)) {
            throw std::invalid_argument("SpectralDensity: superohmic exponent must be > 1");
        }
    }
};

inline double spectral_value(const SpectralDensity& j, double omega) {
    if (omega < 0.0) throw std::invalid_argument("spectral_value: omega must be >= 0");
    if (omega > j.cutoff) return 0.0;
    switch (j.kind) {
        case BathKind::ohmic:
            return 2.0 * j.m * j.gamma0 * omega / M_PI;
        case BathKind::superohmic:
            return 2.0 * j.m * j.gamma0 * std::pow(omega, j.s) / (M_PI * std::pow(j.cutoff, j.s - 1.0));
    }
    throw std::invalid_argument("spectral_value: unknown spectral density kind");
}

// Uniform midpoint discretization of J on (0, Lambda]:
//   w_n = (n - 1/2) dw,  dw = Lambda / N,  c_n^2 = 2 w_n J(w_n) dw,
// so that J(w) = sum_n c_n^2 delta(w - w_n) / (2 m_n w_n) reproduces the
// continuum density. The finite bath mimics a continuum only up to the
// recurrence time 2 pi / dw.
struct DiscretizedBath {
    Eigen::VectorXd frequencies; // ascending, in (0, Lambda]
    Eigen::VectorXd couplings;   // c_n >= 0
    double spacing = 0.0;        // dw

    std::size_t size() const { return static_cast<std::size_t>(frequencies.size()); }
    double recurrence_time() const { return 2.0 * M_PI / spacing; }

    // sum_n c_n^2 / (m_n w_n^2): the frequency shift the coupling induces
    // on x_1 + x_2, cancelled by the counterterm in the bare parameters.
    double counterterm() const {
        return (couplings.array().square() / frequencies.array().square()).sum();
    }
};

inline DiscretizedBath discretize(const SpectralDensity& j, std::size_t n_modes) {
    j.validate();
    if (n_modes < 2) throw std::invalid_argument("discretize: need at least 2 bath modes");
    DiscretizedBath bath;
    bath.spacing = j.cutoff / static_cast<double>(n_modes);
    bath.frequencies.resize(static_cast<Eigen::Index>(n_modes));
    bath.couplings.resize(static_cast<Eigen::Index>(n_modes));
    for (std::size_t n = 0; n < n_modes; ++n) {
        const double w = (static_cast<double>(n) + 0.5) * bath.spacing;
        const auto i = static_cast<Eigen::Index>(n);
        bath.frequencies(i) = w;
        bath.couplings(i) = std::sqrt(2.0 * w * spectral_value(j, w) * bath.spacing);
    }
    return bath;
}

// coth(w / 2T) with the T = 0 ground-state limit coth -> 1.
inline double thermal_coth(double omega, double temperature) {
    if (temperature == 0.0) return 1.0;
    const double x = omega / (2.0 * temperature);
    if (x > 350.0) return 1.0;
    return 1.0 / std::tanh(x);
}

// Per-mode thermal second moments: <q_n^2> = coth(w_n/2T) / (2 w_n) and
// <pi_n^2> = w_n coth(w_n/2T) / 2 (unit bath masses, no cross terms).
inline std::pair<Eigen::VectorXd, Eigen::VectorXd> thermal_mode_variances(const DiscretizedBath& bath,
                                                                          double temperature) {
    if (temperature < 0.0) throw std::invalid_argument("thermal_mode_variances: T must be >= 0");
    const auto n = static_cast<Eigen::Index>(bath.size());
    Eigen::VectorXd q2(n), p2(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double w = bath.frequencies(i);
        const double c = thermal_coth(w, temperature);
        q2(i) = c / (2.0 * w);
        p2(i) = w * c / 2.0;
    }
    return {q2, p2};
}

// Block-diagonal N-mode thermal covariance, ordering (q_1, pi_1, ...).
inline CovarianceMatrix thermal_covariance(const DiscretizedBath& bath, double temperature) {
    auto [q2, p2] = thermal_mode_variances(bath, temperature);
    const auto n = static_cast<Eigen::Index>(bath.size());
    Matrix v = Matrix::Zero(2 * n, 2 * n);
    for (Eigen::Index i = 0; i < n; ++i) {
        v(2 * i, 2 * i) = q2(i);
        v(2 * i + 1, 2 * i + 1) = p2(i);
    }
    return CovarianceMatrix(std::move(v));
}

} // namespace qbm

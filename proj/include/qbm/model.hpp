// model.hpp — Two oscillators bilinearly coupled through x_1 + x_2 to a
// discretized bath: renormalized input parameters, cutoff-dependent bare
// parameters, and the full potential matrix.

#pragma once

#include <cstddef>

#include <Eigen/Dense>

#include "qbm/bath.hpp"
#include "qbm/errors.hpp"

namespace qbm {

// Physical (renormalized, cutoff-independent) model parameters. The bare
// parameters entering the microscopic Hamiltonian are derived from these
// plus the bath counterterm.
struct ModelParams {
    double omega1 = 1.0; // renormalized frequencies Omega_1, Omega_2
    double omega2 = 1.0;
    double c12 = 0.0;    // renormalized inter-oscillator coupling (frequency^2)
    double mass = 1.0;
    SpectralDensity spectral;
    std::size_t n_bath = 2000;

    bool resonant() const { return omega1 == omega2; }

    // Omega_-^2 = Omega^2 - C12 (resonant case); the x_- sector is
    // counterterm-free, so this is exact for the microscopic model too.
    double omega_minus() const { return std::sqrt(omega1 * omega1 - c12); }

    void validate() const {
        if (!(omega1 > 0.0) || !(omega2 > 0.0)) {
            throw config_error("ModelParams: frequencies must be > 0");
        }
        if (!(mass > 0.0)) throw config_error("ModelParams: mass must be > 0");
        spectral.validate();
        if (n_bath < 2) throw config_error("ModelParams: need at least 2 bath modes");
        // renormalized potential matrix [[O1^2, C12], [C12, O2^2]] must be
        // positive definite; this is equivalent to positivity of the full
        // counterterm-corrected potential.
        const double det = omega1 * omega1 * omega2 * omega2 - c12 * c12;
        if (!(det > 0.0)) {
            throw config_error(
                "ModelParams: renormalized potential matrix not positive definite "
                "(|c12| must stay below omega1*omega2)");
        }
    }
};

// Bare (counterterm-shifted) parameters. Completing the square in the
// discretized Hamiltonian shifts the potential of x_1 + x_2 by
// -mu (x_1 + x_2)^2 / 2 with mu = sum_n c_n^2 / (m_n w_n^2), so each
// bare frequency and the bare coupling carry +mu/m:
//   omega_i^2 = Omega_i^2 + mu/m,  c12_bare = C12 + mu/m.
// For the ohmic density the midpoint sum gives mu = 4 m gamma0 Lambda / pi
// exactly. The x_- combination omega_i^2 - c12 is shift-free.
struct BareParameters {
    double omega1_sq = 0.0;
    double omega2_sq = 0.0;
    double c12 = 0.0;
    double counterterm = 0.0; // mu
};

inline BareParameters bare_parameters(const ModelParams& p, const DiscretizedBath& bath) {
    p.validate();
    const double shift = bath.counterterm() / p.mass;
    return {p.omega1 * p.omega1 + shift, p.omega2 * p.omega2 + shift, p.c12 + shift,
            bath.counterterm()};
}

inline BareParameters bare_parameters(const ModelParams& p) {
    return bare_parameters(p, discretize(p.spectral, p.n_bath));
}

// Full potential matrix K, mode order (x_1, x_2, q_1 .. q_N), with the
// Hamiltonian H = sum_i p_i^2 / 2m_i + x^T K x / 2:
//   K[x_i, x_i] = m omega_i^2(bare), K[x_1, x_2] = m c12(bare),
//   K[x_i, q_n] = c_n, K[q_n, q_n] = w_n^2.
struct Generator {
    Matrix potential;      // K
    Eigen::VectorXd masses; // (m, m, 1, ..., 1)
};

inline Generator build_generator(const ModelParams& p, const DiscretizedBath& bath) {
    const BareParameters bare = bare_parameters(p, bath);
    const auto nb = static_cast<Eigen::Index>(bath.size());
    const Eigen::Index n = nb + 2;
    Generator gen;
    gen.potential = Matrix::Zero(n, n);
    gen.potential(0, 0) = p.mass * bare.omega1_sq;
    gen.potential(1, 1) = p.mass * bare.omega2_sq;
    gen.potential(0, 1) = gen.potential(1, 0) = p.mass * bare.c12;
    for (Eigen::Index i = 0; i < nb; ++i) {
        const double w = bath.frequencies(i);
        const double c = bath.couplings(i);
        gen.potential(2 + i, 2 + i) = w * w;
        gen.potential(0, 2 + i) = gen.potential(2 + i, 0) = c;
        gen.potential(1, 2 + i) = gen.potential(2 + i, 1) = c;
    }
    gen.masses = Eigen::VectorXd::Ones(n);
    gen.masses(0) = gen.masses(1) = p.mass;
    return gen;
}

} // namespace qbm

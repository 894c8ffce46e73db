// propagation.hpp — Exact covariance propagation of the full
// (system + bath) model through its normal modes.
//
// The mass-weighted potential is diagonalized once, K~ = O diag(nu_k^2) O^T;
// the propagator on (y, pi) = (M^{1/2} x, M^{-1/2} p) has the exact blocks
//   S(t) = [[cos(rK t), rK^{-1} sin(rK t)], [-rK sin(rK t), cos(rK t)]],
// rK = K~^{1/2}. Only the four system rows of S(t) are formed per output
// time, so one trajectory costs O(n^2) per sample after the O(n^3) solve.

#pragma once

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qbm/covariance.hpp"
#include "qbm/model.hpp"

namespace qbm {

// Reduced system state at one output time. The covariance is in the
// (x_1, p_1, x_2, p_2) ordering; dispersions refer to the +/- coordinates.
struct TrajectoryPoint {
    double t = 0.0;
    CovarianceMatrix cov;
    double log_neg = 0.0;
    double var_x_minus = 0.0;
    double var_p_minus = 0.0;
    double var_x_plus = 0.0;
    double var_p_plus = 0.0;
    double purity_minus = 0.0; // purity of the x_- marginal
    double nu_min = 0.0;       // smallest symplectic eigenvalue of cov
};

// Product initial condition: an arbitrary 2-mode system covariance and a
// mode-diagonal bath covariance (per-mode q^2, pi^2, q*pi moments).
struct InitialCondition {
    CovarianceMatrix system;
    Eigen::VectorXd bath_q2;
    Eigen::VectorXd bath_p2;
    Eigen::VectorXd bath_qp;

    static InitialCondition thermal(CovarianceMatrix system_cov, const DiscretizedBath& bath,
                                    double temperature) {
        if (system_cov.modes() != 2) {
            throw std::invalid_argument("InitialCondition::thermal: system must have 2 modes");
        }
        auto [q2, p2] = thermal_mode_variances(bath, temperature);
        const auto n = static_cast<Eigen::Index>(bath.size());
        return {std::move(system_cov), std::move(q2), std::move(p2), Eigen::VectorXd::Zero(n)};
    }

    // Splits a full (N+2)-mode covariance, ordering (x_1,p_1,x_2,p_2,q_1,pi_1,...).
    // Rejects anything that is not a product of the system state with a
    // mode-diagonal bath state.
    static InitialCondition from_full(const CovarianceMatrix& full) {
        if (full.modes() < 3) {
            throw std::invalid_argument("InitialCondition::from_full: expected system + bath modes");
        }
        const Matrix& v = full.matrix();
        const auto nb = static_cast<Eigen::Index>(full.modes()) - 2;
        const double scale = std::max(1.0, v.cwiseAbs().maxCoeff());
        if (v.block(0, 4, 4, 2 * nb).cwiseAbs().maxCoeff() > 1e-12 * scale) {
            throw invalid_state_error(
                "InitialCondition::from_full: non-product initial covariance (system-bath correlations)");
        }
        Eigen::VectorXd q2(nb), p2(nb), qp(nb);
        for (Eigen::Index i = 0; i < nb; ++i) {
            for (Eigen::Index j = 0; j < nb; ++j) {
                if (i == j) continue;
                if (v.block(4 + 2 * i, 4 + 2 * j, 2, 2).cwiseAbs().maxCoeff() > 1e-12 * scale) {
                    throw invalid_state_error(
                        "InitialCondition::from_full: bath modes must be uncorrelated");
                }
            }
            q2(i) = v(4 + 2 * i, 4 + 2 * i);
            p2(i) = v(4 + 2 * i + 1, 4 + 2 * i + 1);
            qp(i) = v(4 + 2 * i, 4 + 2 * i + 1);
        }
        return {CovarianceMatrix(v.topLeftCorner(4, 4)), std::move(q2), std::move(p2), std::move(qp)};
    }
};

class NormalModeDecomposition {
public:
    NormalModeDecomposition(const ModelParams& params, DiscretizedBath bath)
        : params_(params), bath_(std::move(bath)) {
        const Generator gen = build_generator(params_, bath_);
        const Eigen::VectorXd inv_root_m = gen.masses.cwiseSqrt().cwiseInverse();
        const Matrix weighted =
            inv_root_m.asDiagonal() * gen.potential * inv_root_m.asDiagonal();
        Eigen::SelfAdjointEigenSolver<Matrix> es(weighted);
        if (es.info() != Eigen::Success) {
            throw numerical_error("NormalModeDecomposition: eigensolver failed");
        }
        if (!(es.eigenvalues()(0) > 0.0)) {
            throw config_error(
                "NormalModeDecomposition: potential matrix not positive definite; "
                "increase the bath mode count or reduce gamma0 * cutoff");
        }
        freq_ = es.eigenvalues().cwiseSqrt();
        modes_ = es.eigenvectors();
        system_rows_ = modes_.topRows<2>();
    }

    explicit NormalModeDecomposition(const ModelParams& params)
        : NormalModeDecomposition(params, discretize(params.spectral, params.n_bath)) {}

    const ModelParams& params() const { return params_; }
    const DiscretizedBath& bath() const { return bath_; }
    const Eigen::VectorXd& frequencies() const { return freq_; } // nu_k, ascending
    const Matrix& mode_matrix() const { return modes_; }         // O
    Eigen::Index size() const { return freq_.size(); }           // N + 2
    double recurrence_time() const { return bath_.recurrence_time(); }

    // Maximum horizon the discretized bath is trusted for.
    double horizon() const { return 0.5 * recurrence_time(); }

    // Reduced 4x4 system covariance of S(t) V0 S(t)^T, ordering
    // (x_1, p_1, x_2, p_2).
    Matrix reduced_covariance_at(const InitialCondition& init, double t) const {
        const Eigen::Index n = size();
        const Eigen::VectorXd phase = freq_ * t;
        const Eigen::ArrayXd cos_v = phase.array().cos();
        const Eigen::ArrayXd sin_v = phase.array().sin();
        // system rows of the propagator blocks: P_g = (B .* g(nu)) O^T
        Matrix pc(2, n), ps(2, n), pv(2, n);
        pc.noalias() = (system_rows_.array().rowwise() * cos_v.transpose()).matrix() * modes_.transpose();
        ps.noalias() = (system_rows_.array().rowwise() * (sin_v / freq_.array()).transpose()).matrix() *
                       modes_.transpose();
        pv.noalias() = (system_rows_.array().rowwise() * (sin_v * freq_.array()).transpose()).matrix() *
                       modes_.transpose();
        // rows (y_1, y_2, pi_1, pi_2) of S(t): [R_y | R_p] = [[pc, ps], [-pv, pc]]
        Matrix ry(4, n), rp(4, n);
        ry.topRows<2>() = pc;
        ry.bottomRows<2>() = -pv;
        rp.topRows<2>() = ps;
        rp.bottomRows<2>() = pc;

        // contract with the sparse product V0: bath part is mode-diagonal
        const Eigen::Index nb = n - 2;
        const auto ryb = ry.rightCols(nb).array();
        const auto rpb = rp.rightCols(nb).array();
        Matrix v(4, 4);
        v.noalias() = (ryb.rowwise() * init.bath_q2.transpose().array()).matrix() *
                      ry.rightCols(nb).transpose();
        v.noalias() += (rpb.rowwise() * init.bath_p2.transpose().array()).matrix() *
                       rp.rightCols(nb).transpose();
        if (init.bath_qp.any()) {
            const Matrix cross = (ryb.rowwise() * init.bath_qp.transpose().array()).matrix() *
                                 rp.rightCols(nb).transpose();
            v.noalias() += cross + cross.transpose();
        }
        // system part, mass-weighted: y = sqrt(m) x, pi = p / sqrt(m)
        const double m = params_.mass;
        const Matrix& s = init.system.matrix();
        Matrix sxx(2, 2), spp(2, 2), sxp(2, 2);
        sxx << s(0, 0), s(0, 2), s(2, 0), s(2, 2);
        spp << s(1, 1), s(1, 3), s(3, 1), s(3, 3);
        sxp << s(0, 1), s(0, 3), s(2, 1), s(2, 3);
        const Matrix ry_s = ry.leftCols<2>();
        const Matrix rp_s = rp.leftCols<2>();
        v.noalias() += ry_s * (m * sxx) * ry_s.transpose();
        v.noalias() += rp_s * (spp / m) * rp_s.transpose();
        const Matrix mixed = ry_s * sxp * rp_s.transpose();
        v.noalias() += mixed + mixed.transpose();

        // back to (x_1, p_1, x_2, p_2) and physical units
        const double rm = std::sqrt(m);
        Matrix out(4, 4);
        const int map[4] = {0, 2, 1, 3}; // (y1,y2,pi1,pi2) -> slots
        const double weight[4] = {1.0 / rm, rm, 1.0 / rm, rm};
        for (int a = 0; a < 4; ++a) {
            for (int b = 0; b < 4; ++b) {
                out(map[a], map[b]) = weight[a] * weight[b] * v(a, b);
            }
        }
        return 0.5 * (out + out.transpose());
    }

    // Full 2n x 2n propagator S(t) in the split (y..., pi...) ordering.
    // O(n^3); intended for small systems and symplecticity checks.
    Matrix full_propagator(double t) const {
        const Eigen::Index n = size();
        const Eigen::VectorXd phase = freq_ * t;
        const Eigen::ArrayXd cos_v = phase.array().cos();
        const Eigen::ArrayXd sin_v = phase.array().sin();
        Matrix s(2 * n, 2 * n);
        const Matrix ot = modes_.transpose();
        s.topLeftCorner(n, n).noalias() = modes_ * cos_v.matrix().asDiagonal() * ot;
        s.topRightCorner(n, n).noalias() = modes_ * (sin_v / freq_.array()).matrix().asDiagonal() * ot;
        s.bottomLeftCorner(n, n).noalias() =
            -(modes_ * (sin_v * freq_.array()).matrix().asDiagonal() * ot);
        s.bottomRightCorner(n, n) = s.topLeftCorner(n, n);
        return s;
    }

private:
    ModelParams params_;
    DiscretizedBath bath_;
    Eigen::VectorXd freq_;
    Matrix modes_;
    Matrix system_rows_; // B = O[0:2, :]
};

namespace detail {

inline TrajectoryPoint make_point(double t, const Matrix& reduced) {
    TrajectoryPoint pt{t, CovarianceMatrix(reduced)};
    if (!is_physical(pt.cov, dynamic_phys_tol)) {
        throw numerical_error("propagate: emitted covariance unphysical at t = " + std::to_string(t));
    }
    pt.nu_min = symplectic_eigenvalues_two_mode(pt.cov).first;
    pt.log_neg = log_negativity(pt.cov);
    const CovarianceMatrix pm = basis_change_pm(pt.cov, BasisDirection::to_pm);
    pt.var_x_minus = pm(0, 0);
    pt.var_p_minus = pm(1, 1);
    pt.var_x_plus = pm(2, 2);
    pt.var_p_plus = pm(3, 3);
    pt.purity_minus = marginal_purity(pm, {0});
    return pt;
}

} // namespace detail

// Exact reduced dynamics on the given output grid. All requested times
// must stay below half the recurrence time of the discretized bath.
inline std::vector<TrajectoryPoint> propagate(const NormalModeDecomposition& decomp,
                                              const InitialCondition& init,
                                              const std::vector<double>& times) {
    if (static_cast<Eigen::Index>(init.bath_q2.size()) != decomp.size() - 2) {
        throw std::invalid_argument("propagate: initial condition does not match the bath size");
    }
    for (double t : times) {
        if (t < 0.0) throw std::invalid_argument("propagate: negative output time");
        if (t >= decomp.horizon()) {
            throw recurrence_error("propagate: requested time " + std::to_string(t) +
                                   " exceeds half the bath recurrence time " +
                                   std::to_string(decomp.recurrence_time()));
        }
    }
    std::vector<TrajectoryPoint> out;
    out.reserve(times.size());
    for (double t : times) {
        out.push_back(detail::make_point(t, decomp.reduced_covariance_at(init, t)));
    }
    return out;
}

inline std::vector<double> time_grid(double t_max, double dt) {
    if (!(t_max >= 0.0) || !(dt > 0.0)) throw std::invalid_argument("time_grid: bad arguments");
    std::vector<double> times;
    const auto n = static_cast<std::size_t>(std::floor(t_max / dt + 1e-9));
    times.reserve(n + 1);
    for (std::size_t i = 0; i <= n; ++i) times.push_back(static_cast<double>(i) * dt);
    return times;
}

} // namespace qbm

// covariance.hpp — Covariance-matrix algebra for Gaussian states:
// constructors, basis changes, symplectic spectra, partial transpose and
// logarithmic negativity.
//
// Conventions (hbar = 1): mode ordering is (x_1, p_1, x_2, p_2, ...);
// V_ij = <{r_i, r_j}>/2 - <r_i><r_j>. First moments are never stored;
// every quantity computed here depends on second moments only.
//
// Precision: the entanglement of a squeezed state lives e^{4r} below the
// scale of its covariance entries, so second moments are stored in
// extended precision and the two-mode symplectic invariants are
// accumulated in quad precision. A plain double mirror is exposed for
// the dynamics code, whose tolerances are far looser.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <type_traits>
#include <cstddef>
#include <vector>

#include "qbm/errors.hpp"

namespace qbm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ExtMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;

namespace detail {
#if defined(__SIZEOF_FLOAT128__)
using Quad = __float128;
#else
using Quad = long double;
#endif
} // namespace detail

// Symplectic eigenvalues within phys_eigen_tol of 1/2 count as sitting on
// the separable boundary, so E_N is clamped to zero there instead of
// coming out as a tiny negative or a spurious positive.
inline constexpr double phys_eigen_tol = 1e-9;

// Looser physicality tolerance for covariances emitted by time evolution
// (accumulated roundoff of long propagations).
inline constexpr double dynamic_phys_tol = 1e-6;

// --------------------------- symplectic form ---------------------------

// Block-diagonal 2n x 2n antisymmetric form with per-mode blocks
// [[0, 1], [-1, 0]]. Satisfies S^2 = -I and S^T = -S.
inline Matrix symplectic_form(std::size_t n_modes) {
    if (n_modes == 0) throw std::invalid_argument("symplectic_form: n_modes must be > 0");
    const auto d = static_cast<Eigen::Index>(2 * n_modes);
    Matrix s = Matrix::Zero(d, d);
    for (Eigen::Index k = 0; k < d; k += 2) {
        s(k, k + 1) = 1.0;
        s(k + 1, k) = -1.0;
    }
    return s;
}

// --------------------------- covariance matrix -------------------------

class CovarianceMatrix {
public:
    // Accepts a 2n x 2n matrix symmetric to 1e-12 relative tolerance and
    // stores its exactly symmetrized form. Positive definiteness and the
    // uncertainty bound are enforced by the operations that need them.
    explicit CovarianceMatrix(ExtMatrix entries) {
        if (entries.rows() != entries.cols() || entries.rows() < 2 || entries.rows() % 2 != 0) {
            throw invalid_state_error("CovarianceMatrix: entries must be 2n x 2n");
        }
        long double scale = 1.0L, asym = 0.0L;
        for (Eigen::Index i = 0; i < entries.rows(); ++i) {
            for (Eigen::Index j = 0; j < entries.cols(); ++j) {
                if (!std::isfinite(static_cast<double>(entries(i, j)))) {
                    throw invalid_state_error("CovarianceMatrix: entries not finite");
                }
                scale = std::max(scale, std::abs(entries(i, j)));
                asym = std::max(asym, std::abs(entries(i, j) - entries(j, i)));
            }
        }
        if (!(asym <= 1e-12L * scale)) {
            throw invalid_state_error("CovarianceMatrix: entries not symmetric");
        }
        n_modes_ = static_cast<std::size_t>(entries.rows() / 2);
        v_ = 0.5L * (entries + entries.transpose());
        v_d_ = v_.cast<double>();
    }

    template <typename Derived,
              std::enable_if_t<std::is_same_v<typename Derived::Scalar, double>, int> = 0>
    explicit CovarianceMatrix(const Eigen::MatrixBase<Derived>& entries)
        : CovarianceMatrix(ExtMatrix(entries.template cast<long double>().eval())) {}

    static CovarianceMatrix vacuum(std::size_t n_modes, double m = 1.0, double omega = 1.0) {
        if (n_modes == 0 || m <= 0.0 || omega <= 0.0) {
            throw std::invalid_argument("CovarianceMatrix::vacuum: bad arguments");
        }
        const auto d = static_cast<Eigen::Index>(2 * n_modes);
        const long double mw = static_cast<long double>(m) * static_cast<long double>(omega);
        ExtMatrix v = ExtMatrix::Zero(d, d);
        for (Eigen::Index k = 0; k < d; k += 2) {
            v(k, k) = 0.5L / mw;
            v(k + 1, k + 1) = 0.5L * mw;
        }
        return CovarianceMatrix(std::move(v));
    }

    std::size_t modes() const { return n_modes_; }
    const Matrix& matrix() const { return v_d_; }
    const ExtMatrix& extended() const { return v_; }
    double operator()(Eigen::Index i, Eigen::Index j) const { return v_d_(i, j); }

private:
    std::size_t n_modes_ = 0;
    ExtMatrix v_;
    Matrix v_d_;
};

// --------------------------- symplectic spectra ------------------------

// Positive spectrum {nu_k} of i S V (ascending), computed from the singular
// values of V^{1/2} S V^{1/2}, which come in pairs (nu_k, nu_k). Errors are
// O(eps * ||V||) absolute, which is plenty for moderate states; extreme
// squeezing should go through the closed two-mode route below.
inline std::vector<double> symplectic_eigenvalues(const CovarianceMatrix& cov) {
    const Matrix& v = cov.matrix();
    Eigen::SelfAdjointEigenSolver<Matrix> es(v);
    if (es.info() != Eigen::Success) {
        throw invalid_state_error("symplectic_eigenvalues: eigensolver failed");
    }
    if (es.eigenvalues()(0) <= 0.0) {
        throw invalid_state_error("symplectic_eigenvalues: matrix not positive definite");
    }
    const Matrix root =
        es.eigenvectors() * es.eigenvalues().cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
    const Matrix core = root * symplectic_form(cov.modes()) * root;
    Eigen::JacobiSVD<Matrix> svd(core);
    const Vector& sv = svd.singularValues(); // descending, each nu twice
    std::vector<double> nu(cov.modes());
    for (std::size_t k = 0; k < cov.modes(); ++k) {
        nu[k] = 0.5 * (sv(2 * static_cast<Eigen::Index>(k)) + sv(2 * static_cast<Eigen::Index>(k) + 1));
    }
    std::sort(nu.begin(), nu.end());
    return nu;
}

namespace detail {

struct TwoModeInvariants {
    long double delta; // det A + det B + 2 det C = nu_min^2 + nu_max^2
    long double det_v; // nu_min^2 nu_max^2
};

// Quad-precision accumulation: the Laplace expansion of det V cancels
// through e^{8r} orders for strongly squeezed states.
inline TwoModeInvariants two_mode_invariants(const ExtMatrix& v) {
    Quad m[4][4];
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) m[i][j] = static_cast<Quad>(v(i, j));
    }
    const auto minor2 = [&](int r0, int r1, int c0, int c1) {
        return m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0];
    };
    const Quad det_a = minor2(0, 1, 0, 1);
    const Quad det_b = minor2(2, 3, 2, 3);
    const Quad det_c = minor2(0, 1, 2, 3);
    const Quad delta = det_a + det_b + 2.0L * det_c;
    const Quad det_v = minor2(0, 1, 0, 1) * minor2(2, 3, 2, 3) -
                       minor2(0, 1, 0, 2) * minor2(2, 3, 1, 3) +
                       minor2(0, 1, 0, 3) * minor2(2, 3, 1, 2) +
                       minor2(0, 1, 1, 2) * minor2(2, 3, 0, 3) -
                       minor2(0, 1, 1, 3) * minor2(2, 3, 0, 2) +
                       minor2(0, 1, 2, 3) * minor2(2, 3, 0, 1);
    return {static_cast<long double>(delta), static_cast<long double>(det_v)};
}

} // namespace detail

// Closed-form two-mode route via the symplectic invariants:
//   nu_{min,max}^2 = (Delta -/+ sqrt(Delta^2 - 4 det V)) / 2.
// nu_min uses the conjugate form 2 det V / (Delta + sqrt(...)), which
// stays accurate when Delta and det V span many orders. Returns
// {nu_min, nu_max}.
inline std::pair<double, double> symplectic_eigenvalues_two_mode(const CovarianceMatrix& cov) {
    if (cov.modes() != 2) {
        throw std::invalid_argument("symplectic_eigenvalues_two_mode: needs a 2-mode covariance");
    }
    const auto [delta, det_v] = detail::two_mode_invariants(cov.extended());
    const long double disc = std::max(delta * delta - 4.0L * det_v, 0.0L);
    const long double root = std::sqrt(disc);
    const long double hi2 = std::max(0.5L * (delta + root), 0.0L);
    const long double lo2 =
        (delta + root > 0.0L) ? std::max(2.0L * det_v / (delta + root), 0.0L) : 0.0L;
    return {static_cast<double>(std::sqrt(lo2)), static_cast<double>(std::sqrt(hi2))};
}

// All symplectic eigenvalues >= 1/2 - tol and V positive definite.
// The two-mode test uses the split-free product form
//   (nu_min^2 - 1/4)(nu_max^2 - 1/4) >= 0:
// resolving nu_min itself near a degenerate pair is half-order
// ill-conditioned, the product is not.
inline bool is_physical(const CovarianceMatrix& cov, double tol = phys_eigen_tol) {
    Eigen::LLT<Matrix> llt(cov.matrix());
    if (llt.info() != Eigen::Success) return false;
    if (cov.modes() == 2) {
        const auto [delta, det_v] = detail::two_mode_invariants(cov.extended());
        const long double slack = static_cast<long double>(tol) * (delta + 1.0L);
        if (delta < 0.5L - 4.0L * slack) return false;
        return det_v - 0.25L * delta + 0.0625L >= -slack;
    }
    const auto nu = symplectic_eigenvalues(cov);
    return nu.front() >= 0.5 - tol;
}

inline void require_physical(const CovarianceMatrix& cov, double tol = phys_eigen_tol,
                             const char* who = "require_physical") {
    if (!is_physical(cov, tol)) {
        throw invalid_state_error(std::string(who) + ": covariance violates the uncertainty relation");
    }
}

// --------------------------- partial transpose -------------------------

// P V P where P flips the sign of the selected mode's momentum row/column.
// Involutive. `mode` is 0-based.
inline CovarianceMatrix partial_transpose(const CovarianceMatrix& cov, std::size_t mode) {
    if (mode >= cov.modes()) {
        throw std::out_of_range("partial_transpose: mode index out of range");
    }
    ExtMatrix v = cov.extended();
    const auto p = static_cast<Eigen::Index>(2 * mode + 1);
    v.row(p) *= -1.0L;
    v.col(p) *= -1.0L;
    return CovarianceMatrix(std::move(v));
}

// --------------------------- logarithmic negativity --------------------

// E_N = max{0, -ln(2 nu_min)} with nu_min the smallest symplectic
// eigenvalue of the partially transposed covariance. nu_min within
// phys_eigen_tol of 1/2 counts as separable and yields exactly 0.
inline double log_negativity(const CovarianceMatrix& cov) {
    if (cov.modes() != 2) {
        throw std::invalid_argument("log_negativity: needs a 2-mode covariance");
    }
    require_physical(cov, dynamic_phys_tol, "log_negativity");
    const double nu_min = symplectic_eigenvalues_two_mode(partial_transpose(cov, 1)).first;
    if (nu_min >= 0.5 - phys_eigen_tol) return 0.0;
    return -std::log(2.0 * nu_min);
}

// --------------------------- +/- normal coordinates --------------------

enum class BasisDirection { to_pm, from_pm };

// Orthogonal symplectic point transform x_+- = (x_1 +- x_2)/sqrt(2),
// p_+- = (p_1 +- p_2)/sqrt(2), mapping (x_1,p_1,x_2,p_2) -> (x_-,p_-,x_+,p_+).
inline Matrix pm_rotation() {
    Matrix r(4, 4);
    const double c = 1.0 / std::sqrt(2.0);
    r << c, 0, -c, 0,
         0, c, 0, -c,
         c, 0, c, 0,
         0, c, 0, c;
    return r;
}

namespace detail {

inline ExtMatrix pm_rotation_ext() {
    ExtMatrix r = ExtMatrix::Zero(4, 4);
    const long double c = 1.0L / std::sqrt(2.0L);
    r(0, 0) = c; r(0, 2) = -c;
    r(1, 1) = c; r(1, 3) = -c;
    r(2, 0) = c; r(2, 2) = c;
    r(3, 1) = c; r(3, 3) = c;
    return r;
}

} // namespace detail

inline CovarianceMatrix basis_change_pm(const CovarianceMatrix& cov, BasisDirection direction) {
    if (cov.modes() != 2) {
        throw std::invalid_argument("basis_change_pm: needs a 2-mode covariance");
    }
    const ExtMatrix r = detail::pm_rotation_ext();
    ExtMatrix v = (direction == BasisDirection::to_pm)
                      ? ExtMatrix(r * cov.extended() * r.transpose())
                      : ExtMatrix(r.transpose() * cov.extended() * r);
    return CovarianceMatrix(std::move(v));
}

// --------------------------- initial states ----------------------------

enum class StateKind { two_mode_squeezed, separable_squeezed, coherent };

// Initial-state recipe: squeezing r >= 0 at reference mass m and frequency
// omega. For kind == coherent the covariance is the vacuum one
// (displacements do not affect any quantity computed here).
struct InitialStateSpec {
    StateKind kind = StateKind::two_mode_squeezed;
    double r = 0.0;
    double m = 1.0;
    double omega = 1.0;
};

// Two-mode squeezed: minimum-uncertainty state with
//   m w dx_+ / dp_+ = dp_- / (m w dx_-) = exp(2r),
// i.e. squeezed in x_- and p_+ for r > 0. Separable squeezed: per
// oscillator m w dx_i / dp_i = exp(2r), no correlations.
inline CovarianceMatrix make_initial_state(const InitialStateSpec& spec) {
    if (spec.r < 0.0) throw std::invalid_argument("make_initial_state: r must be >= 0");
    if (spec.m <= 0.0 || spec.omega <= 0.0) {
        throw std::invalid_argument("make_initial_state: m and omega must be > 0");
    }
    const long double mw = static_cast<long double>(spec.m) * static_cast<long double>(spec.omega);
    const long double e2r = std::exp(2.0L * static_cast<long double>(spec.r));
    switch (spec.kind) {
        case StateKind::two_mode_squeezed: {
            ExtMatrix pm = ExtMatrix::Zero(4, 4);
            pm(0, 0) = 0.5L / (mw * e2r); // dx_-^2
            pm(1, 1) = 0.5L * mw * e2r;   // dp_-^2
            pm(2, 2) = 0.5L * e2r / mw;   // dx_+^2
            pm(3, 3) = 0.5L * mw / e2r;   // dp_+^2
            return basis_change_pm(CovarianceMatrix(std::move(pm)), BasisDirection::from_pm);
        }
        case StateKind::separable_squeezed: {
            ExtMatrix v = ExtMatrix::Zero(4, 4);
            v(0, 0) = v(2, 2) = 0.5L * e2r / mw;
            v(1, 1) = v(3, 3) = 0.5L * mw / e2r;
            return CovarianceMatrix(std::move(v));
        }
        case StateKind::coherent:
            return CovarianceMatrix::vacuum(2, spec.m, spec.omega);
    }
    throw std::invalid_argument("make_initial_state: unknown state kind");
}

// --------------------------- derived scalars ---------------------------

// Squeezing factor r = |ln(m w_- dx_- / dp_-) / 2| read off the x_-
// marginal dispersions.
inline double squeezing_of(const CovarianceMatrix& cov, double m, double omega_minus) {
    if (cov.modes() != 2) throw std::invalid_argument("squeezing_of: needs a 2-mode covariance");
    if (m <= 0.0 || omega_minus <= 0.0) {
        throw std::invalid_argument("squeezing_of: m and omega_minus must be > 0");
    }
    const CovarianceMatrix pm = basis_change_pm(cov, BasisDirection::to_pm);
    const long double dx2 = pm.extended()(0, 0);
    const long double dp2 = pm.extended()(1, 1);
    if (!(dx2 > 0.0L) || !(dp2 > 0.0L)) {
        throw invalid_state_error("squeezing_of: degenerate x_- dispersions");
    }
    const long double mw = static_cast<long double>(m) * static_cast<long double>(omega_minus);
    return static_cast<double>(std::abs(0.25L * std::log(mw * mw * dx2 / dp2)));
}

// Purity 1 / (2^k sqrt(det V_sub)) of the marginal on the given modes.
// Equals 1 iff the marginal is pure.
inline double marginal_purity(const CovarianceMatrix& cov, const std::vector<std::size_t>& modes) {
    if (modes.empty()) throw std::invalid_argument("marginal_purity: empty mode set");
    for (std::size_t m : modes) {
        if (m >= cov.modes()) throw std::out_of_range("marginal_purity: mode index out of range");
    }
    const auto k = static_cast<Eigen::Index>(modes.size());
    ExtMatrix sub(2 * k, 2 * k);
    for (Eigen::Index a = 0; a < k; ++a) {
        for (Eigen::Index b = 0; b < k; ++b) {
            const auto ia = static_cast<Eigen::Index>(2 * modes[static_cast<std::size_t>(a)]);
            const auto ib = static_cast<Eigen::Index>(2 * modes[static_cast<std::size_t>(b)]);
            sub.block(2 * a, 2 * b, 2, 2) = cov.extended().block(ia, ib, 2, 2);
        }
    }
    const long double det = sub.determinant();
    if (!(det > 0.0L)) throw invalid_state_error("marginal_purity: marginal not positive definite");
    return static_cast<double>(1.0L / (std::pow(2.0L, static_cast<long double>(k)) * std::sqrt(det)));
}

} // namespace qbm

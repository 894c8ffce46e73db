// phases.hpp — Long-time fate of the entanglement for the resonant model:
// phase-boundary quantities, the SD / SDR / NSD classifier, asymptotic
// negativity, and phase-diagram scans.
//
// With b_lo = r_crit - S_r and b_hi = r_crit + S_r the initial squeezing r
// falls into: NSD for r > b_hi or (b_lo > 0 and r < b_lo); SD for
// b_lo < 0 and r < -b_lo; SDR otherwise (boundary ties included).

#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "qbm/equilibrium.hpp"
#include "qbm/series.hpp"

namespace qbm {

// Boundary quantities at one temperature, built from the asymptotic x_+
// dispersions:
//   S_r   = ln(2 dx_+ dp_+) / 2        (entropy-like broadening)
//   r_crit = |ln(m O_- dx_+ / dp_+)| / 2 (equilibrium squeezing of x_+)
//   E_c   = ln(1 / (2 m O_- dx_+^2)) / 2.
// The identity E_c = r_crit - S_r holds when dp_+ >= m O_- dx_+ (asserted
// at construction; the studied ohmic regimes satisfy it).
struct BoundaryQuantities {
    double temperature = 0.0;
    double dx_plus = 0.0;
    double dp_plus = 0.0;
    double s_r = 0.0;
    double r_crit = 0.0;
    double e_c = 0.0;
    double omega_minus = 0.0;
    double mass = 1.0;

    double band_lo() const { return r_crit - s_r; }
    double band_hi() const { return r_crit + s_r; }
};

inline BoundaryQuantities boundaries_from_dispersions(double dx_plus, double dp_plus, double mass,
                                                      double omega_minus, double temperature) {
    if (!(dx_plus > 0.0) || !(dp_plus > 0.0)) {
        throw std::invalid_argument("boundaries: dispersions must be > 0");
    }
    BoundaryQuantities b;
    b.temperature = temperature;
    b.dx_plus = dx_plus;
    b.dp_plus = dp_plus;
    b.mass = mass;
    b.omega_minus = omega_minus;
    b.s_r = 0.5 * std::log(2.0 * dx_plus * dp_plus);
    b.r_crit = std::abs(0.5 * std::log(mass * omega_minus * dx_plus / dp_plus));
    b.e_c = 0.5 * std::log(1.0 / (2.0 * mass * omega_minus * dx_plus * dx_plus));
    if (dp_plus < mass * omega_minus * dx_plus) {
        throw invalid_state_error(
            "boundaries: dp_+ < m Omega_- dx_+; the closed-form phase boundaries assume the "
            "momentum-broadened branch and are not valid for these parameters");
    }
    return b;
}

inline BoundaryQuantities boundaries(const NormalModeDecomposition& decomp, double temperature) {
    const ModelParams& p = decomp.params();
    if (!p.resonant()) {
        throw std::invalid_argument("boundaries: phase boundaries are defined for the resonant model");
    }
    auto [dx, dp] = equilibrium_dispersions(decomp, temperature);
    return boundaries_from_dispersions(dx, dp, p.mass, p.omega_minus(), temperature);
}

inline Phase classify(double r, const BoundaryQuantities& b) {
    if (r < 0.0) throw std::invalid_argument("classify: r must be >= 0");
    const double lo = b.band_lo();
    const double hi = b.band_hi();
    Phase phase;
    if ((lo > 0.0 && r < lo) || r > hi) phase = Phase::NSD;
    else if (lo < 0.0 && r < -lo) phase = Phase::SD;
    else phase = Phase::SDR;

    // the interval form must reproduce the three defining inequalities
    // (NSD: |r - r_crit| > S_r; SDR: |E_c| <= r <= ln(2 dp_+^2 / m O_-)/2;
    // SD: r <= -E_c), with boundary ties resolved as SDR
    const double sdr_hi = 0.5 * std::log(2.0 * b.dp_plus * b.dp_plus / (b.mass * b.omega_minus));
    const bool nsd_f = std::abs(r - b.r_crit) > b.s_r;
    const bool sdr_f = std::abs(b.e_c) <= r && r <= sdr_hi;
    const bool sd_f = r <= -b.e_c;
    const Phase by_formula = sdr_f ? Phase::SDR : (nsd_f ? Phase::NSD : (sd_f ? Phase::SD : Phase::SDR));
    if (by_formula != phase) {
        // the two routes may only differ within rounding of a boundary
        const double gap = std::min({std::abs(r - std::abs(b.e_c)), std::abs(r - sdr_hi),
                                     std::abs(r - lo), std::abs(r - hi), std::abs(r + lo)});
        if (gap > 1e-9) {
            throw std::logic_error(
                "classify: interval classifier disagrees with the defining inequalities");
        }
    }
    return phase;
}

// Mean and oscillation amplitude of the late-time negativity:
//   E~_N = max{r, r_crit} - S_r,  dE_N = min{r, r_crit};
// E_N(t) -> max{0, E~_N + dE_N G(t)} with G periodic of period pi / O_-.
struct AsymptoticNegativity {
    double mean = 0.0;
    double amplitude = 0.0;
};

inline AsymptoticNegativity asymptotic_negativity(double r, const BoundaryQuantities& b) {
    if (r < 0.0) throw std::invalid_argument("asymptotic_negativity: r must be >= 0");
    return {std::max(r, b.r_crit) - b.s_r, std::min(r, b.r_crit)};
}

struct PhasePoint {
    double r = 0.0;
    double temperature = 0.0;
    Phase phase = Phase::undecided;
    double e_mean = 0.0; // E~_N
    double e_amp = 0.0;  // dE_N
};

struct PhaseDiagram {
    std::vector<PhasePoint> points;           // T-major ordering
    std::vector<BoundaryQuantities> curves;   // one row per temperature
};

inline PhaseDiagram phase_diagram(const NormalModeDecomposition& decomp,
                                  const std::vector<double>& t_grid,
                                  const std::vector<double>& r_grid) {
    if (t_grid.empty() || r_grid.empty()) {
        throw std::invalid_argument("phase_diagram: grids must be nonempty");
    }
    PhaseDiagram diagram;
    diagram.curves.reserve(t_grid.size());
    diagram.points.reserve(t_grid.size() * r_grid.size());
    for (double t : t_grid) {
        const BoundaryQuantities b = boundaries(decomp, t);
        diagram.curves.push_back(b);
        for (double r : r_grid) {
            const auto asym = asymptotic_negativity(r, b);
            diagram.points.push_back({r, t, classify(r, b), asym.mean, asym.amplitude});
        }
    }
    return diagram;
}

// Temperature T* with S_r(T*) = r_crit(T*), located by bisection. Returns
// nullopt when the bracket carries no sign change.
inline std::optional<double> crossover_temperature(const NormalModeDecomposition& decomp,
                                                   double t_lo = 1e-6, double t_hi = 10.0) {
    const auto gap = [&](double t) {
        const BoundaryQuantities b = boundaries(decomp, t);
        return b.s_r - b.r_crit;
    };
    double lo = t_lo, hi = t_hi;
    double g_lo = gap(lo);
    if (g_lo == 0.0) return lo;
    if ((g_lo < 0.0) == (gap(hi) < 0.0)) return std::nullopt;
    for (int i = 0; i < 80; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double g_mid = gap(mid);
        if (g_mid == 0.0) return mid;
        if ((g_mid < 0.0) == (g_lo < 0.0)) {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

} // namespace qbm

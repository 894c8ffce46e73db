// series.hpp — Time-series analysis of E_N(t): death/revival events,
// late-window mean and amplitude, oscillation period, observed phase.

#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "qbm/propagation.hpp"

namespace qbm {

enum class Phase { SD, SDR, NSD, undecided };

inline const char* to_string(Phase p) {
    switch (p) {
        case Phase::SD: return "SD";
        case Phase::SDR: return "SDR";
        case Phase::NSD: return "NSD";
        case Phase::undecided: return "undecided";
    }
    return "undecided";
}

// E_N below this threshold counts as dead (separability boundary noise floor).
inline constexpr double death_threshold = 1e-9;

struct SeriesAnalysis {
    std::vector<double> death_times;   // downward crossings of the threshold
    std::vector<double> revival_times; // upward crossings
    double e_mean = 0.0;               // (max + min)/2 of E_N over the window
    double e_amp = 0.0;                // (max - min)/2
    double period = std::numeric_limits<double>::quiet_NaN(); // from successive maxima
    Phase phase_observed = Phase::undecided;
    double window_start = 0.0;
};

// Analyzes the trailing `window` fraction of the series. Event detection
// runs over the whole series with one-sample hysteresis: a flip across the
// threshold must persist for two consecutive samples to count.
inline SeriesAnalysis analyze_series(const std::vector<TrajectoryPoint>& series,
                                     double window = 0.25) {
    if (series.size() < 3) throw std::invalid_argument("analyze_series: series too short");
    if (!(window > 0.0) || window > 1.0) {
        throw std::invalid_argument("analyze_series: window must be in (0, 1]");
    }
    const std::size_t n = series.size();
    SeriesAnalysis out;

    bool alive = series[0].log_neg > death_threshold;
    bool ever_alive = alive;
    for (std::size_t i = 1; i < n; ++i) {
        const bool raw = series[i].log_neg > death_threshold;
        if (raw == alive) continue;
        if (i + 1 < n && (series[i + 1].log_neg > death_threshold) != raw) continue; // chatter
        alive = raw;
        ever_alive = ever_alive || raw;
        (raw ? out.revival_times : out.death_times).push_back(series[i].t);
    }

    const std::size_t w0 = (window >= 1.0) ? 0 : static_cast<std::size_t>(
        std::ceil(static_cast<double>(n) * (1.0 - window)));
    const std::size_t start = std::min(w0, n - 2);
    out.window_start = series[start].t;

    double mx = -std::numeric_limits<double>::infinity();
    double mn = std::numeric_limits<double>::infinity();
    for (std::size_t i = start; i < n; ++i) {
        mx = std::max(mx, series[i].log_neg);
        mn = std::min(mn, series[i].log_neg);
    }
    out.e_mean = 0.5 * (mx + mn);
    out.e_amp = 0.5 * (mx - mn);

    // period from successive strict maxima inside the window, refined by
    // quadratic interpolation; skipped when the series is flat
    std::vector<double> peaks;
    if (out.e_amp > 1e-6 * std::max(1.0, std::abs(out.e_mean))) {
        for (std::size_t i = std::max<std::size_t>(start, 1); i + 1 < n; ++i) {
            const double a = series[i - 1].log_neg, b = series[i].log_neg, c = series[i + 1].log_neg;
            if (b > death_threshold && b >= a && b > c) {
                double t_peak = series[i].t;
                const double denom = a - 2.0 * b + c;
                if (denom < 0.0) {
                    const double dt = 0.5 * (series[i + 1].t - series[i - 1].t);
                    t_peak += 0.5 * dt * (a - c) / denom;
                }
                peaks.push_back(t_peak);
            }
        }
    }
    if (peaks.size() >= 2) {
        out.period = (peaks.back() - peaks.front()) / static_cast<double>(peaks.size() - 1);
    }

    const bool deaths_in_window = !out.death_times.empty() && out.death_times.back() >= out.window_start;
    const bool revivals_in_window =
        !out.revival_times.empty() && out.revival_times.back() >= out.window_start;
    if (mn > death_threshold) {
        // never dead in the window; demand at least one resolved period if
        // the series visibly oscillates
        const bool oscillating = out.e_amp > 1e-6 * std::max(1.0, std::abs(out.e_mean));
        out.phase_observed = (oscillating && peaks.size() < 2) ? Phase::undecided : Phase::NSD;
    } else if (mx <= death_threshold) {
        out.phase_observed =
            (!out.death_times.empty() || !ever_alive) ? Phase::SD : Phase::undecided;
    } else if (deaths_in_window && revivals_in_window) {
        out.phase_observed = Phase::SDR;
    } else if (!alive && !out.death_times.empty() &&
               (out.revival_times.empty() || out.revival_times.back() < out.death_times.back())) {
        // died inside the window and never came back
        out.phase_observed = Phase::SD;
    } else {
        out.phase_observed = Phase::undecided;
    }
    return out;
}

} // namespace qbm

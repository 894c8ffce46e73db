// runner.hpp — Drivers behind the CLI subcommands: evolve, phase-diagram,
// detune and equilibrium. Each returns a documented exit code (0 success,
// 2 invalid configuration, 3 recurrence-guard violation, 4 numerical
// failure) and writes its output files atomically.

#pragma once

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "qbm/config.hpp"
#include "qbm/io.hpp"
#include "qbm/phases.hpp"
#include "qbm/series.hpp"

namespace qbm {

inline constexpr int exit_ok = 0;
inline constexpr int exit_config = 2;
inline constexpr int exit_recurrence = 3;
inline constexpr int exit_numerical = 4;

struct RunOptions {
    std::size_t threads = 1;
    bool gnuplot = false;
};

namespace detail {

// Index-parallel loop; results must be written into pre-sized slots so the
// output is identical for any thread count.
template <typename Fn>
inline void parallel_for(std::size_t count, std::size_t threads, Fn&& fn) {
    threads = std::max<std::size_t>(1, std::min(threads, count));
    if (threads == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

inline int map_exception_to_exit(const char* job) {
    try {
        throw;
    } catch (const config_error& e) {
        std::cerr << job << ": " << e.what() << "\n";
        return exit_config;
    } catch (const std::invalid_argument& e) {
        std::cerr << job << ": " << e.what() << "\n";
        return exit_config;
    } catch (const recurrence_error& e) {
        std::cerr << job << ": " << e.what() << "\n";
        return exit_recurrence;
    } catch (const invalid_state_error& e) {
        std::cerr << job << ": " << e.what() << "\n";
        return exit_numerical;
    } catch (const numerical_error& e) {
        std::cerr << job << ": " << e.what() << "\n";
        return exit_numerical;
    } catch (const std::exception& e) {
        std::cerr << job << ": unexpected error: " << e.what() << "\n";
        return 1;
    }
}

inline void guard_recurrence(const RunConfig& cfg, const DiscretizedBath& bath) {
    const double horizon = 0.5 * bath.recurrence_time();
    if (cfg.run.t_max >= horizon) {
        throw recurrence_error("run.t_max = " + format_double(cfg.run.t_max) +
                               " exceeds half the bath recurrence time " +
                               format_double(bath.recurrence_time()) +
                               "; increase bath.n_modes or shorten the run");
    }
}

inline std::string path_with_tag(const std::string& path, const std::string& tag) {
    const std::filesystem::path p(path);
    std::filesystem::path q = p;
    const std::string ext = p.extension().string();
    q.replace_extension();
    return q.string() + tag + ext;
}

inline Json analysis_json(const SeriesAnalysis& a) {
    Json j;
    j["phase_observed"] = to_string(a.phase_observed);
    j["E_mean"] = a.e_mean;
    j["E_amp"] = a.e_amp;
    if (std::isnan(a.period)) j["period"] = nullptr;
    else j["period"] = a.period;
    j["death_times"] = a.death_times;
    j["revival_times"] = a.revival_times;
    j["window_start"] = a.window_start;
    j["threshold"] = death_threshold;
    return j;
}

inline std::string table_json(const std::vector<std::string>& columns,
                              const std::vector<std::vector<double>>& rows) {
    Json j;
    j["columns"] = columns;
    j["rows"] = rows;
    return j.dump(2) + "\n";
}

inline void write_table(const std::string& path, const std::string& format,
                        const std::vector<std::string>& columns,
                        const std::vector<std::vector<double>>& rows) {
    if (format == "json") {
        write_file_atomic(path, table_json(columns, rows));
        return;
    }
    std::string text = csv_header(columns);
    for (const auto& row : rows) text += csv_row(row);
    write_file_atomic(path, text);
}

} // namespace detail

// ------------------------------ evolve ---------------------------------

inline int run_evolve(const RunConfig& cfg, const RunOptions& options = {}) {
    try {
        validate(cfg);
        const ModelParams params = model_of(cfg);
        DiscretizedBath bath = discretize(params.spectral, params.n_bath);
        detail::guard_recurrence(cfg, bath);
        const NormalModeDecomposition decomp(params, std::move(bath));
        const auto init = InitialCondition::thermal(make_initial_state(initial_of(cfg)),
                                                    decomp.bath(), cfg.temperature);
        const auto traj = propagate(decomp, init, time_grid(cfg.run.t_max, cfg.run.dt_out));
        const SeriesAnalysis analysis = analyze_series(traj, cfg.run.window);

        std::vector<std::vector<double>> rows;
        rows.reserve(traj.size());
        for (const auto& pt : traj) {
            rows.push_back({pt.t, pt.log_neg, pt.var_x_minus, pt.var_p_minus, pt.var_x_plus,
                            pt.var_p_plus, pt.purity_minus});
        }
        detail::write_table(cfg.output.path, cfg.output.format,
                            {"t", "E_N", "var_xm", "var_pm", "var_xp", "var_pp", "purity_minus"},
                            rows);
        write_json_atomic(with_suffix(cfg.output.path, ".analysis.json"),
                          detail::analysis_json(analysis));
        if (options.gnuplot) {
            std::string gp = "set datafile separator ','\nset key autotitle columnhead\n";
            gp += "set xlabel 't'\nset ylabel 'E_N'\n";
            gp += "plot '" + cfg.output.path + "' using 1:2 with lines\n";
            write_file_atomic(with_suffix(cfg.output.path, ".gp"), gp);
        }
        return exit_ok;
    } catch (...) {
        return detail::map_exception_to_exit("evolve");
    }
}

// --------------------------- phase diagram -----------------------------

inline int run_phase_diagram(const RunConfig& cfg, const RunOptions& options = {}) {
    try {
        validate(cfg);
        const ModelParams params = model_of(cfg);
        if (!params.resonant()) {
            throw config_error("phase-diagram: requires a resonant model (omega1 == omega2)");
        }
        const auto t_grid = parse_grid(cfg.phase.t_grid, "phase.t_grid");
        const auto r_grid = parse_grid(cfg.phase.r_grid, "phase.r_grid");
        for (std::size_t i = 1; i < t_grid.size(); ++i) {
            if (t_grid[i] <= t_grid[i - 1]) throw config_error("phase.t_grid must be ascending");
        }
        for (std::size_t i = 1; i < r_grid.size(); ++i) {
            if (r_grid[i] <= r_grid[i - 1]) throw config_error("phase.r_grid must be ascending");
        }
        const NormalModeDecomposition decomp(params);

        std::vector<BoundaryQuantities> curves(t_grid.size());
        detail::parallel_for(t_grid.size(), options.threads,
                             [&](std::size_t i) { curves[i] = boundaries(decomp, t_grid[i]); });

        std::string grid_csv = csv_header({"T", "r", "phase", "E_mean", "E_amp"});
        std::vector<std::string> grid_cols = {"T", "r", "phase", "E_mean", "E_amp"};
        Json json_rows = Json::array();
        for (std::size_t i = 0; i < t_grid.size(); ++i) {
            for (double r : r_grid) {
                const Phase phase = classify(r, curves[i]);
                const auto asym = asymptotic_negativity(r, curves[i]);
                grid_csv += format_double(t_grid[i]) + "," + format_double(r) + "," +
                            to_string(phase) + "," + format_double(asym.mean) + "," +
                            format_double(asym.amplitude) + "\n";
                if (cfg.output.format == "json") {
                    json_rows.push_back({{"T", t_grid[i]},
                                         {"r", r},
                                         {"phase", to_string(phase)},
                                         {"E_mean", asym.mean},
                                         {"E_amp", asym.amplitude}});
                }
            }
        }
        if (cfg.output.format == "json") {
            write_file_atomic(cfg.output.path, Json(json_rows).dump(2) + "\n");
        } else {
            write_file_atomic(cfg.output.path, grid_csv);
        }
        std::vector<std::vector<double>> brows;
        brows.reserve(curves.size());
        for (const auto& b : curves) {
            brows.push_back({b.temperature, b.s_r, b.r_crit, b.e_c});
        }
        detail::write_table(detail::path_with_tag(cfg.output.path, "_boundaries"), cfg.output.format,
                            {"T", "S_r", "r_crit", "E_c"}, brows);
        if (options.gnuplot) {
            const std::string bpath = detail::path_with_tag(cfg.output.path, "_boundaries");
            std::string gp = "set datafile separator ','\nset key autotitle columnhead\n";
            gp += "set xlabel 'T'\nset ylabel 'r'\n";
            gp += "plot '" + bpath + "' using 1:2 with lines, '" + bpath +
                  "' using 1:3 with lines, '" + bpath + "' using 1:4 with lines\n";
            write_file_atomic(with_suffix(cfg.output.path, ".gp"), gp);
        }
        return exit_ok;
    } catch (...) {
        return detail::map_exception_to_exit("phase-diagram");
    }
}

// ------------------------------ detune ---------------------------------

inline int run_detune(const RunConfig& cfg, const RunOptions& options = {}) {
    try {
        validate(cfg);
        if (state_kind_of(cfg) != StateKind::separable_squeezed) {
            throw config_error("detune: initial.kind must be separable_squeezed");
        }
        const auto omega2_grid = parse_grid(cfg.detune.omega2_grid, "detune.omega2_grid");
        const auto snapshots = parse_grid(cfg.detune.snapshots, "detune.snapshots");
        const auto times = time_grid(cfg.run.t_max, cfg.run.dt_out);
        std::vector<std::size_t> snap_idx;
        for (double s : snapshots) {
            if (s < 0.0 || s > cfg.run.t_max) {
                throw config_error("detune: snapshot time " + format_double(s) +
                                   " outside [0, run.t_max]");
            }
            snap_idx.push_back(static_cast<std::size_t>(std::llround(s / cfg.run.dt_out)));
        }
        {
            // all scan members share the bath, so one guard suffices
            const auto bath = discretize(model_of(cfg).spectral, cfg.bath.n_modes);
            detail::guard_recurrence(cfg, bath);
        }

        std::vector<std::vector<double>> en_per_omega2(omega2_grid.size());
        detail::parallel_for(omega2_grid.size(), options.threads, [&](std::size_t i) {
            ModelParams params = model_of(cfg);
            params.omega2 = omega2_grid[i];
            const NormalModeDecomposition decomp(params);
            const auto init = InitialCondition::thermal(make_initial_state(initial_of(cfg)),
                                                        decomp.bath(), cfg.temperature);
            const auto traj = propagate(decomp, init, times);
            std::vector<double> en(traj.size());
            for (std::size_t k = 0; k < traj.size(); ++k) en[k] = traj[k].log_neg;
            en_per_omega2[i] = std::move(en);
        });

        std::vector<std::string> cols_a = {"t"};
        for (double w2 : omega2_grid) cols_a.push_back("EN_w2_" + format_double(w2));
        std::vector<std::vector<double>> rows_a(times.size());
        for (std::size_t k = 0; k < times.size(); ++k) {
            rows_a[k].reserve(1 + omega2_grid.size());
            rows_a[k].push_back(times[k]);
            for (std::size_t i = 0; i < omega2_grid.size(); ++i) {
                rows_a[k].push_back(en_per_omega2[i][k]);
            }
        }
        detail::write_table(cfg.output.path, cfg.output.format, cols_a, rows_a);

        std::vector<std::string> cols_b = {"omega2"};
        for (double s : snapshots) cols_b.push_back("EN_t_" + format_double(s));
        std::vector<std::vector<double>> rows_b(omega2_grid.size());
        for (std::size_t i = 0; i < omega2_grid.size(); ++i) {
            rows_b[i].push_back(omega2_grid[i]);
            for (std::size_t si : snap_idx) rows_b[i].push_back(en_per_omega2[i][si]);
        }
        detail::write_table(detail::path_with_tag(cfg.output.path, "_snapshots"), cfg.output.format,
                            cols_b, rows_b);
        if (options.gnuplot) {
            std::string gp = "set datafile separator ','\nset key autotitle columnhead\n";
            gp += "set xlabel 'omega2'\nset ylabel 'E_N'\n";
            gp += "plot for [col=2:" + std::to_string(1 + snapshots.size()) + "] '" +
                  detail::path_with_tag(cfg.output.path, "_snapshots") +
                  "' using 1:col with lines\n";
            write_file_atomic(with_suffix(cfg.output.path, ".gp"), gp);
        }
        return exit_ok;
    } catch (...) {
        return detail::map_exception_to_exit("detune");
    }
}

// ---------------------------- equilibrium ------------------------------

inline int run_equilibrium(const RunConfig& cfg, const RunOptions& options = {}) {
    (void)options;
    try {
        validate(cfg);
        const ModelParams params = model_of(cfg);
        if (!params.resonant()) {
            throw config_error("equilibrium: requires a resonant model (omega1 == omega2)");
        }
        const NormalModeDecomposition decomp(params);
        const auto [dx, dp] = equilibrium_dispersions(decomp, cfg.temperature);
        const BoundaryQuantities b = boundaries_from_dispersions(dx, dp, params.mass,
                                                                 params.omega_minus(),
                                                                 cfg.temperature);
        Json report;
        report["T"] = cfg.temperature;
        report["omega_minus"] = params.omega_minus();
        report["gamma"] = 2.0 * params.spectral.gamma0;
        report["delta_x_plus"] = dx;
        report["delta_p_plus"] = dp;
        if (params.spectral.kind == BathKind::ohmic) {
            const auto [dxf, dpf] =
                equilibrium_dispersions_fd(params.spectral, params.omega1, cfg.temperature);
            report["delta_x_plus_fd"] = dxf;
            report["delta_p_plus_fd"] = dpf;
        } else {
            report["delta_x_plus_fd"] = nullptr;
            report["delta_p_plus_fd"] = nullptr;
        }
        if (params.spectral.gamma0 > 0.0) {
            const ReducedCoefficients coeffs = asymptotic_coefficients(
                dx, dp, 2.0 * params.spectral.gamma0, params.mass, params.omega1);
            report["D"] = coeffs.diffusion;
            report["f"] = coeffs.anomalous;
        } else {
            report["D"] = nullptr;
            report["f"] = nullptr;
        }
        report["S_r"] = b.s_r;
        report["r_crit"] = b.r_crit;
        report["E_c"] = b.e_c;
        const auto t_star = crossover_temperature(decomp);
        if (t_star) report["T_star"] = *t_star;
        else report["T_star"] = nullptr;
        write_json_atomic(cfg.output.path, report);
        return exit_ok;
    } catch (...) {
        return detail::map_exception_to_exit("equilibrium");
    }
}

} // namespace qbm

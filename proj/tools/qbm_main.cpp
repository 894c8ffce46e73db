// qbm_main.cpp — Command-line driver. Subcommands: evolve, phase-diagram,
// detune, equilibrium. Configuration precedence: --key=value overrides >
// --config file > built-in defaults (the standard ohmic parameter set).

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "qbm/qbm.hpp"

namespace {

std::size_t default_threads() {
    if (const char* env = std::getenv("QBM_THREADS")) {
        try {
            const long n = std::stol(env);
            if (n >= 1) return static_cast<std::size_t>(n);
        } catch (const std::exception&) {
            // fall through to hardware default
        }
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

qbm::ConfigMap overrides_from_extras(const std::vector<std::string>& extras) {
    qbm::ConfigMap map;
    for (const auto& arg : extras) {
        std::string body = arg;
        if (body.rfind("--", 0) == 0) body = body.substr(2);
        const std::size_t eq = body.find('=');
        if (body.empty() || eq == std::string::npos || eq == 0) {
            throw qbm::config_error("expected --key=value override, got '" + arg + "'");
        }
        map[body.substr(0, eq)] = body.substr(eq + 1);
    }
    return map;
}

qbm::RunConfig load_config(const std::string& config_path, const qbm::ConfigMap& overrides) {
    qbm::RunConfig cfg;
    if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) throw qbm::config_error("cannot open config file '" + config_path + "'");
        std::stringstream buffer;
        buffer << in.rdbuf();
        cfg = qbm::config_from_map(qbm::parse_config_text(buffer.str()), cfg);
    }
    cfg = qbm::config_from_map(overrides, cfg);
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exact entanglement dynamics of two oscillators in a common bosonic bath"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_path;
    std::string format;
    qbm::RunOptions options;
    options.threads = default_threads();

    app.add_option("--config", config_path, "key=value configuration file");
    app.add_option("--out", out_path, "output file path (overrides output.path)");
    app.add_option("--format", format, "output format: csv or json");
    app.add_option("--threads", options.threads, "worker threads for grid scans");
    app.add_flag("--gnuplot", options.gnuplot, "emit a companion gnuplot script");

    auto* evolve = app.add_subcommand("evolve", "time evolution of E_N and the dispersions");
    auto* phase = app.add_subcommand("phase-diagram", "SD/SDR/NSD phases over a (T, r) grid");
    auto* detune = app.add_subcommand("detune", "E_N across an omega2 scan with snapshots");
    auto* equilibrium = app.add_subcommand("equilibrium", "asymptotic dispersions and boundaries");
    std::string t_grid, r_grid, omega2_grid, snapshots;
    phase->add_option("--T-grid", t_grid, "temperature grid (list or start:stop:count)");
    phase->add_option("--r-grid", r_grid, "squeezing grid (list or start:stop:count)");
    detune->add_option("--omega2-grid", omega2_grid, "omega2 grid (list or start:stop:count)");
    detune->add_option("--snapshots", snapshots, "snapshot times for the omega2 profile");
    for (auto* sub : {evolve, phase, detune, equilibrium}) sub->allow_extras();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : qbm::exit_config;
    }

    try {
        CLI::App* sub = app.get_subcommands().front();
        const auto overrides = overrides_from_extras(sub->remaining());
        qbm::RunConfig cfg = load_config(config_path, overrides);
        if (!out_path.empty()) cfg.output.path = out_path;
        if (!format.empty()) cfg.output.format = format;
        if (!t_grid.empty()) cfg.phase.t_grid = t_grid;
        if (!r_grid.empty()) cfg.phase.r_grid = r_grid;
        if (!omega2_grid.empty()) cfg.detune.omega2_grid = omega2_grid;
        if (!snapshots.empty()) cfg.detune.snapshots = snapshots;

        if (sub->get_name() == "evolve") return qbm::run_evolve(cfg, options);
        if (sub->get_name() == "phase-diagram") return qbm::run_phase_diagram(cfg, options);
        if (sub->get_name() == "detune") return qbm::run_detune(cfg, options);
        if (sub->get_name() == "equilibrium") return qbm::run_equilibrium(cfg, options);
        std::cerr << "unknown subcommand\n";
        return qbm::exit_config;
    } catch (const qbm::config_error& e) {
        std::cerr << "qbm: " << e.what() << "\n";
        return qbm::exit_config;
    } catch (const std::exception& e) {
        std::cerr << "qbm: unexpected error: " << e.what() << "\n";
        return 1;
    }
}

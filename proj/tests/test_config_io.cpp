#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

#include "qbm/config.hpp"
#include "qbm/io.hpp"
#include "qbm/runner.hpp"

using namespace qbm;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

namespace fs = std::filesystem;

fs::path test_dir() {
    static const fs::path dir = [] {
        auto d = fs::temp_directory_path() / "qbm_io_tests";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RunConfig tiny_config(const std::string& tag) {
    RunConfig cfg;
    cfg.bath.n_modes = 64;
    cfg.run.t_max = 8.0;
    cfg.run.dt_out = 0.1;
    cfg.temperature = 0.5;
    cfg.output.path = (test_dir() / (tag + ".csv")).string();
    return cfg;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(QBM_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    return WEXITSTATUS(status);
}

} // namespace

TEST_CASE("config text parsing") {
    const std::string text =
        "# reference parameters\n"
        "[model]\n"
        "omega1 = 1.5\n"
        "omega2 = 1.5\n"
        "[bath]\n"
        "gamma0 = 0.2   # stronger damping\n"
        "temperature = 2.0\n"
        "run.t_max = 12\n";
    const auto map = parse_config_text(text);
    const auto cfg = config_from_map(map);
    REQUIRE(cfg.model.omega1 == 1.5);
    REQUIRE(cfg.bath.gamma0 == 0.2);
    REQUIRE(cfg.temperature == 2.0);
    REQUIRE(cfg.run.t_max == 12.0);
    REQUIRE(cfg.model.c12 == 0.0); // untouched default

    REQUIRE_THROWS_AS(parse_config_text("nonsense line\n"), config_error);
    REQUIRE_THROWS_AS(config_from_map({{"model.bogus", "1"}}), config_error);
    REQUIRE_THROWS_AS(config_from_map({{"model.omega1", "fast"}}), config_error);
    REQUIRE_THROWS_AS(config_from_map({{"bath.n_modes", "2.5"}}), config_error);
}

TEST_CASE("config round trip") {
    RunConfig cfg;
    cfg.model.omega2 = 1.25;
    cfg.bath.gamma0 = 0.07;
    cfg.bath.n_modes = 123;
    cfg.initial.kind = "separable_squeezed";
    cfg.initial.r = 2.75;
    cfg.phase.t_grid = "0:5:11";
    const auto text = serialize_config(cfg);
    const auto parsed = config_from_map(parse_config_text(text));
    REQUIRE(config_to_map(parsed) == config_to_map(cfg));
}

TEST_CASE("grid expressions") {
    const auto lin = parse_grid("0:10:21");
    REQUIRE(lin.size() == 21);
    REQUIRE(lin.front() == 0.0);
    REQUIRE(lin.back() == 10.0);
    REQUIRE_THAT(lin[1], WithinAbs(0.5, 1e-15));

    const auto list = parse_grid("1, 2.5, 5");
    REQUIRE(list == std::vector<double>{1.0, 2.5, 5.0});

    const auto mixed = parse_grid("0.5,0.9:1.1:3,2");
    REQUIRE(mixed == std::vector<double>{0.5, 0.9, 1.0, 1.1, 2.0});

    REQUIRE_THROWS_AS(parse_grid("1:2"), config_error);
    REQUIRE_THROWS_AS(parse_grid("a,b"), config_error);
    REQUIRE_THROWS_AS(parse_grid(""), config_error);
    REQUIRE_THROWS_AS(parse_grid("0:1:0"), config_error);
}

TEST_CASE("config validation") {
    RunConfig cfg = tiny_config("validate");
    cfg.output.format = "xml";
    REQUIRE_THROWS_AS(validate(cfg), config_error);
    cfg = tiny_config("validate");
    cfg.initial.kind = "thermal";
    REQUIRE_THROWS_AS(validate(cfg), config_error);
    cfg = tiny_config("validate");
    cfg.bath.kind = "lorentzian";
    REQUIRE_THROWS_AS(validate(cfg), config_error);
    cfg = tiny_config("validate");
    cfg.initial.r = -1.0;
    REQUIRE_THROWS_AS(validate(cfg), config_error);
    cfg = tiny_config("validate");
    cfg.run.window = 0.0;
    REQUIRE_THROWS_AS(validate(cfg), config_error);
}

TEST_CASE("float formatting is fixed width significant") {
    REQUIRE(format_double(0.1) == "0.1");
    REQUIRE(format_double(1.0 / 3.0) == "0.333333333333");
    REQUIRE(format_double(-2.5e-13) == "-2.5e-13");
}

TEST_CASE("evolve writes trajectory, sidecar and is deterministic") {
    RunConfig cfg = tiny_config("evolve_a");
    REQUIRE(run_evolve(cfg) == exit_ok);
    const auto text_a = slurp(cfg.output.path);
    REQUIRE(text_a.rfind("t,E_N,var_xm,var_pm,var_xp,var_pp,purity_minus\n", 0) == 0);
    const auto sidecar = Json::parse(slurp(with_suffix(cfg.output.path, ".analysis.json")));
    REQUIRE(sidecar.contains("phase_observed"));
    REQUIRE(sidecar.contains("E_mean"));
    REQUIRE(sidecar.contains("death_times"));

    RunConfig cfg_b = tiny_config("evolve_b");
    REQUIRE(run_evolve(cfg_b) == exit_ok);
    REQUIRE(slurp(cfg_b.output.path) == text_a); // identical config, identical bytes

    RunConfig cfg_json = tiny_config("evolve_json");
    cfg_json.output.format = "json";
    cfg_json.output.path = (test_dir() / "evolve.json").string();
    REQUIRE(run_evolve(cfg_json) == exit_ok);
    const auto table = Json::parse(slurp(cfg_json.output.path));
    REQUIRE(table["columns"].size() == 7);
    REQUIRE(table["rows"].size() == 81);
}

TEST_CASE("evolve exit codes and atomic failure behavior") {
    RunConfig cfg = tiny_config("evolve_bad");
    cfg.output.format = "xml";
    REQUIRE(run_evolve(cfg) == exit_config);

    cfg = tiny_config("evolve_recurrence");
    cfg.run.t_max = 50.0; // horizon for 64 modes at cutoff 20 is ~10
    REQUIRE(run_evolve(cfg) == exit_recurrence);
    REQUIRE(!fs::exists(cfg.output.path)); // no partial output

    cfg = tiny_config("evolve_unstable");
    cfg.model.c12 = 2.0; // renormalized potential not positive definite
    REQUIRE(run_evolve(cfg) == exit_config);
}

TEST_CASE("phase diagram files") {
    RunConfig cfg = tiny_config("phase");
    cfg.bath.n_modes = 200;
    cfg.phase.t_grid = "0,10";
    cfg.phase.r_grid = "0:4:5";
    REQUIRE(run_phase_diagram(cfg) == exit_ok);

    const auto grid = slurp(cfg.output.path);
    std::stringstream ss(grid);
    std::string line;
    std::getline(ss, line);
    REQUIRE(line == "T,r,phase,E_mean,E_amp");
    std::vector<std::string> rows;
    while (std::getline(ss, line)) rows.push_back(line);
    REQUIRE(rows.size() == 10);
    REQUIRE(rows[0].find("NSD") != std::string::npos);  // (T=0, r=0)
    REQUIRE(rows[5].find("SD") != std::string::npos);   // (T=10, r=0)

    const auto btext = slurp(detail::path_with_tag(cfg.output.path, "_boundaries"));
    std::stringstream bs(btext);
    std::getline(bs, line);
    REQUIRE(line == "T,S_r,r_crit,E_c");
    while (std::getline(bs, line)) {
        std::stringstream row(line);
        std::string cell;
        std::vector<double> vals;
        while (std::getline(row, cell, ',')) vals.push_back(std::stod(cell));
        REQUIRE(vals.size() == 4);
        REQUIRE_THAT(vals[3], WithinAbs(vals[2] - vals[1], 1e-12)); // E_c = r_crit - S_r
    }

    cfg.model.omega2 = 1.2;
    REQUIRE(run_phase_diagram(cfg) == exit_config); // non-resonant rejected
    cfg = tiny_config("phase_grid");
    cfg.phase.t_grid = "5,1";
    REQUIRE(run_phase_diagram(cfg) == exit_config); // not ascending
}

TEST_CASE("detune files") {
    RunConfig cfg = tiny_config("detune");
    cfg.initial.kind = "separable_squeezed";
    cfg.initial.r = 1.0;
    cfg.temperature = 1.0;
    cfg.detune.omega2_grid = "1.0,1.2";
    cfg.detune.snapshots = "2,4";
    RunOptions options;
    options.threads = 2; // exercise the worker pool
    REQUIRE(run_detune(cfg, options) == exit_ok);

    const auto a = slurp(cfg.output.path);
    REQUIRE(a.rfind("t,EN_w2_1,EN_w2_1.2\n", 0) == 0);

    const auto b = slurp(detail::path_with_tag(cfg.output.path, "_snapshots"));
    std::stringstream bs(b);
    std::string line;
    std::getline(bs, line);
    REQUIRE(line == "omega2,EN_t_2,EN_t_4");
    std::vector<std::vector<double>> rows;
    while (std::getline(bs, line)) {
        std::stringstream row(line);
        std::string cell;
        std::vector<double> vals;
        while (std::getline(row, cell, ',')) vals.push_back(std::stod(cell));
        rows.push_back(vals);
    }
    REQUIRE(rows.size() == 2);
    REQUIRE(rows[0][0] == 1.0);
    REQUIRE(rows[0][2] >= rows[1][2]); // resonance dominates the late snapshot

    cfg.initial.kind = "two_mode_squeezed";
    REQUIRE(run_detune(cfg) == exit_config);
    cfg.initial.kind = "separable_squeezed";
    cfg.detune.snapshots = "2,40";
    REQUIRE(run_detune(cfg) == exit_config); // snapshot beyond t_max
}

TEST_CASE("equilibrium report") {
    RunConfig cfg = tiny_config("equilibrium");
    cfg.bath.n_modes = 200;
    cfg.temperature = 1.0;
    cfg.output.path = (test_dir() / "equilibrium.json").string();
    REQUIRE(run_equilibrium(cfg) == exit_ok);
    const auto report = Json::parse(slurp(cfg.output.path));

    const std::vector<std::string> keys = {"T",   "omega_minus",     "gamma",
                                           "D",   "f",               "delta_x_plus",
                                           "delta_p_plus",           "delta_x_plus_fd",
                                           "delta_p_plus_fd",        "S_r",
                                           "r_crit",                 "E_c",
                                           "T_star"};
    REQUIRE(report.size() == keys.size());
    for (const auto& k : keys) REQUIRE(report.contains(k));

    REQUIRE_THAT(report["E_c"].get<double>(),
                 WithinAbs(report["r_crit"].get<double>() - report["S_r"].get<double>(), 1e-12));
    REQUIRE_THAT(report["gamma"].get<double>(), WithinAbs(0.3, 1e-15));
    REQUIRE(report["T_star"].is_number());
    const double t_star = report["T_star"].get<double>();
    REQUIRE(t_star > 0.0);
    REQUIRE(t_star < 10.0);
    REQUIRE_THAT(report["delta_x_plus_fd"].get<double>(),
                 WithinRel(report["delta_x_plus"].get<double>(), 0.05));

    // near-free bath: minimum uncertainty product
    RunConfig weak = tiny_config("equilibrium_weak");
    weak.bath.gamma0 = 1e-6;
    weak.bath.n_modes = 200;
    weak.temperature = 0.0;
    weak.output.path = (test_dir() / "equilibrium_weak.json").string();
    REQUIRE(run_equilibrium(weak) == exit_ok);
    const auto wreport = Json::parse(slurp(weak.output.path));
    REQUIRE_THAT(wreport["delta_x_plus"].get<double>() * wreport["delta_p_plus"].get<double>(),
                 WithinAbs(0.5, 1e-3));
}

TEST_CASE("cli subprocess smoke") {
    const auto out = (test_dir() / "cli_evolve.csv").string();
    REQUIRE(run_cli("evolve --out " + out +
                    " --bath.n_modes=64 --run.t_max=8 --run.dt_out=0.1 --temperature=0.5") ==
            exit_ok);
    REQUIRE(fs::exists(out));

    REQUIRE(run_cli("evolve --out " + out + " --bogus.key=1") == exit_config);
    REQUIRE(run_cli("evolve --out " + out + " --bath.n_modes=64 --run.t_max=50") ==
            exit_recurrence);

    // config file + override precedence
    const auto cfg_path = (test_dir() / "cli.cfg").string();
    {
        std::ofstream cfg(cfg_path);
        cfg << "[bath]\nn_modes = 64\n[run]\nt_max = 8\ndt_out = 0.1\n[output]\npath = "
            << (test_dir() / "cli_cfg.csv").string() << "\n";
    }
    REQUIRE(run_cli("evolve --config " + cfg_path) == exit_ok);
    REQUIRE(fs::exists(test_dir() / "cli_cfg.csv"));
    REQUIRE(run_cli("equilibrium --config " + cfg_path + " --out " +
                    (test_dir() / "cli_eq.json").string() + " --bath.n_modes=128") == exit_ok);

    const auto gp = (test_dir() / "cli_gp.csv").string();
    REQUIRE(run_cli("evolve --gnuplot --out " + gp +
                    " --bath.n_modes=64 --run.t_max=8 --run.dt_out=0.1") == exit_ok);
    REQUIRE(fs::exists(with_suffix(gp, ".gp")));
}

// config.hpp — Run configuration: defaults, key=value config files with
// [section] headers, command-line overrides, and grid expressions.
//
// Precedence: CLI overrides > config file > defaults. Grid values accept
// comma-separated entries where each entry is a scalar or a linspace
// "start:stop:count" (count >= 1 points, endpoints included).

#pragma once

#include <cctype>
#include <cmath>
#include <cstddef>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "qbm/covariance.hpp"
#include "qbm/bath.hpp"
#include "qbm/errors.hpp"
#include "qbm/model.hpp"

namespace qbm {

struct RunConfig {
    struct {
        double omega1 = 1.0;
        double omega2 = 1.0;
        double c12 = 0.0;
        double mass = 1.0;
    } model;
    struct {
        std::string kind = "ohmic";
        double gamma0 = 0.15;
        double cutoff = 20.0;
        double s = 3.0;
        std::size_t n_modes = 2000;
    } bath;
    double temperature = 0.0;
    struct {
        std::string kind = "two_mode_squeezed";
        double r = 1.0;
    } initial;
    struct {
        double t_max = 50.0;
        double dt_out = 0.05;
        double window = 0.25;
    } run;
    struct {
        std::string path = "out.csv";
        std::string format = "csv";
    } output;
    struct {
        std::string t_grid = "0:10:21";
        std::string r_grid = "0:4:41";
    } phase;
    struct {
        std::string omega2_grid = "0.9,0.95,0.985:1.015:31,1.05,1.1,1.5";
        std::string snapshots = "5,10,20";
    } detune;
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

inline double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(value, &pos);
        if (pos != value.size() || !std::isfinite(x)) throw std::invalid_argument(value);
        return x;
    } catch (const std::exception&) {
        throw config_error("config: key '" + key + "' needs a finite number, got '" + value + "'");
    }
}

inline std::size_t parse_count(const std::string& key, const std::string& value) {
    const double x = parse_double(key, value);
    if (x < 0.0 || x != std::floor(x)) {
        throw config_error("config: key '" + key + "' needs a nonnegative integer, got '" + value + "'");
    }
    return static_cast<std::size_t>(x);
}

} // namespace detail

// "1,2,5" and "0:10:21" style grid expressions, possibly mixed.
inline std::vector<double> parse_grid(const std::string& expr, const std::string& key = "grid") {
    std::vector<double> values;
    std::stringstream ss(expr);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = detail::trim(item);
        if (item.empty()) continue;
        const std::size_t c1 = item.find(':');
        if (c1 == std::string::npos) {
            values.push_back(detail::parse_double(key, item));
            continue;
        }
        const std::size_t c2 = item.find(':', c1 + 1);
        if (c2 == std::string::npos) {
            throw config_error("config: grid entry '" + item + "' must be start:stop:count");
        }
        const double start = detail::parse_double(key, item.substr(0, c1));
        const double stop = detail::parse_double(key, item.substr(c1 + 1, c2 - c1 - 1));
        const std::size_t count = detail::parse_count(key, item.substr(c2 + 1));
        if (count == 0) throw config_error("config: grid entry '" + item + "' has zero points");
        if (count == 1) {
            values.push_back(start);
            continue;
        }
        for (std::size_t i = 0; i < count; ++i) {
            values.push_back(start + (stop - start) * static_cast<double>(i) /
                                         static_cast<double>(count - 1));
        }
    }
    if (values.empty()) throw config_error("config: grid '" + key + "' is empty");
    return values;
}

using ConfigMap = std::map<std::string, std::string>;

// Parses "[section]\nkey = value" or dotted "section.key = value" text.
// '#' starts a comment.
inline ConfigMap parse_config_text(const std::string& text) {
    ConfigMap map;
    std::stringstream ss(text);
    std::string line, section;
    std::size_t line_no = 0;
    while (std::getline(ss, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw config_error("config: malformed section header at line " + std::to_string(line_no));
            }
            section = detail::trim(line.substr(1, line.size() - 2));
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw config_error("config: expected key=value at line " + std::to_string(line_no));
        }
        std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (key.empty()) throw config_error("config: empty key at line " + std::to_string(line_no));
        if (!section.empty() && key.find('.') == std::string::npos) key = section + "." + key;
        map[key] = value;
    }
    return map;
}

inline void apply_entry(RunConfig& cfg, const std::string& key, const std::string& value) {
    using detail::parse_count;
    using detail::parse_double;
    if (key == "model.omega1") cfg.model.omega1 = parse_double(key, value);
    else if (key == "model.omega2") cfg.model.omega2 = parse_double(key, value);
    else if (key == "model.c12") cfg.model.c12 = parse_double(key, value);
    else if (key == "model.mass") cfg.model.mass = parse_double(key, value);
    else if (key == "bath.kind") cfg.bath.kind = value;
    else if (key == "bath.gamma0") cfg.bath.gamma0 = parse_double(key, value);
    else if (key == "bath.cutoff") cfg.bath.cutoff = parse_double(key, value);
    else if (key == "bath.s") cfg.bath.s = parse_double(key, value);
    else if (key == "bath.n_modes") cfg.bath.n_modes = parse_count(key, value);
    else if (key == "temperature") cfg.temperature = parse_double(key, value);
    else if (key == "initial.kind") cfg.initial.kind = value;
    else if (key == "initial.r") cfg.initial.r = parse_double(key, value);
    else if (key == "run.t_max") cfg.run.t_max = parse_double(key, value);
    else if (key == "run.dt_out") cfg.run.dt_out = parse_double(key, value);
    else if (key == "run.window") cfg.run.window = parse_double(key, value);
    else if (key == "output.path") cfg.output.path = value;
    else if (key == "output.format") cfg.output.format = value;
    else if (key == "phase.t_grid") cfg.phase.t_grid = value;
    else if (key == "phase.r_grid") cfg.phase.r_grid = value;
    else if (key == "detune.omega2_grid") cfg.detune.omega2_grid = value;
    else if (key == "detune.snapshots") cfg.detune.snapshots = value;
    else throw config_error("config: unknown key '" + key + "'");
}

inline RunConfig config_from_map(const ConfigMap& map, RunConfig base = {}) {
    for (const auto& [key, value] : map) apply_entry(base, key, value);
    return base;
}

inline ConfigMap config_to_map(const RunConfig& cfg) {
    const auto num = [](double x) {
        std::ostringstream os;
        os.precision(17);
        os << x;
        return os.str();
    };
    ConfigMap map;
    map["model.omega1"] = num(cfg.model.omega1);
    map["model.omega2"] = num(cfg.model.omega2);
    map["model.c12"] = num(cfg.model.c12);
    map["model.mass"] = num(cfg.model.mass);
    map["bath.kind"] = cfg.bath.kind;
    map["bath.gamma0"] = num(cfg.bath.gamma0);
    map["bath.cutoff"] = num(cfg.bath.cutoff);
    map["bath.s"] = num(cfg.bath.s);
    map["bath.n_modes"] = std::to_string(cfg.bath.n_modes);
    map["temperature"] = num(cfg.temperature);
    map["initial.kind"] = cfg.initial.kind;
    map["initial.r"] = num(cfg.initial.r);
    map["run.t_max"] = num(cfg.run.t_max);
    map["run.dt_out"] = num(cfg.run.dt_out);
    map["run.window"] = num(cfg.run.window);
    map["output.path"] = cfg.output.path;
    map["output.format"] = cfg.output.format;
    map["phase.t_grid"] = cfg.phase.t_grid;
    map["phase.r_grid"] = cfg.phase.r_grid;
    map["detune.omega2_grid"] = cfg.detune.omega2_grid;
    map["detune.snapshots"] = cfg.detune.snapshots;
    return map;
}

inline std::string serialize_config(const RunConfig& cfg) {
    std::string out;
    for (const auto& [key, value] : config_to_map(cfg)) {
        out += key;
        out += " = ";
        out += value;
        out += '\n';
    }
    return out;
}

// --------------------------- derived objects ---------------------------

inline BathKind bath_kind_of(const RunConfig& cfg) {
    if (cfg.bath.kind == "ohmic") return BathKind::ohmic;
    if (cfg.bath.kind == "superohmic") return BathKind::superohmic;
    throw config_error("config: bath.kind must be 'ohmic' or 'superohmic', got '" + cfg.bath.kind + "'");
}

inline StateKind state_kind_of(const RunConfig& cfg) {
    if (cfg.initial.kind == "two_mode_squeezed") return StateKind::two_mode_squeezed;
    if (cfg.initial.kind == "separable_squeezed") return StateKind::separable_squeezed;
    if (cfg.initial.kind == "coherent") return StateKind::coherent;
    throw config_error("config: initial.kind must be two_mode_squeezed, separable_squeezed or "
                       "coherent, got '" + cfg.initial.kind + "'");
}

inline ModelParams model_of(const RunConfig& cfg) {
    ModelParams p;
    p.omega1 = cfg.model.omega1;
    p.omega2 = cfg.model.omega2;
    p.c12 = cfg.model.c12;
    p.mass = cfg.model.mass;
    p.spectral = {bath_kind_of(cfg), cfg.bath.gamma0, cfg.bath.cutoff, cfg.model.mass, cfg.bath.s};
    p.n_bath = cfg.bath.n_modes;
    return p;
}

inline InitialStateSpec initial_of(const RunConfig& cfg) {
    return {state_kind_of(cfg), cfg.initial.r, cfg.model.mass, cfg.model.omega1};
}

inline void validate(const RunConfig& cfg) {
    if (cfg.output.format != "csv" && cfg.output.format != "json") {
        throw config_error("config: output.format must be 'csv' or 'json'");
    }
    if (cfg.output.path.empty()) throw config_error("config: output.path must not be empty");
    if (!(cfg.run.t_max > 0.0)) throw config_error("config: run.t_max must be > 0");
    if (!(cfg.run.dt_out > 0.0)) throw config_error("config: run.dt_out must be > 0");
    if (!(cfg.run.window > 0.0) || cfg.run.window > 1.0) {
        throw config_error("config: run.window must be in (0, 1]");
    }
    if (!(cfg.initial.r >= 0.0)) throw config_error("config: initial.r must be >= 0");
    if (!(cfg.temperature >= 0.0)) throw config_error("config: temperature must be >= 0");
    state_kind_of(cfg);
    model_of(cfg).validate(); // also validates the spectral density
}

} // namespace qbm

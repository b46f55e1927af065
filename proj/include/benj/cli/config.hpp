#pragma once

#include <benj/errors.hpp>
#include <benj/initdata.hpp>
#include <benj/model.hpp>
#include <benj/snapshot_io.hpp>
#include <benj/timestep.hpp>

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace benj::cli {

// Flat key = value document. '#' starts a comment; blank lines are ignored.
//
//   model.m, model.r, model.gamma, model.delta, model.q   required
//   model.L                                               default 1
//   grid.N                                                required (except for `invariants`)
//   initial.kind         gaussian | cosine | kdv_soliton | random_sobolev | petviashvili_wave | file
//   initial.amplitude, initial.width, initial.center, initial.mode, initial.speed,
//   initial.mu, initial.path, initial.tol, initial.max_iter
//   integrator.method    etdrk4 | ifrk4                  default etdrk4
//   integrator.dt        real | auto                     default auto (default_time_step)
//   integrator.t_end     default 1
//   integrator.snapshot_stride                           default 100
//   output.dir           default out
//   seed                 default 0 (random_sobolev data)
//   converge.n_values    comma separated, increasing     default 16,32,64,128
//   converge.n_ref       default 4 * max(n_values)
//   converge.study       galerkin | intermediate         default galerkin
//   converge.max_over_time                               default false
//   converge.reference_divisor, converge.linearized_divisor   defaults 1, 4
//   soliton.speed        default initial.speed
//   soliton.stride       steps between peak samples      default 10

struct ConvergeSettings {
    std::vector<int> n_values{16, 32, 64, 128};
    int n_ref = 0;  // 0: 4 * max(n_values)
    bool intermediate = false;
    bool max_over_time = false;
    int reference_divisor = 1;
    int linearized_divisor = 4;
};

struct SolitonSettings {
    std::optional<double> speed;
    int stride = 10;
};

struct RunConfig {
    ModelParams model = ModelParams::benjamin(1.0, 1.0);
    InitialDataSpec initial;
    IntegratorConfig integrator;
    bool auto_dt = true;
    int n_modes = 0;
    std::string output_dir = "out";
    std::uint64_t seed = 0;
    ConvergeSettings converge;
    SolitonSettings soliton;
    /// Every key = value pair after defaults and overrides, sorted by key.
    std::map<std::string, std::string> echo;
};

struct ParseOptions {
    bool require_grid = true;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

struct Entry {
    std::string value;
    int line = 0;
};

inline const std::vector<std::string>& known_keys() {
    static const std::vector<std::string> keys{
        "model.m", "model.r", "model.gamma", "model.delta", "model.q", "model.L",
        "grid.N",
        "initial.kind", "initial.amplitude", "initial.width", "initial.center", "initial.mode",
        "initial.speed", "initial.mu", "initial.path", "initial.tol", "initial.max_iter",
        "integrator.method", "integrator.dt", "integrator.t_end", "integrator.snapshot_stride",
        "output.dir", "seed",
        "converge.n_values", "converge.n_ref", "converge.study", "converge.max_over_time",
        "converge.reference_divisor", "converge.linearized_divisor",
        "soliton.speed", "soliton.stride"};
    return keys;
}

inline bool is_known(const std::string& key) {
    const auto& keys = known_keys();
    return std::find(keys.begin(), keys.end(), key) != keys.end();
}

inline std::pair<std::string, std::string> split_assignment(std::string_view line, int line_no) {
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError("config: expected 'key = value'", line_no);
    std::string key(trim(line.substr(0, eq)));
    std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) throw ParseError("config: empty key", line_no);
    if (value.empty()) throw ParseError("config: key '" + key + "' has no value", line_no);
    return {key, value};
}

class Reader {
public:
    explicit Reader(const std::map<std::string, Entry>& entries) : entries_(entries) {}

    bool has(const std::string& key) const { return entries_.count(key) != 0; }

    const Entry& require(const std::string& key) const {
        auto it = entries_.find(key);
        if (it == entries_.end()) throw ParseError("config: missing required key '" + key + "'");
        return it->second;
    }

    double real(const std::string& key, std::optional<double> fallback = {}) const {
        if (!has(key)) {
            if (fallback) return *fallback;
            require(key);
        }
        const Entry& e = entries_.at(key);
        try {
            return parse_real(e.value, e.line);
        } catch (const ParseError&) {
            throw ParseError("config: key '" + key + "' expects a real number, got '" + e.value + "'", e.line);
        }
    }

    long integer(const std::string& key, std::optional<long> fallback = {}) const {
        if (!has(key)) {
            if (fallback) return *fallback;
            require(key);
        }
        const Entry& e = entries_.at(key);
        try {
            return parse_integer(e.value, e.line);
        } catch (const ParseError&) {
            throw ParseError("config: key '" + key + "' expects an integer, got '" + e.value + "'", e.line);
        }
    }

    std::string text(const std::string& key, const std::string& fallback) const {
        return has(key) ? entries_.at(key).value : fallback;
    }

    bool boolean(const std::string& key, bool fallback) const {
        if (!has(key)) return fallback;
        const Entry& e = entries_.at(key);
        if (e.value == "true" || e.value == "1") return true;
        if (e.value == "false" || e.value == "0") return false;
        throw ParseError("config: key '" + key + "' expects true or false", e.line);
    }

    int line(const std::string& key) const { return has(key) ? entries_.at(key).line : 0; }

private:
    const std::map<std::string, Entry>& entries_;
};

inline std::string validation_message(const std::string& key, const std::string& constraint) {
    return "config: invalid '" + key + "': " + constraint + " required";
}

}  // namespace detail

/**
 * Parses and validates a config document. overrides ("key=value") replace
 * document entries. Unknown or duplicated keys are rejected. Syntax problems
 * raise ParseError; values outside their domain raise ParameterError naming
 * the key and the violated constraint.
 */
inline RunConfig parse_config(std::string_view text, const std::vector<std::string>& overrides = {},
                              ParseOptions options = {}) {
    using detail::Entry;
    std::map<std::string, Entry> entries;
    std::istringstream in{std::string(text)};
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line(raw);
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        auto [key, value] = detail::split_assignment(line, line_no);
        if (!detail::is_known(key)) throw ParseError("config: unknown key '" + key + "'", line_no);
        if (entries.count(key)) throw ParseError("config: duplicate key '" + key + "'", line_no);
        entries[key] = Entry{value, line_no};
    }
    for (const auto& o : overrides) {
        auto [key, value] = detail::split_assignment(o, 0);
        if (!detail::is_known(key)) throw ParseError("override: unknown key '" + key + "'");
        entries[key] = Entry{value, 0};
    }

    const detail::Reader r(entries);
    RunConfig cfg;

    // model
    const long m = r.integer("model.m");
    const double rr = r.real("model.r");
    const double gamma = r.real("model.gamma");
    const double delta = r.real("model.delta");
    const long q = r.integer("model.q");
    const double L = r.real("model.L", 1.0);
    using detail::validation_message;
    if (m < 1) throw ParameterError(validation_message("model.m", "m >= 1"));
    if (!(rr >= 0.0)) throw ParameterError(validation_message("model.r", "r >= 0"));
    if (!(rr < static_cast<double>(m))) throw ParameterError(validation_message("model.r", "r < m"));
    if (!(gamma >= 0.0)) throw ParameterError(validation_message("model.gamma", "gamma >= 0"));
    if (!(delta > 0.0)) throw ParameterError(validation_message("model.delta", "delta > 0"));
    if (q < 1) throw ParameterError(validation_message("model.q", "q >= 1"));
    if (!(L > 0.0)) throw ParameterError(validation_message("model.L", "L > 0"));
    cfg.model = ModelParams(static_cast<int>(m), rr, gamma, delta, static_cast<int>(q), L);

    // grid
    if (options.require_grid || r.has("grid.N")) {
        const long n = r.integer("grid.N");
        if (n < 1) throw ParameterError(validation_message("grid.N", "N >= 1"));
        cfg.n_modes = static_cast<int>(n);
    }

    // initial data
    const std::string kind = r.text("initial.kind", "gaussian");
    InitialDataSpec& ini = cfg.initial;
    if (kind == "gaussian") ini.kind = InitialKind::gaussian;
    else if (kind == "cosine") ini.kind = InitialKind::cosine;
    else if (kind == "kdv_soliton") ini.kind = InitialKind::kdv_soliton;
    else if (kind == "random_sobolev") ini.kind = InitialKind::random_sobolev;
    else if (kind == "petviashvili_wave") ini.kind = InitialKind::petviashvili_wave;
    else if (kind == "file") ini.kind = InitialKind::file;
    else throw ParseError("config: unknown initial.kind '" + kind + "'", r.line("initial.kind"));
    ini.amplitude = r.real("initial.amplitude", ini.amplitude);
    ini.width = r.real("initial.width", ini.width);
    ini.center = r.real("initial.center", ini.center);
    ini.mode = static_cast<int>(r.integer("initial.mode", ini.mode));
    ini.speed = r.real("initial.speed", ini.speed);
    ini.mu = r.real("initial.mu", ini.mu);
    ini.path = r.text("initial.path", "");
    ini.tol = r.real("initial.tol", ini.tol);
    ini.max_iter = static_cast<int>(r.integer("initial.max_iter", ini.max_iter));
    const long seed = r.integer("seed", 0);
    if (seed < 0) throw ParameterError(validation_message("seed", "seed >= 0"));
    cfg.seed = static_cast<std::uint64_t>(seed);
    ini.seed = cfg.seed;
    if (!(ini.width > 0.0)) throw ParameterError(validation_message("initial.width", "width > 0"));
    if (!(ini.mu >= 0.0)) throw ParameterError(validation_message("initial.mu", "mu >= 0"));
    if (!(ini.tol > 0.0)) throw ParameterError(validation_message("initial.tol", "tol > 0"));
    if (ini.max_iter < 1) throw ParameterError(validation_message("initial.max_iter", "max_iter >= 1"));
    if (ini.mode < 0) throw ParameterError(validation_message("initial.mode", "mode >= 0"));
    if ((ini.kind == InitialKind::kdv_soliton || ini.kind == InitialKind::petviashvili_wave) && !(ini.speed > 0.0))
        throw ParameterError(validation_message("initial.speed", "speed > 0"));
    if (ini.kind == InitialKind::file && ini.path.empty())
        throw ParseError("config: initial.kind = file needs initial.path");

    // integrator
    const std::string method = r.text("integrator.method", "etdrk4");
    if (method == "etdrk4") cfg.integrator.method = Method::etdrk4;
    else if (method == "ifrk4") cfg.integrator.method = Method::ifrk4;
    else throw ParseError("config: unknown integrator.method '" + method + "'", r.line("integrator.method"));
    cfg.integrator.t_end = r.real("integrator.t_end", 1.0);
    if (!(cfg.integrator.t_end > 0.0))
        throw ParameterError(validation_message("integrator.t_end", "t_end > 0"));
    const std::string dt_text = r.text("integrator.dt", "auto");
    cfg.auto_dt = (dt_text == "auto");
    if (!cfg.auto_dt) {
        cfg.integrator.dt = r.real("integrator.dt");
        if (!(cfg.integrator.dt > 0.0)) throw ParameterError(validation_message("integrator.dt", "dt > 0"));
        if (cfg.integrator.dt > cfg.integrator.t_end)
            throw ParameterError(validation_message("integrator.dt", "dt <= t_end"));
    }
    const long stride = r.integer("integrator.snapshot_stride", 100);
    if (stride < 1) throw ParameterError(validation_message("integrator.snapshot_stride", "snapshot_stride >= 1"));
    cfg.integrator.snapshot_stride = static_cast<int>(stride);

    cfg.output_dir = r.text("output.dir", "out");

    // converge
    if (r.has("converge.n_values")) {
        cfg.converge.n_values.clear();
        std::string list = r.text("converge.n_values", "");
        std::replace(list.begin(), list.end(), ',', ' ');
        std::istringstream ss(list);
        for (std::string tok; ss >> tok;)
            cfg.converge.n_values.push_back(static_cast<int>(parse_integer(tok, r.line("converge.n_values"))));
        if (cfg.converge.n_values.empty())
            throw ParseError("config: converge.n_values is empty", r.line("converge.n_values"));
    }
    for (std::size_t i = 0; i < cfg.converge.n_values.size(); ++i) {
        if (cfg.converge.n_values[i] < 1)
            throw ParameterError(validation_message("converge.n_values", "N >= 1"));
        if (i > 0 && cfg.converge.n_values[i] <= cfg.converge.n_values[i - 1])
            throw ParameterError(validation_message("converge.n_values", "strictly increasing N"));
    }
    cfg.converge.n_ref = static_cast<int>(r.integer("converge.n_ref", 4L * cfg.converge.n_values.back()));
    if (cfg.converge.n_ref < 4 * cfg.converge.n_values.back())
        throw ParameterError(validation_message("converge.n_ref", "n_ref >= 4 max(n_values)"));
    const std::string study = r.text("converge.study", "galerkin");
    if (study == "galerkin") cfg.converge.intermediate = false;
    else if (study == "intermediate") cfg.converge.intermediate = true;
    else throw ParseError("config: unknown converge.study '" + study + "'", r.line("converge.study"));
    cfg.converge.max_over_time = r.boolean("converge.max_over_time", false);
    cfg.converge.reference_divisor = static_cast<int>(r.integer("converge.reference_divisor", 1));
    cfg.converge.linearized_divisor = static_cast<int>(r.integer("converge.linearized_divisor", 4));
    if (cfg.converge.reference_divisor < 1)
        throw ParameterError(validation_message("converge.reference_divisor", "reference_divisor >= 1"));
    if (cfg.converge.linearized_divisor < 1)
        throw ParameterError(validation_message("converge.linearized_divisor", "linearized_divisor >= 1"));

    // soliton
    if (r.has("soliton.speed")) {
        cfg.soliton.speed = r.real("soliton.speed");
        if (!(*cfg.soliton.speed > 0.0)) throw ParameterError(validation_message("soliton.speed", "speed > 0"));
    }
    cfg.soliton.stride = static_cast<int>(r.integer("soliton.stride", 10));
    if (cfg.soliton.stride < 1) throw ParameterError(validation_message("soliton.stride", "stride >= 1"));

    for (const auto& [key, entry] : entries) cfg.echo[key] = entry.value;
    return cfg;
}

}  // namespace benj::cli

#pragma once

#include <benj/cli/config.hpp>
#include <benj/cli/output.hpp>
#include <benj/harness.hpp>
#include <benj/initdata.hpp>
#include <benj/invariants.hpp>
#include <benj/snapshot_io.hpp>
#include <benj/timestep.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace benj::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;     // I/O and other unexpected errors
inline constexpr int kExitValidation = 2;
inline constexpr int kExitDivergence = 3;  // also Petviashvili non-convergence

struct CommandOptions {
    bool quiet = false;
    int threads = 1;
    std::ostream* log = &std::cerr;
};

/// BENJ_THREADS: unset or 0 means hardware concurrency.
inline int threads_from_env() {
    const char* raw = std::getenv("BENJ_THREADS");
    long n = 0;
    if (raw && *raw) {
        try {
            n = parse_integer(raw);
        } catch (const ParseError&) {
            throw ParameterError("BENJ_THREADS must be a nonnegative integer");
        }
        if (n < 0) throw ParameterError("BENJ_THREADS must be a nonnegative integer");
    }
    if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
    return static_cast<int>(n);
}

inline RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides,
                             ParseOptions options = {}) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ParseError("cannot open config '" + path + "'");
    std::ostringstream text;
    text << is.rdbuf();
    return parse_config(text.str(), overrides, options);
}

namespace detail {

inline bool is_validation_error(const std::exception& e) {
    return dynamic_cast<const ParseError*>(&e) || dynamic_cast<const ParameterError*>(&e) ||
           dynamic_cast<const BandwidthError*>(&e) || dynamic_cast<const ShapeError*>(&e) ||
           dynamic_cast<const ArgumentError*>(&e) || dynamic_cast<const SpectrumError*>(&e);
}

inline int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const DivergenceError*>(&e) || dynamic_cast<const ConvergenceError*>(&e))
        return kExitDivergence;
    if (is_validation_error(e)) return kExitValidation;
    return kExitFailure;
}

inline const char* status_for(int code) {
    switch (code) {
        case kExitOk: return "ok";
        case kExitValidation: return "invalid";
        case kExitDivergence: return "diverged";
        default: return "failed";
    }
}

inline std::filesystem::path prepare_output(const RunConfig& config) {
    std::filesystem::path dir(config.output_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir))
        throw ParameterError("output.dir '" + config.output_dir + "' is not a writable directory");
    return dir;
}

/// Runs body(manifest) and always finishes with the manifest, whatever happens.
template <class Body>
int run_with_manifest(const char* command, const RunConfig& config, const CommandOptions& opts, Body&& body) {
    std::filesystem::path dir;
    try {
        dir = prepare_output(config);
    } catch (const std::exception& e) {
        *opts.log << "benj " << command << ": " << e.what() << '\n';
        return kExitValidation;
    }
    Manifest manifest(command, config);
    int code = kExitOk;
    std::string message;
    try {
        code = body(dir, manifest);
    } catch (const std::exception& e) {
        code = exit_code_for(e);
        message = e.what();
        if (const auto* d = dynamic_cast<const DivergenceError*>(&e)) manifest.results()["diverged_at"] = d->time();
        *opts.log << "benj " << command << ": " << e.what() << '\n';
    }
    try {
        manifest.write(dir, status_for(code), code, message);
    } catch (const std::exception& e) {
        *opts.log << "benj " << command << ": " << e.what() << '\n';
        return code == kExitOk ? kExitFailure : code;
    }
    return code;
}

inline double resolve_dt(const RunConfig& config, const SpectralField& u0) {
    return config.auto_dt ? default_time_step(config.model, u0) : config.integrator.dt;
}

}  // namespace detail

/**
 * Evolves the configured initial data. Writes snapshot_NNNNNN.txt at t = 0 and
 * every snapshot_stride steps (and t_end), invariants.csv, then manifest.json.
 */
inline int cmd_solve(const RunConfig& config, const CommandOptions& opts = {}) {
    return detail::run_with_manifest("solve", config, opts, [&](const std::filesystem::path& dir, Manifest& m) {
        if (config.n_modes < 1) throw ParameterError("grid.N is required for solve");
        const SpectralField u0 = make_initial_data(config.initial, config.model, config.n_modes);
        IntegratorConfig ic = config.integrator;
        ic.dt = detail::resolve_dt(config, u0);
        m.results()["dt"] = ic.dt;
        if (!opts.quiet)
            *opts.log << "solve: N = " << config.n_modes << ", dt = " << ic.dt << ", t_end = " << ic.t_end << ", "
                      << to_string(ic.method) << '\n';

        InvariantCsv csv(dir / "invariants.csv", config.model);
        int index = 0;
        auto record = [&](double t, const SpectralField& u) {
            write_snapshot_file(snapshot_path(dir, index++).string(), u, t);
            csv.add(t, u);
        };
        record(0.0, u0);
        try {
            evolve(u0, config.model, ic, [&](double t, const SpectralField& u) {
                record(t, u);
                if (!opts.quiet) *opts.log << "  t = " << t << '\n';
            });
        } catch (...) {
            m.results()["snapshots"] = index;
            m.results()["drift"] = csv.drifts();
            throw;
        }
        m.results()["snapshots"] = index;
        m.results()["drift"] = csv.drifts();
        return kExitOk;
    });
}

/**
 * Convergence study over converge.n_values at t_star = integrator.t_end.
 * Writes convergence.csv then manifest.json. A diverged member run gives exit 3.
 */
inline int cmd_converge(const RunConfig& config, const CommandOptions& opts = {}) {
    return detail::run_with_manifest("converge", config, opts, [&](const std::filesystem::path& dir, Manifest& m) {
        const ConvergeSettings& cs = config.converge;
        IntegratorPolicy policy;
        policy.method = config.integrator.method;
        policy.dt = config.auto_dt ? 0.0 : config.integrator.dt;
        policy.reference_divisor = cs.reference_divisor;
        policy.linearized_divisor = cs.linearized_divisor;
        if (!opts.quiet)
            *opts.log << "converge: " << (cs.intermediate ? "intermediate" : "galerkin") << " study, N_ref = "
                      << cs.n_ref << ", t* = " << config.integrator.t_end << ", threads = " << opts.threads << '\n';
        const ConvergenceReport report =
            cs.intermediate ? intermediate_problem_study(config.model, config.initial, cs.n_values, cs.n_ref,
                                                         config.integrator.t_end, policy, opts.threads)
                            : self_convergence(config.model, config.initial, cs.n_values, cs.n_ref,
                                               config.integrator.t_end, policy, opts.threads, cs.max_over_time);
        {
            std::ofstream os = open_output(dir / "convergence.csv");
            write_convergence_csv(os, report);
        }
        auto& r = m.results();
        r["n_values"] = report.n_values;
        r["errors"] = report.errors;
        r["fitted_rate"] = report.fitted_rate;
        r["fit_r2"] = report.fit_r2;
        r["rate_claimed"] = report.rate_claimed;
        r["reference_n"] = report.reference_n;
        r["dt"] = report.dt;
        r["reference_dt"] = report.reference_dt;
        if (!report.max_linf.empty()) r["max_linf"] = report.max_linf;
        if (!opts.quiet) {
            for (std::size_t i = 0; i < report.n_values.size(); ++i)
                *opts.log << "  N = " << report.n_values[i] << "  error = " << report.errors[i] << '\n';
            *opts.log << "  rate = " << report.fitted_rate << "  r2 = " << report.fit_r2
                      << (report.rate_claimed ? "" : "  (no rate claimed)") << '\n';
        }
        if (report.failure) {
            *opts.log << "benj converge: " << *report.failure << '\n';
            r["failure"] = *report.failure;
            return kExitDivergence;
        }
        return kExitOk;
    });
}

/**
 * Traveling wave of speed soliton.speed (default initial.speed): the closed
 * form when gamma = 0, m = 1, q = 1, otherwise Petviashvili from the
 * configured Gaussian. Propagates it to integrator.t_end and writes
 * profile.txt, final.txt, propagation.csv (t, peak, C, I, E), soliton.csv
 * (summary) and manifest.json.
 */
inline int cmd_soliton(const RunConfig& config, const CommandOptions& opts = {}) {
    return detail::run_with_manifest("soliton", config, opts, [&](const std::filesystem::path& dir, Manifest& m) {
        if (config.n_modes < 1) throw ParameterError("grid.N is required for soliton");
        const ModelParams& p = config.model;
        const double speed = config.soliton.speed.value_or(config.initial.speed);
        const bool closed_form = p.gamma() == 0.0 && p.m() == 1 && p.q() == 1;
        SpectralField profile;
        auto& r = m.results();
        r["speed"] = speed;
        if (closed_form) {
            profile = kdv_soliton(speed, config.initial.center, p, config.n_modes);
            r["profile"] = "closed_form";
        } else {
            const InitialDataSpec& ini = config.initial;
            const SpectralField guess = gaussian(ini.amplitude, ini.width, ini.center, config.n_modes, p.domain_scale());
            const PetviashviliResult pr = petviashvili(p, speed, guess, ini.tol, ini.max_iter);
            profile = pr.profile;
            r["profile"] = "petviashvili";
            r["petviashvili_iterations"] = pr.iterations;
        }
        const double residual = traveling_wave_residual(p, speed, profile);
        r["profile_residual"] = residual;
        write_snapshot_file((dir / "profile.txt").string(), profile, 0.0);

        const double dt = detail::resolve_dt(config, profile);
        if (!opts.quiet)
            *opts.log << "soliton: c = " << speed << ", N = " << config.n_modes << ", residual = " << residual
                      << ", dt = " << dt << '\n';
        const PropagationReport rep =
            propagate_wave(p, profile, config.integrator.t_end, dt, config.integrator.method, config.soliton.stride);
        write_snapshot_file((dir / "final.txt").string(), rep.final_field, config.integrator.t_end);
        {
            std::ofstream os = open_output(dir / "propagation.csv");
            os << "t,peak,C,I,E\n";
            for (std::size_t i = 0; i < rep.times.size(); ++i)
                os << format_real(rep.times[i]) << ',' << format_real(rep.peaks[i]) << ','
                   << format_real(rep.invariants.C[i]) << ',' << format_real(rep.invariants.I[i]) << ','
                   << format_real(rep.invariants.E[i]) << '\n';
        }
        {
            std::ofstream os = open_output(dir / "soliton.csv");
            os << "quantity,value\n";
            os << "speed," << format_real(speed) << '\n';
            os << "profile_residual," << format_real(residual) << '\n';
            os << "speed_estimate," << format_real(rep.speed_estimate) << '\n';
            os << "shape_error_linf," << format_real(rep.shape_error_linf) << '\n';
            os << "rel_drift_C," << format_real(rep.invariants.rel_drift_C) << '\n';
            os << "rel_drift_I," << format_real(rep.invariants.rel_drift_I) << '\n';
            os << "rel_drift_E," << format_real(rep.invariants.rel_drift_E) << '\n';
        }
        r["speed_estimate"] = rep.speed_estimate;
        r["shape_error_linf"] = rep.shape_error_linf;
        r["drift"] = {{"C", rep.invariants.rel_drift_C}, {"I", rep.invariants.rel_drift_I},
                      {"E", rep.invariants.rel_drift_E}};
        if (!opts.quiet)
            *opts.log << "  speed estimate = " << rep.speed_estimate << ", shape error = " << rep.shape_error_linf
                      << '\n';
        return kExitOk;
    });
}

/**
 * Recomputes C, I, E for each snapshot file and prints "file,t,C,I,E" rows to
 * `out`. Each snapshot's L must equal model.L.
 */
inline int cmd_invariants(const ModelParams& params, const std::vector<std::string>& files, std::ostream& out,
                          const CommandOptions& opts = {}) {
    try {
        std::ostringstream table;
        table << "file,t,C,I,E\n";
        for (const auto& path : files) {
            const SnapshotData data = read_snapshot_file(path);
            if (data.field.domain_scale() != params.domain_scale())
                throw ShapeError("snapshot '" + path + "' has L = " + format_real(data.field.domain_scale()) +
                                 ", model.L is " + format_real(params.domain_scale()));
            const SpectralField& u = data.field;
            table << path << ',' << format_real(data.t) << ',' << format_real(c_pi(u)) << ','
                  << format_real(i_pi(u)) << ',' << format_real(e_pi(u, params)) << '\n';
        }
        out << table.str();
        return kExitOk;
    } catch (const std::exception& e) {
        *opts.log << "benj invariants: " << e.what() << '\n';
        return detail::exit_code_for(e);
    }
}

}  // namespace benj::cli

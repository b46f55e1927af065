#pragma once

#include <benj/cli/config.hpp>
#include <benj/harness.hpp>
#include <benj/invariants.hpp>
#include <benj/snapshot_io.hpp>

#include "json.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>

namespace benj::cli {

inline constexpr const char* kVersion = "0.1.0";

inline std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot open '" + path.string() + "' for writing");
    return os;
}

/// Streams "t,C,I,E" rows as snapshots arrive.
class InvariantCsv {
public:
    InvariantCsv(const std::filesystem::path& path, const ModelParams& params)
        : os_(open_output(path)), params_(params) {
        os_ << "t,C,I,E\n";
    }

    void add(double t, const SpectralField& u) {
        const double c = c_pi(u), i = i_pi(u), e = e_pi(u, params_);
        os_ << format_real(t) << ',' << format_real(c) << ',' << format_real(i) << ',' << format_real(e) << '\n';
        os_.flush();
        C_.push_back(c);
        I_.push_back(i);
        E_.push_back(e);
    }

    nlohmann::ordered_json drifts() const {
        nlohmann::ordered_json j;
        if (C_.empty()) return j;
        j["C"] = relative_drift(C_);
        j["I"] = relative_drift(I_);
        j["E"] = relative_drift(E_);
        return j;
    }

private:
    std::ofstream os_;
    ModelParams params_;
    std::vector<double> C_, I_, E_;
};

/// "N,error" rows ordered by N, then one summary row "fitted_rate=<r>,fit_r2=<r2>".
inline void write_convergence_csv(std::ostream& os, const ConvergenceReport& report) {
    os << "N,error\n";
    for (std::size_t i = 0; i < report.n_values.size(); ++i)
        os << report.n_values[i] << ',' << format_real(report.errors[i]) << '\n';
    os << "fitted_rate=" << format_real(report.fitted_rate) << ",fit_r2=" << format_real(report.fit_r2) << '\n';
}

inline std::string utc_timestamp(std::chrono::system_clock::time_point tp) {
    const std::time_t tt = std::chrono::system_clock::to_time_t(tp);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

/// Effective settings after defaults, as the commands see them.
inline nlohmann::ordered_json resolved(const RunConfig& c) {
    nlohmann::ordered_json j;
    j["model"] = {{"m", c.model.m()}, {"r", c.model.r()}, {"gamma", c.model.gamma()}, {"delta", c.model.delta()},
                  {"q", c.model.q()}, {"L", c.model.domain_scale()}};
    j["N"] = c.n_modes;
    j["initial"] = {{"kind", to_string(c.initial.kind)}, {"seed", c.seed}};
    j["integrator"] = {{"method", to_string(c.integrator.method)},
                       {"dt", c.auto_dt ? nlohmann::ordered_json("auto") : nlohmann::ordered_json(c.integrator.dt)},
                       {"t_end", c.integrator.t_end},
                       {"snapshot_stride", c.integrator.snapshot_stride}};
    j["output_dir"] = c.output_dir;
    return j;
}

/// Run record written once, after every other output of the run.
class Manifest {
public:
    Manifest(std::string command, const RunConfig& config)
        : start_(std::chrono::system_clock::now()), steady_start_(std::chrono::steady_clock::now()) {
        doc_["artifact"] = "benj";
        doc_["version"] = kVersion;
        doc_["command"] = std::move(command);
        doc_["config"] = config.echo;
        doc_["resolved"] = resolved(config);
        doc_["start_time"] = utc_timestamp(start_);
    }

    nlohmann::ordered_json& results() { return results_; }

    void write(const std::filesystem::path& dir, const std::string& status, int exit_code,
               const std::string& message = {}) {
        const auto end = std::chrono::system_clock::now();
        doc_["end_time"] = utc_timestamp(end);
        doc_["elapsed_seconds"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - steady_start_).count();
        doc_["status"] = status;
        doc_["exit_code"] = exit_code;
        if (!message.empty()) doc_["message"] = message;
        doc_["results"] = results_;
        std::ofstream os = open_output(dir / "manifest.json");
        os << doc_.dump(2) << '\n';
    }

private:
    std::chrono::system_clock::time_point start_;
    std::chrono::steady_clock::time_point steady_start_;
    nlohmann::ordered_json doc_;
    nlohmann::ordered_json results_ = nlohmann::ordered_json::object();
};

/// snapshot_000000.txt, snapshot_000001.txt, ... in observation order.
inline std::filesystem::path snapshot_path(const std::filesystem::path& dir, int index) {
    char name[32];
    std::snprintf(name, sizeof name, "snapshot_%06d.txt", index);
    return dir / name;
}

}  // namespace benj::cli

#pragma once

#include <benj/errors.hpp>
#include <benj/initdata.hpp>
#include <benj/invariants.hpp>
#include <benj/model.hpp>
#include <benj/semidiscrete.hpp>
#include <benj/spectral.hpp>
#include <benj/timestep.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

namespace benj {

struct RateFit {
    double rate = 0.0;  // negated slope of log(error) against log(N)
    double r2 = 1.0;
};

/// Least-squares line through (log N, log error).
inline RateFit estimate_rate(std::span<const int> n_values, std::span<const double> errors) {
    if (n_values.size() != errors.size()) throw ArgumentError("estimate_rate: length mismatch");
    if (n_values.size() < 2) throw ArgumentError("estimate_rate: need at least two points");
    const std::size_t n = n_values.size();
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(errors[i] > 0.0)) throw ArgumentError("estimate_rate: errors must be positive");
        if (n_values[i] <= 0) throw ArgumentError("estimate_rate: N must be positive");
        x[i] = std::log(static_cast<double>(n_values[i]));
        y[i] = std::log(errors[i]);
    }
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0) throw ArgumentError("estimate_rate: N values must not all coincide");
    const double slope = sxy / sxx;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - (my + slope * (x[i] - mx));
        ss_res += r * r;
    }
    const double r2 = (syy == 0.0) ? 1.0 : 1.0 - ss_res / syy;
    return {-slope, r2};
}

/// How a study integrates in time. dt <= 0 selects default_time_step at the
/// largest study bandwidth.
///
/// self_convergence runs the reference with dt / reference_divisor. With the
/// default of 1 every run shares one step, so temporal error is common to the
/// reference and the study runs and drops out of their difference.
/// intermediate_problem_study runs the reference and every linearized run
/// with dt / linearized_divisor.
struct IntegratorPolicy {
    Method method = Method::etdrk4;
    double dt = 0.0;
    int reference_divisor = 1;
    int linearized_divisor = 4;
};

inline constexpr int kRateWindow = 4;
inline constexpr double kRateMinR2 = 0.95;

struct ConvergenceReport {
    std::vector<int> n_values;
    std::vector<double> errors;
    double fitted_rate = std::numeric_limits<double>::quiet_NaN();
    double fit_r2 = std::numeric_limits<double>::quiet_NaN();
    bool rate_defined = false;
    bool rate_claimed = false;  // rate_defined and fit_r2 >= 0.95
    int reference_n = 0;
    double t_star = 0.0;
    double dt = 0.0;
    double reference_dt = 0.0;
    std::vector<double> max_linf;  // intermediate study only: max_t |w^N|_inf per N
    std::optional<std::string> failure;
};

namespace detail {

/// Runs fn(i) for i in [0, count) on up to `threads` workers. Results must be
/// written to per-index slots by fn; the first exception is rethrown.
template <class Fn>
void parallel_for(int count, int threads, Fn&& fn) {
    threads = std::max(1, std::min(threads, count));
    if (threads == 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (int i = next++; i < count; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

inline void fit_report(ConvergenceReport& report) {
    std::vector<int> n;
    std::vector<double> e;
    const std::size_t start = report.n_values.size() > kRateWindow ? report.n_values.size() - kRateWindow : 0;
    for (std::size_t i = start; i < report.n_values.size(); ++i) {
        if (report.errors[i] > 0.0 && std::isfinite(report.errors[i])) {
            n.push_back(report.n_values[i]);
            e.push_back(report.errors[i]);
        }
    }
    if (n.size() < 2 || n.size() != report.n_values.size() - start) return;
    const RateFit fit = estimate_rate(n, e);
    report.fitted_rate = fit.rate;
    report.fit_r2 = fit.r2;
    report.rate_defined = true;
    report.rate_claimed = fit.r2 >= kRateMinR2;
}

inline void check_study_inputs(std::span<const int> n_values, int n_ref, double t_star) {
    if (n_values.empty()) throw ArgumentError("study: no N values");
    for (std::size_t i = 0; i < n_values.size(); ++i) {
        if (n_values[i] < 1) throw ArgumentError("study: N values must be >= 1");
        if (i > 0 && n_values[i] <= n_values[i - 1]) throw ArgumentError("study: N values must increase");
    }
    if (n_ref < 4 * n_values.back()) throw ArgumentError("study: reference N must be >= 4 max(N)");
    if (!(t_star > 0.0)) throw ArgumentError("study: t_star must be > 0");
}

/// Largest step <= dt that divides t_star evenly.
inline double fit_step(double dt, double t_star) {
    const double steps = std::ceil(t_star / dt * (1.0 - 1e-12));
    return t_star / std::max(1.0, steps);
}

}  // namespace detail

/**
 * Error of u^N at t_star against a fine reference, for each N.
 *
 * u^N starts from P_N u0 where u0 is generated at the reference bandwidth.
 * Errors are L2 norms at the reference bandwidth (u^N zero-extended). With
 * max_over_time the maximum over the common time levels is taken instead.
 */
inline ConvergenceReport self_convergence(const ModelParams& params, const InitialDataSpec& data,
                                          std::span<const int> n_values, int n_ref, double t_star,
                                          const IntegratorPolicy& policy = {}, int threads = 1,
                                          bool max_over_time = false) {
    detail::check_study_inputs(n_values, n_ref, t_star);
    if (policy.reference_divisor < 1) throw ArgumentError("study: reference_divisor must be >= 1");
    const SpectralField u0_ref = make_initial_data(data, params, n_ref);
    const int n_max = n_values.back();

    ConvergenceReport report;
    report.n_values.assign(n_values.begin(), n_values.end());
    report.errors.assign(n_values.size(), std::numeric_limits<double>::quiet_NaN());
    report.reference_n = n_ref;
    report.t_star = t_star;
    const double dt_raw = policy.dt > 0.0 ? policy.dt : default_time_step(params, project(u0_ref, n_max));
    report.dt = detail::fit_step(dt_raw, t_star);
    report.reference_dt = report.dt / policy.reference_divisor;

    // slot 0: reference, slot i+1: n_values[i]. Each keeps its state at every
    // coarse time level when max_over_time is set, otherwise just the end.
    const int runs = static_cast<int>(n_values.size()) + 1;
    std::vector<std::vector<SpectralField>> levels(static_cast<std::size_t>(runs));
    std::vector<std::string> failures(static_cast<std::size_t>(runs));

    detail::parallel_for(runs, threads, [&](int i) {
        const bool is_ref = (i == 0);
        const int n = is_ref ? n_ref : n_values[i - 1];
        const double dt = is_ref ? report.reference_dt : report.dt;
        const int stride = is_ref ? policy.reference_divisor : 1;
        const SpectralField u0 = project(u0_ref, n);
        Stepper stepper(linear_multipliers(params, n), policy.method, dt, galerkin_nonlinearity(params));
        auto& out = levels[i];
        try {
            const SpectralField final_field = integrate(
                stepper, u0, t_star, max_over_time ? stride : std::numeric_limits<int>::max(),
                [&](long, double, const SpectralField& u) {
                    if (max_over_time) out.push_back(u);
                });
            if (!max_over_time) out.push_back(final_field);
        } catch (const DivergenceError& e) {
            failures[i] = "N = " + std::to_string(n) + ": " + e.what();
        }
    });

    for (int i = 0; i < runs; ++i) {
        if (!failures[i].empty()) {
            report.failure = report.failure ? *report.failure + "; " + failures[i] : failures[i];
        }
    }
    if (!failures[0].empty()) return report;

    const auto& ref = levels[0];
    for (std::size_t i = 0; i < n_values.size(); ++i) {
        const auto& run = levels[i + 1];
        if (!failures[i + 1].empty() || run.size() != ref.size()) continue;
        double worst = 0.0;
        for (std::size_t s = 0; s < run.size(); ++s)
            worst = std::max(worst, l2_norm(embed(run[s], n_ref) - ref[s]));
        report.errors[i] = worst;
    }
    detail::fit_report(report);
    return report;
}

/**
 * A stored trajectory u(t_j), t_j = j h, evaluated at arbitrary t by cubic
 * Lagrange interpolation over the four nearest stored levels (exact at the
 * stored levels).
 *
 * Given the linear multipliers, interpolation runs in the co-rotating frame
 * v_k = exp(-Lambda_k t) u_k, i.e. u_k(t) = sum_a w_a exp(Lambda_k (t - t_a)) u_k(t_a),
 * so fast dispersive phases are carried exactly and only the slow nonlinear
 * modulation is interpolated.
 */
class StoredTrajectory {
public:
    StoredTrajectory(double step, int n_modes, double domain_scale, std::vector<Complex> lambda = {})
        : step_(step), n_modes_(n_modes), domain_scale_(domain_scale), lambda_(std::move(lambda)) {
        if (!lambda_.empty() && lambda_.size() < static_cast<std::size_t>(n_modes) + 1)
            throw ShapeError("StoredTrajectory: multipliers shorter than the stored bandwidth");
    }

    void push(const SpectralField& u) {
        const SpectralField p = resize(u, n_modes_);
        levels_.emplace_back(p.half().begin(), p.half().end());
    }

    std::size_t size() const noexcept { return levels_.size(); }
    double step() const noexcept { return step_; }
    int n_modes() const noexcept { return n_modes_; }

    /// u(t) restricted to |k| <= n_modes (n_modes <= stored bandwidth).
    SpectralField at(double t, int n_modes) const {
        if (levels_.empty()) throw ArgumentError("StoredTrajectory: empty");
        n_modes = std::min(n_modes, n_modes_);
        const double tau = t / step_;
        const double nearest = std::round(tau);
        const long last = static_cast<long>(levels_.size()) - 1;
        std::vector<Complex> half(static_cast<std::size_t>(n_modes) + 1);
        if (std::abs(tau - nearest) <= 1e-9) {
            const auto& lvl = levels_[static_cast<std::size_t>(std::clamp(static_cast<long>(nearest), 0L, last))];
            std::copy(lvl.begin(), lvl.begin() + n_modes + 1, half.begin());
            return SpectralField::from_half(domain_scale_, std::move(half));
        }
        if (last < 3) throw ArgumentError("StoredTrajectory: need at least four levels to interpolate");
        const long j0 = std::clamp(static_cast<long>(std::floor(tau)) - 1, 0L, last - 3);
        double w[4];
        for (int a = 0; a < 4; ++a) {
            w[a] = 1.0;
            for (int b = 0; b < 4; ++b)
                if (b != a) w[a] *= (tau - (j0 + b)) / static_cast<double>(a - b);
        }
        for (int a = 0; a < 4; ++a) {
            const auto& lvl = levels_[static_cast<std::size_t>(j0 + a)];
            const double lag = (tau - static_cast<double>(j0 + a)) * step_;
            for (int k = 0; k <= n_modes; ++k) {
                const Complex rotate = lambda_.empty() ? Complex(1.0) : std::exp(lambda_[k] * lag);
                half[k] += w[a] * rotate * lvl[k];
            }
        }
        return SpectralField::from_half(domain_scale_, std::move(half));
    }

private:
    double step_;
    int n_modes_;
    double domain_scale_;
    std::vector<Complex> lambda_;
    std::vector<std::vector<Complex>> levels_;
};

struct LinearizedRun {
    SpectralField final_field;
    double max_linf = 0.0;
};

/**
 * Evolves w^N under the linearized system with the frozen coefficient taken
 * from `frozen` at bandwidth (1 + q) N. Uses the trajectory's own step size.
 */
inline LinearizedRun evolve_linearized(const ModelParams& params, const SpectralField& w0,
                                       const StoredTrajectory& frozen, double t_end, Method method) {
    const int n = w0.n_modes();
    const int n_frozen = std::min(frozen.n_modes(), (1 + params.q()) * n);
    auto nonlinear = [&](double t, const SpectralField& w) {
        return linearized_nonlinear_term(params, w, frozen.at(t, n_frozen));
    };
    Stepper stepper(linear_multipliers(params, n), method, frozen.step(), nonlinear);
    LinearizedRun run{w0, linf_norm(w0)};
    run.final_field = integrate(stepper, w0, t_end, 1, [&](long, double, const SpectralField& w) {
        run.max_linf = std::max(run.max_linf, linf_norm(w));
    });
    return run;
}

/**
 * ||u - w^N|| at t_star for the intermediate (linearized) problem, where u is
 * the reference trajectory at n_ref and w^N uses the reference step size.
 */
inline ConvergenceReport intermediate_problem_study(const ModelParams& params, const InitialDataSpec& data,
                                                    std::span<const int> n_values, int n_ref, double t_star,
                                                    const IntegratorPolicy& policy = {}, int threads = 1) {
    detail::check_study_inputs(n_values, n_ref, t_star);
    const SpectralField u0_ref = make_initial_data(data, params, n_ref);
    const int n_max = n_values.back();

    ConvergenceReport report;
    report.n_values.assign(n_values.begin(), n_values.end());
    report.errors.assign(n_values.size(), std::numeric_limits<double>::quiet_NaN());
    report.max_linf.assign(n_values.size(), std::numeric_limits<double>::quiet_NaN());
    report.reference_n = n_ref;
    report.t_star = t_star;
    const double dt_raw = policy.dt > 0.0 ? policy.dt : default_time_step(params, project(u0_ref, n_max));
    if (policy.linearized_divisor < 1) throw ArgumentError("study: linearized_divisor must be >= 1");
    report.dt = detail::fit_step(dt_raw / policy.linearized_divisor, t_star);
    report.reference_dt = report.dt;

    const int n_store = std::min(n_ref, (1 + params.q()) * n_max);
    StoredTrajectory trajectory(report.reference_dt, n_store, params.domain_scale(),
                                linear_multipliers(params, n_store).lambda);
    trajectory.push(u0_ref);
    SpectralField u_ref = u0_ref;
    try {
        Stepper stepper(linear_multipliers(params, n_ref), policy.method, report.reference_dt,
                        galerkin_nonlinearity(params));
        u_ref = integrate(stepper, u0_ref, t_star, 1,
                          [&](long, double, const SpectralField& u) { trajectory.push(u); });
    } catch (const DivergenceError& e) {
        report.failure = std::string("reference: ") + e.what();
        return report;
    }

    std::vector<std::string> failures(n_values.size());
    detail::parallel_for(static_cast<int>(n_values.size()), threads, [&](int i) {
        try {
            const LinearizedRun run =
                evolve_linearized(params, project(u0_ref, n_values[i]), trajectory, t_star, policy.method);
            report.errors[i] = l2_norm(embed(run.final_field, n_ref) - u_ref);
            report.max_linf[i] = run.max_linf;
        } catch (const DivergenceError& e) {
            failures[i] = "N = " + std::to_string(n_values[i]) + ": " + e.what();
        }
    });
    for (const auto& f : failures)
        if (!f.empty()) report.failure = report.failure ? *report.failure + "; " + f : f;
    detail::fit_report(report);
    return report;
}

struct PropagationReport {
    double shape_error_linf = 0.0;
    double speed_estimate = std::numeric_limits<double>::quiet_NaN();
    double shift = 0.0;
    std::vector<double> times;
    std::vector<double> peaks;  // unwrapped peak positions
    InvariantRecord invariants;
    SpectralField final_field;
};

/**
 * Evolves a traveling-wave profile to t_star, tracks its peak, fits the speed
 * by least squares on the unwrapped peak path, and measures the L-inf
 * difference between the final state shifted back and the initial profile.
 */
inline PropagationReport propagate_wave(const ModelParams& params, const SpectralField& profile, double t_star,
                                        double dt, Method method = Method::etdrk4, int stride = 1) {
    PropagationReport rep;
    rep.final_field = profile;
    const double period = domain_length(profile);
    rep.times.push_back(0.0);
    rep.peaks.push_back(locate_peak(profile));
    std::vector<Snapshot> snaps{{0.0, profile}};
    if (t_star > 0.0) {
        const IntegratorConfig config{method, detail::fit_step(dt, t_star), t_star, stride};
        const EvolveResult result = evolve(profile, params, config);
        for (std::size_t s = 1; s < result.snapshots.size(); ++s) {
            const double raw = locate_peak(result.snapshots[s].field);
            double step = raw - std::remainder(rep.peaks.back(), period);
            step = std::remainder(step, period);
            rep.times.push_back(result.snapshots[s].t);
            rep.peaks.push_back(rep.peaks.back() + step);
        }
        snaps = result.snapshots;
        rep.final_field = result.final_field;
    }
    rep.invariants = record_invariants(snaps, params);
    rep.shift = rep.peaks.back() - rep.peaks.front();
    rep.shape_error_linf = linf_norm(translate(rep.final_field, -rep.shift) - profile);
    if (rep.times.size() >= 2) {
        double mt = 0.0, mp = 0.0;
        for (std::size_t i = 0; i < rep.times.size(); ++i) {
            mt += rep.times[i];
            mp += rep.peaks[i];
        }
        mt /= rep.times.size();
        mp /= rep.times.size();
        double stt = 0.0, stp = 0.0;
        for (std::size_t i = 0; i < rep.times.size(); ++i) {
            stt += (rep.times[i] - mt) * (rep.times[i] - mt);
            stp += (rep.times[i] - mt) * (rep.peaks[i] - mp);
        }
        rep.speed_estimate = stp / stt;
    }
    return rep;
}

/// KdV solitary wave of speed c (gamma = 0, m = 1, q = 1) propagated to t_star.
inline PropagationReport soliton_propagation_test(double speed, const ModelParams& params, int n_modes,
                                                  double t_star, double dt = 0.0,
                                                  Method method = Method::etdrk4, int stride = 1) {
    const SpectralField profile = kdv_soliton(speed, 0.0, params, n_modes);
    if (!(dt > 0.0)) dt = default_time_step(params, profile);
    return propagate_wave(params, profile, t_star, dt, method, stride);
}

}  // namespace benj

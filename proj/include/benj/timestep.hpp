#pragma once

#include <benj/errors.hpp>
#include <benj/model.hpp>
#include <benj/semidiscrete.hpp>
#include <benj/spectral.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

namespace benj {

enum class Method { etdrk4, ifrk4 };

inline const char* to_string(Method m) noexcept { return m == Method::etdrk4 ? "etdrk4" : "ifrk4"; }

struct IntegratorConfig {
    Method method = Method::etdrk4;
    double dt = 1e-3;
    double t_end = 1.0;
    int snapshot_stride = 1;

    void validate() const {
        if (!(dt > 0.0) || !std::isfinite(dt)) throw ParameterError("integrator: dt > 0 required");
        if (!(t_end > 0.0) || !std::isfinite(t_end)) throw ParameterError("integrator: t_end > 0 required");
        if (dt > t_end) throw ParameterError("integrator: dt <= t_end required");
        if (snapshot_stride < 1) throw ParameterError("integrator: snapshot_stride >= 1 required");
    }
};

/**
 * Step size used when none is given: the exponential integrators absorb the
 * dispersive stiffness, so only the advective nonlinear CFL is capped,
 *
 *     dt = 0.5 min(1e-2, 1 / (kappa_max max(1, |u0|_inf^q))),  kappa_max = N / L.
 */
inline double default_time_step(const ModelParams& params, const SpectralField& u0) {
    const double kappa_max = u0.n_modes() / u0.domain_scale();
    const double speed = std::max(1.0, ipow(linf_norm(u0), params.q()));
    return 0.5 * std::min(1e-2, 1.0 / (std::max(kappa_max, 1.0) * speed));
}

/// dt-free weights of the fourth-order exponential schemes at z = Lambda dt.
struct EtdWeights {
    Complex e;       // exp(z)
    Complex e_half;  // exp(z/2)
    Complex q;       // (exp(z/2) - 1) / z
    Complex f1;      // (-4 - z + exp(z)(4 - 3z + z^2)) / z^3
    Complex f2;      // (2 + z + exp(z)(z - 2)) / z^3
    Complex f3;      // (-4 - 3z - z^2 + exp(z)(4 - z)) / z^3
};

namespace detail {

inline EtdWeights etd_weights_direct(Complex z) {
    const Complex ez = std::exp(z);
    const Complex ez2 = std::exp(0.5 * z);
    const Complex z3 = z * z * z;
    return {ez,
            ez2,
            (ez2 - 1.0) / z,
            (-4.0 - z + ez * (4.0 - 3.0 * z + z * z)) / z3,
            (2.0 + z + ez * (z - 2.0)) / z3,
            (-4.0 - 3.0 * z - z * z + ez * (4.0 - z)) / z3};
}

}  // namespace detail

inline constexpr int kContourPoints = 64;

/**
 * Weights at z. For |z| < 1 the quotients cancel catastrophically, so each is
 * replaced by its mean over a circle of radius 1 + |z| centred at z (every
 * node sits at distance >= 1 from the origin). Exact limits at z = 0 are
 * q = 1/2, f1 = f2 = f3 = 1/6.
 */
inline EtdWeights etd_weights(Complex z) {
    if (std::abs(z) >= 1.0) return detail::etd_weights_direct(z);
    const double radius = 1.0 + std::abs(z);
    EtdWeights sum{};
    for (int j = 0; j < kContourPoints; ++j) {
        const double theta = std::numbers::pi * (j + 0.5) * 2.0 / kContourPoints;
        const EtdWeights w = detail::etd_weights_direct(z + std::polar(radius, theta));
        sum.q += w.q;
        sum.f1 += w.f1;
        sum.f2 += w.f2;
        sum.f3 += w.f3;
    }
    const double inv = 1.0 / kContourPoints;
    return {std::exp(z), std::exp(0.5 * z), sum.q * inv, sum.f1 * inv, sum.f2 * inv, sum.f3 * inv};
}

/// Per-mode weights for one step size, scaled by dt where the scheme needs it.
struct EtdCoefficients {
    double dt = 0.0;
    std::vector<Complex> e, e_half, q, f1, f2, f3;
};

inline EtdCoefficients etd_coefficients(const LinearMultipliers& lm, double dt) {
    if (!(dt > 0.0)) throw ParameterError("etd_coefficients: dt > 0 required");
    const std::size_t n = lm.lambda.size();
    EtdCoefficients c{dt, std::vector<Complex>(n), std::vector<Complex>(n), std::vector<Complex>(n),
                      std::vector<Complex>(n), std::vector<Complex>(n), std::vector<Complex>(n)};
    for (std::size_t k = 0; k < n; ++k) {
        const EtdWeights w = etd_weights(lm.lambda[k] * dt);
        c.e[k] = w.e;
        c.e_half[k] = w.e_half;
        c.q[k] = dt * w.q;
        c.f1[k] = dt * w.f1;
        c.f2[k] = dt * w.f2;
        c.f3[k] = dt * w.f3;
    }
    return c;
}

/**
 * One-step map for d/dt u = Lambda u + N(t, u) with diagonal Lambda.
 *
 * Nonlinear is any callable SpectralField(double t, const SpectralField&).
 * Both schemes are fourth order and treat the linear part exactly.
 */
template <class Nonlinear>
class Stepper {
public:
    Stepper(LinearMultipliers multipliers, Method method, double dt, Nonlinear nonlinear)
        : lm_(std::move(multipliers)), method_(method), nonlinear_(std::move(nonlinear)),
          coeffs_(etd_coefficients(lm_, dt)) {}

    double dt() const noexcept { return coeffs_.dt; }
    Method method() const noexcept { return method_; }
    const LinearMultipliers& multipliers() const noexcept { return lm_; }
    const EtdCoefficients& coefficients() const noexcept { return coeffs_; }

    SpectralField step(const SpectralField& u, double t) const { return step_with(coeffs_, u, t); }

    /// Step of arbitrary size (used for a shortened final step).
    SpectralField step(const SpectralField& u, double t, double dt) const {
        if (std::abs(dt - coeffs_.dt) <= 1e-14 * coeffs_.dt) return step_with(coeffs_, u, t);
        return step_with(etd_coefficients(lm_, dt), u, t);
    }

private:
    using Vec = std::span<const Complex>;

    static Vec c(const SpectralField& f) noexcept { return f.half(); }

    SpectralField make(const SpectralField& like, auto&& fn) const {
        SpectralField out(like.n_modes(), like.domain_scale());
        auto& o = SpectralFieldAccess::coeffs(out);
        for (std::size_t k = 0; k < o.size(); ++k) o[k] = fn(k);
        o[0] = {o[0].real(), 0.0};
        return out;
    }

    SpectralField step_with(const EtdCoefficients& w, const SpectralField& u, double t) const {
        if (u.n_modes() != lm_.n_modes || u.domain_scale() != lm_.domain_scale)
            throw ShapeError("Stepper: field does not match the linear multipliers");
        const double h = w.dt;
        const Vec uc = c(u);
        if (method_ == Method::etdrk4) {
            const SpectralField nu = nonlinear_(t, u);
            const Vec n0 = c(nu);
            const SpectralField a = make(u, [&](std::size_t k) { return w.e_half[k] * uc[k] + w.q[k] * n0[k]; });
            const SpectralField na = nonlinear_(t + 0.5 * h, a);
            const Vec n1 = c(na);
            const SpectralField b = make(u, [&](std::size_t k) { return w.e_half[k] * uc[k] + w.q[k] * n1[k]; });
            const SpectralField nb = nonlinear_(t + 0.5 * h, b);
            const Vec n2 = c(nb);
            const Vec ac = c(a);
            const SpectralField cc =
                make(u, [&](std::size_t k) { return w.e_half[k] * ac[k] + w.q[k] * (2.0 * n2[k] - n0[k]); });
            const SpectralField nc = nonlinear_(t + h, cc);
            const Vec n3 = c(nc);
            return make(u, [&](std::size_t k) {
                return w.e[k] * uc[k] + w.f1[k] * n0[k] + 2.0 * w.f2[k] * (n1[k] + n2[k]) + w.f3[k] * n3[k];
            });
        }
        // integrating-factor RK4
        const SpectralField k1f = nonlinear_(t, u);
        const Vec k1 = c(k1f);
        const SpectralField s2 = make(u, [&](std::size_t k) { return w.e_half[k] * (uc[k] + 0.5 * h * k1[k]); });
        const SpectralField k2f = nonlinear_(t + 0.5 * h, s2);
        const Vec k2 = c(k2f);
        const SpectralField s3 = make(u, [&](std::size_t k) { return w.e_half[k] * uc[k] + 0.5 * h * k2[k]; });
        const SpectralField k3f = nonlinear_(t + 0.5 * h, s3);
        const Vec k3 = c(k3f);
        const SpectralField s4 = make(u, [&](std::size_t k) { return w.e[k] * uc[k] + h * w.e_half[k] * k3[k]; });
        const SpectralField k4f = nonlinear_(t + h, s4);
        const Vec k4 = c(k4f);
        return make(u, [&](std::size_t k) {
            return w.e[k] * uc[k] +
                   (h / 6.0) * (w.e[k] * k1[k] + 2.0 * w.e_half[k] * (k2[k] + k3[k]) + k4[k]);
        });
    }

    LinearMultipliers lm_;
    Method method_;
    Nonlinear nonlinear_;
    EtdCoefficients coeffs_;
};

template <class Nonlinear>
Stepper(LinearMultipliers, Method, double, Nonlinear) -> Stepper<Nonlinear>;

/// Nonlinear part of the Galerkin system as a stepper callback.
inline auto galerkin_nonlinearity(const ModelParams& params) {
    return [params](double, const SpectralField& u) { return nonlinear_term(params, u); };
}

/// Zero nonlinearity: pure linear flow.
inline auto no_nonlinearity() {
    return [](double, const SpectralField& u) { return SpectralField(u.n_modes(), u.domain_scale()); };
}

/// Number of steps and the size of the last one for reaching t_end with dt.
struct StepPlan {
    long steps;
    double last_dt;
};

inline StepPlan plan_steps(double dt, double t_end) {
    const double ratio = t_end / dt;
    const double nearest = std::round(ratio);
    long n = (std::abs(ratio - nearest) <= 1e-9 * std::max(1.0, ratio)) ? static_cast<long>(nearest)
                                                                         : static_cast<long>(std::ceil(ratio));
    n = std::max(1L, n);
    return {n, t_end - static_cast<double>(n - 1) * dt};
}

/**
 * Steps u0 to config.t_end. observer(step, t, field) fires after every
 * snapshot_stride-th step and after the last one. Throws DivergenceError on
 * nonfinite coefficients or L2 growth beyond 1e6 times the initial norm.
 */
template <class Nonlinear, class Observer>
SpectralField integrate(const Stepper<Nonlinear>& stepper, const SpectralField& u0, double t_end,
                        int snapshot_stride, Observer&& observer) {
    const StepPlan plan = plan_steps(stepper.dt(), t_end);
    const double norm0 = l2_norm(u0);
    SpectralField u = u0;
    for (long s = 0; s < plan.steps; ++s) {
        const double t = static_cast<double>(s) * stepper.dt();
        const bool last = (s + 1 == plan.steps);
        u = last ? stepper.step(u, t, plan.last_dt) : stepper.step(u, t);
        const double t_next = last ? t_end : static_cast<double>(s + 1) * stepper.dt();
        if (!u.is_finite()) throw DivergenceError("nonfinite coefficients", t_next);
        if (norm0 > 0.0 && l2_norm(u) > 1e6 * norm0) throw DivergenceError("L2 norm grew beyond 1e6x", t_next);
        if ((s + 1) % snapshot_stride == 0 || last) observer(s + 1, t_next, u);
    }
    return u;
}

struct Snapshot {
    double t;
    SpectralField field;
};

struct EvolveResult {
    SpectralField final_field;
    std::vector<Snapshot> snapshots;  // t = 0 first, then every snapshot_stride steps and t_end
};

using EvolveObserver = std::function<void(double, const SpectralField&)>;

/// Galerkin evolution of u0 under the model; deterministic for fixed inputs.
inline EvolveResult evolve(const SpectralField& u0, const ModelParams& params, const IntegratorConfig& config,
                           const EvolveObserver& observer = {}) {
    config.validate();
    detail::require_domain(params, u0, "evolve");
    Stepper stepper(linear_multipliers(params, u0.n_modes()), config.method, config.dt,
                    galerkin_nonlinearity(params));
    EvolveResult result{u0, {{0.0, u0}}};
    result.final_field = integrate(stepper, u0, config.t_end, config.snapshot_stride,
                                   [&](long, double t, const SpectralField& u) {
                                       result.snapshots.push_back({t, u});
                                       if (observer) observer(t, u);
                                   });
    return result;
}

/// A single step of size config.dt from t = 0.
inline SpectralField step(const SpectralField& u, const ModelParams& params, const IntegratorConfig& config) {
    if (!(config.dt > 0.0)) throw ParameterError("step: dt > 0 required");
    detail::require_domain(params, u, "step");
    Stepper stepper(linear_multipliers(params, u.n_modes()), config.method, config.dt,
                    galerkin_nonlinearity(params));
    SpectralField next = stepper.step(u, 0.0);
    if (!next.is_finite()) throw DivergenceError("nonfinite coefficients", config.dt);
    return next;
}

}  // namespace benj

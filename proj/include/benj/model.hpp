#pragma once

#include <benj/errors.hpp>

#include <cmath>
#include <string>

namespace benj {

/// x^n for integer n >= 0 by repeated squaring (x^0 == 1, including 0^0).
inline constexpr double ipow(double x, int n) noexcept {
    double result = 1.0;
    while (n > 0) {
        if (n & 1) result *= x;
        x *= x;
        n >>= 1;
    }
    return result;
}

/**
 * Parameters of u_t - L u_x + f(u)_x = 0 on [-L*pi, L*pi).
 *
 * The operator L has Fourier symbol delta |k|^{2m} - gamma |k|^{2r} and the
 * nonlinearity is f(u) = u^{q+1} / (q+1). domain_scale rescales the periodic
 * cell; domain_scale == 1 gives [-pi, pi).
 */
class ModelParams {
public:
    ModelParams(int m, double r, double gamma, double delta, int q, double domain_scale = 1.0)
        : m_(m), r_(r), gamma_(gamma), delta_(delta), q_(q), domain_scale_(domain_scale) {
        if (m_ < 1) throw ParameterError("model: m >= 1 required (got " + std::to_string(m_) + ")");
        if (!(r_ >= 0.0)) throw ParameterError("model: r >= 0 required");
        if (!(r_ < m_)) throw ParameterError("model: r < m required");
        if (!(gamma_ >= 0.0)) throw ParameterError("model: gamma >= 0 required");
        if (!(delta_ > 0.0)) throw ParameterError("model: delta > 0 required");
        if (q_ < 1) throw ParameterError("model: q >= 1 required (got " + std::to_string(q_) + ")");
        if (!(domain_scale_ > 0.0) || !std::isfinite(domain_scale_))
            throw ParameterError("model: domain_scale > 0 required");
        if (!std::isfinite(r_) || !std::isfinite(gamma_) || !std::isfinite(delta_))
            throw ParameterError("model: parameters must be finite");
    }

    /// Benjamin equation family: m = 1, r = 1/2.
    static ModelParams benjamin(double delta, double gamma, int q = 1, double domain_scale = 1.0) {
        return {1, 0.5, gamma, delta, q, domain_scale};
    }

    /// Generalized KdV: m = 1, gamma = 0.
    static ModelParams gkdv(double delta, int q = 1, double domain_scale = 1.0) {
        return {1, 0.5, 0.0, delta, q, domain_scale};
    }

    int m() const noexcept { return m_; }
    double r() const noexcept { return r_; }
    double gamma() const noexcept { return gamma_; }
    double delta() const noexcept { return delta_; }
    int q() const noexcept { return q_; }
    double domain_scale() const noexcept { return domain_scale_; }

    ModelParams with_domain_scale(double L) const { return {m_, r_, gamma_, delta_, q_, L}; }

    friend bool operator==(const ModelParams&, const ModelParams&) = default;

private:
    int m_;
    double r_;
    double gamma_;
    double delta_;
    int q_;
    double domain_scale_;
};

/// |kappa|^p with |0|^0 == 1. Integer p goes through ipow, anything else
/// through exp(p log|kappa|).
inline double abs_power(double kappa, double p) noexcept {
    const double a = std::abs(kappa);
    if (p == 0.0) return 1.0;
    if (a == 0.0) return 0.0;
    const double rounded = std::round(p);
    if (rounded == p && rounded <= 64.0) return ipow(a, static_cast<int>(rounded));
    return std::exp(p * std::log(a));
}

/// Fourier symbol l(kappa) = delta |kappa|^{2m} - gamma |kappa|^{2r}.
inline double symbol_l(const ModelParams& p, double kappa) noexcept {
    const double dispersive = p.delta() * ipow(kappa * kappa, p.m());
    if (p.gamma() == 0.0) return dispersive;
    return dispersive - p.gamma() * abs_power(kappa, 2.0 * p.r());
}

/// f(u) = u^{q+1} / (q+1)
inline double nonlinear_f(const ModelParams& p, double u) noexcept {
    return ipow(u, p.q() + 1) / (p.q() + 1);
}

/// Primitive of f with F(0) = 0: u^{q+2} / ((q+1)(q+2)).
inline double nonlinear_F(const ModelParams& p, double u) noexcept {
    return ipow(u, p.q() + 2) / (static_cast<double>(p.q() + 1) * (p.q() + 2));
}

/// f'(u) = u^q
inline double f_prime(const ModelParams& p, double u) noexcept { return ipow(u, p.q()); }

}  // namespace benj

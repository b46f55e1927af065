#pragma once

#include <benj/model.hpp>
#include <benj/spectral.hpp>

#include <array>
#include <vector>

namespace benj {

/// Lambda_k = i kappa_k l(kappa_k) for k = 0..N; the linear part of the
/// coefficient ODE is d/dt c_k = Lambda_k c_k.
struct LinearMultipliers {
    int n_modes = 0;
    double domain_scale = 1.0;
    std::vector<Complex> lambda;
};

inline LinearMultipliers linear_multipliers(const ModelParams& params, int n_modes) {
    if (n_modes < 1) throw BandwidthError("linear_multipliers: n_modes must be >= 1");
    LinearMultipliers out{n_modes, params.domain_scale(), std::vector<Complex>(n_modes + 1)};
    for (int k = 0; k <= n_modes; ++k) {
        const double kappa = k / params.domain_scale();
        out.lambda[k] = Complex(0.0, kappa * symbol_l(params, kappa));
    }
    return out;
}

inline SpectralField apply_linear(const LinearMultipliers& lm, const SpectralField& u) {
    if (u.n_modes() != lm.n_modes || u.domain_scale() != lm.domain_scale)
        throw ShapeError("apply_linear: field does not match multipliers");
    return apply_multiplier(u, [&](int k) { return lm.lambda[k]; });
}

namespace detail {

inline void require_domain(const ModelParams& params, const SpectralField& u, const char* where) {
    if (params.domain_scale() != u.domain_scale())
        throw ShapeError(std::string(where) + ": field domain_scale differs from model");
}

}  // namespace detail

/// -(f(u))_x projected onto S_N, with f(u) formed exactly.
inline SpectralField nonlinear_term(const ModelParams& params, const SpectralField& u) {
    detail::require_domain(params, u, "nonlinear_term");
    SpectralField flux = dealiased_power(u, params.q() + 1);
    const double inv = 1.0 / (params.q() + 1);
    return apply_multiplier(flux, [&](int k) { return Complex(0.0, -u.wavenumber(k) * inv); });
}

/**
 * Right-hand side of the Fourier-Galerkin system
 *
 *     d/dt c_k = i kappa_k ( l(kappa_k) c_k - [f(u)]_k ),   |k| <= N.
 *
 * Mode 0 is identically zero.
 */
inline SpectralField rhs(const ModelParams& params, const SpectralField& u) {
    return apply_linear(linear_multipliers(params, u.n_modes()), u) + nonlinear_term(params, u);
}

/**
 * -P_N[ f'(u_frozen) w_x ] for the linearized (intermediate) system.
 *
 * u_frozen may carry a different bandwidth than w; the product is evaluated
 * on one grid padded for q*N_u + N_w, so the retained modes are exact.
 */
inline SpectralField linearized_nonlinear_term(const ModelParams& params, const SpectralField& w,
                                               const SpectralField& u_frozen) {
    detail::require_domain(params, w, "linearized_nonlinear_term");
    if (u_frozen.domain_scale() != w.domain_scale())
        throw ShapeError("linearized_nonlinear_term: frozen coefficient on a different domain");
    const SpectralField wx = derivative(w);
    const std::array<ProductFactor, 2> factors{{{&u_frozen, params.q()}, {&wx, 1}}};
    SpectralField product = dealiased_product(factors, w.n_modes());
    product *= -1.0;
    return product;
}

/// Lambda_k w_k - P_N[ f'(u_frozen) w_x ]_k
inline SpectralField linearized_rhs(const ModelParams& params, const SpectralField& w,
                                    const SpectralField& u_frozen) {
    return apply_linear(linear_multipliers(params, w.n_modes()), w) +
           linearized_nonlinear_term(params, w, u_frozen);
}

}  // namespace benj

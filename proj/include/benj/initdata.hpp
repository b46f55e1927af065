#pragma once

#include <benj/errors.hpp>
#include <benj/model.hpp>
#include <benj/semidiscrete.hpp>
#include <benj/snapshot_io.hpp>
#include <benj/spectral.hpp>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

namespace benj {

namespace detail {

// Enough periodic images that the dropped ones are below 1e-17 relative,
// given a profile decaying like exp(-distance / decay_length).
inline int image_count(double decay_length, double domain_scale) {
    const double period = 2.0 * std::numbers::pi * domain_scale;
    return 1 + static_cast<int>(std::ceil(41.0 * decay_length / period));
}

inline int sampling_points(int n_modes) { return std::max(4 * n_modes, 2 * n_modes + 1); }

}  // namespace detail

/// P_N of the periodized Gaussian a exp(-((x - x0) / w)^2).
inline SpectralField gaussian(double amplitude, double width, double center, int n_modes, double domain_scale) {
    if (!(width > 0.0)) throw ParameterError("gaussian: width > 0 required");
    const double period = 2.0 * std::numbers::pi * domain_scale;
    // exp(-(d/w)^2) < 1e-17 once d > 6.3 w
    const int images = 1 + static_cast<int>(std::ceil(6.5 * width / period));
    auto profile = [&](double x) {
        double sum = 0.0;
        for (int n = -images; n <= images; ++n) {
            const double s = (x - center - n * period) / width;
            sum += std::exp(-s * s);
        }
        return amplitude * sum;
    };
    return sample(profile, n_modes, domain_scale, detail::sampling_points(n_modes));
}

/// a cos(k x / L) with k = mode.
inline SpectralField cosine(double amplitude, int mode, int n_modes, double domain_scale) {
    if (mode < 0 || mode > n_modes) throw BandwidthError("cosine: mode must lie in [0, N]");
    SpectralField f(n_modes, domain_scale);
    f.set(mode, mode == 0 ? Complex(amplitude) : Complex(0.5 * amplitude));
    return f;
}

/// Largest tolerated phi(L pi) / phi(x0) for the image-summed KdV profile;
/// neighbouring images then interact at the 1e-10 level.
inline constexpr double kSolitonEdgeRatio = 1e-5;

/**
 * Closed-form KdV solitary wave 3c sech^2( sqrt(c/delta) (x - x0) / 2 ), summed
 * over periodic images and projected onto S_N. Needs gamma = 0, m = 1, q = 1.
 */
inline SpectralField kdv_soliton(double speed, double center, const ModelParams& params, int n_modes) {
    if (params.gamma() != 0.0 || params.m() != 1 || params.q() != 1)
        throw ParameterError("kdv_soliton: requires gamma = 0, m = 1, q = 1");
    if (!(speed > 0.0)) throw ParameterError("kdv_soliton: speed c > 0 required");
    const double L = params.domain_scale();
    const double a = 0.5 * std::sqrt(speed / params.delta());
    const double edge = 1.0 / std::cosh(a * std::numbers::pi * L);
    if (edge * edge > kSolitonEdgeRatio)
        throw ParameterError("kdv_soliton: domain too short for the wave (edge ratio " +
                             std::to_string(edge * edge) + " > 1e-5)");
    const double period = 2.0 * std::numbers::pi * L;
    const int images = detail::image_count(0.5 / a, L);
    auto profile = [&](double x) {
        double sum = 0.0;
        for (int n = -images; n <= images; ++n) {
            const double sech = 1.0 / std::cosh(a * (x - center - n * period));
            sum += sech * sech;
        }
        return 3.0 * speed * sum;
    };
    return sample(profile, n_modes, L, detail::sampling_points(n_modes));
}

/**
 * Random field with c_k = zeta_k (1 + kappa_k^2)^{-(mu+1)/2} for 1 <= k <= N,
 * |zeta_k| = 1, c_0 = 0, rescaled to unit H^mu norm. It lies in H^mu but in no
 * H^{mu + 1/2 + eps}. Phases are drawn in order k = 1, 2, ..., so fields with
 * the same seed agree on their common modes up to normalization.
 */
inline SpectralField random_sobolev(double mu, std::uint64_t seed, int n_modes, double domain_scale) {
    if (!(mu >= 0.0)) throw ParameterError("random_sobolev: mu >= 0 required");
    if (n_modes < 1) throw BandwidthError("random_sobolev: n_modes >= 1 required");
    std::mt19937_64 rng(seed);
    SpectralField f(n_modes, domain_scale);
    for (int k = 1; k <= n_modes; ++k) {
        // top 53 bits -> uniform in [0, 1), independent of the library's distributions
        const double unit = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        const double kappa = f.wavenumber(k);
        const double magnitude = std::pow(1.0 + kappa * kappa, -0.5 * (mu + 1.0));
        f.set(k, std::polar(magnitude, 2.0 * std::numbers::pi * unit));
    }
    f *= 1.0 / sobolev_norm(f, mu);
    return f;
}

struct PetviashviliResult {
    SpectralField profile;
    int iterations = 0;
    double residual = 0.0;
    std::vector<double> residual_history;
    std::vector<double> stabilizer_history;
};

/// (c + l(kappa_k)) for k = 0..N; throws SpectrumError on the first nonpositive mode.
inline std::vector<double> traveling_wave_symbol(const ModelParams& params, double speed, int n_modes) {
    std::vector<double> d(static_cast<std::size_t>(n_modes) + 1);
    for (int k = 0; k <= n_modes; ++k) {
        d[k] = speed + symbol_l(params, k / params.domain_scale());
        if (!(d[k] > 0.0))
            throw SpectrumError("petviashvili: c + l(kappa) = " + std::to_string(d[k]) + " <= 0 at mode " +
                                    std::to_string(k),
                                k);
    }
    return d;
}

/// ||(c + L) phi - P_N f(phi)|| / ||phi||
inline double traveling_wave_residual(const ModelParams& params, double speed, const SpectralField& phi) {
    const auto d = traveling_wave_symbol(params, speed, phi.n_modes());
    SpectralField f = dealiased_power(phi, params.q() + 1);
    f *= 1.0 / (params.q() + 1);
    const SpectralField lhs = apply_multiplier(phi, [&](int k) { return Complex(d[k]); });
    return l2_norm(lhs - f) / l2_norm(phi);
}

/**
 * Solitary (periodic traveling) wave of speed c: solves (c + L) phi = P_N f(phi)
 * by the stabilized fixed point
 *
 *     phi <- s^theta (c + L)^{-1} f(phi),   s = ((c + L) phi, phi) / (f(phi), phi),
 *
 * with theta = (q + 1) / q. Stops once the relative residual is <= tol and
 * returns the profile translated so its peak sits where the guess peaks.
 */
inline PetviashviliResult petviashvili(const ModelParams& params, double speed, const SpectralField& guess,
                                       double tol, int max_iter) {
    detail::require_domain(params, guess, "petviashvili");
    if (!(tol > 0.0)) throw ParameterError("petviashvili: tol > 0 required");
    if (max_iter < 1) throw ParameterError("petviashvili: max_iter >= 1 required");
    if (l2_norm(guess) == 0.0) throw ParameterError("petviashvili: guess must be nonzero");
    const auto d = traveling_wave_symbol(params, speed, guess.n_modes());
    const double theta = static_cast<double>(params.q() + 1) / params.q();
    const double target = locate_peak(guess);

    PetviashviliResult out;
    SpectralField phi = guess;
    for (int it = 0; it <= max_iter; ++it) {
        SpectralField f = dealiased_power(phi, params.q() + 1);
        f *= 1.0 / (params.q() + 1);
        const SpectralField lhs = apply_multiplier(phi, [&](int k) { return Complex(d[k]); });
        const double residual = l2_norm(lhs - f) / l2_norm(phi);
        out.residual_history.push_back(residual);
        if (!std::isfinite(residual))
            throw ConvergenceError("petviashvili: iteration produced nonfinite values", out.residual_history);
        if (residual <= tol) {
            SpectralField centered = translate(phi, target - locate_peak(phi));
            const double r = traveling_wave_residual(params, speed, centered);
            if (r <= tol) {
                out.profile = std::move(centered);
                out.iterations = it;
                out.residual = r;
                return out;
            }
        }
        if (it == max_iter) break;
        const double s = l2_inner(lhs, phi) / l2_inner(f, phi);
        out.stabilizer_history.push_back(s);
        if (!(s > 0.0) || !std::isfinite(s))
            throw ConvergenceError("petviashvili: stabilizing factor " + std::to_string(s) + " is not positive",
                                   out.residual_history);
        const double scale = std::pow(s, theta);
        phi = apply_multiplier(f, [&](int k) { return Complex(scale / d[k]); });
    }
    throw ConvergenceError("petviashvili: no convergence in " + std::to_string(max_iter) +
                               " iterations (residual " + std::to_string(out.residual_history.back()) + ")",
                           out.residual_history);
}

enum class InitialKind { gaussian, cosine, kdv_soliton, random_sobolev, petviashvili_wave, file };

inline const char* to_string(InitialKind k) noexcept {
    switch (k) {
        case InitialKind::gaussian: return "gaussian";
        case InitialKind::cosine: return "cosine";
        case InitialKind::kdv_soliton: return "kdv_soliton";
        case InitialKind::random_sobolev: return "random_sobolev";
        case InitialKind::petviashvili_wave: return "petviashvili_wave";
        case InitialKind::file: return "file";
    }
    return "?";
}

/// Which generator to call and with what. Fields unused by a kind are ignored.
struct InitialDataSpec {
    InitialKind kind = InitialKind::gaussian;
    double amplitude = 1.0;
    double width = 0.5;
    double center = 0.0;
    int mode = 1;             // cosine
    double speed = 0.5;       // kdv_soliton, petviashvili_wave
    double mu = 4.0;          // random_sobolev
    std::uint64_t seed = 0;   // random_sobolev
    std::string path;         // file
    double tol = 1e-12;       // petviashvili_wave
    int max_iter = 1000;      // petviashvili_wave
};

/// u0 at bandwidth N for the given model. The petviashvili_wave kind starts
/// from gaussian(amplitude, width, center).
inline SpectralField make_initial_data(const InitialDataSpec& spec, const ModelParams& params, int n_modes) {
    const double L = params.domain_scale();
    switch (spec.kind) {
        case InitialKind::gaussian: return gaussian(spec.amplitude, spec.width, spec.center, n_modes, L);
        case InitialKind::cosine: return cosine(spec.amplitude, spec.mode, n_modes, L);
        case InitialKind::kdv_soliton: return kdv_soliton(spec.speed, spec.center, params, n_modes);
        case InitialKind::random_sobolev: return random_sobolev(spec.mu, spec.seed, n_modes, L);
        case InitialKind::petviashvili_wave: {
            const SpectralField guess = gaussian(spec.amplitude, spec.width, spec.center, n_modes, L);
            return petviashvili(params, spec.speed, guess, spec.tol, spec.max_iter).profile;
        }
        case InitialKind::file: {
            const SnapshotData data = read_snapshot_file(spec.path);
            if (data.field.domain_scale() != L)
                throw ShapeError("initial data file '" + spec.path + "' has L = " +
                                 format_real(data.field.domain_scale()) + ", model has " + format_real(L));
            return resize(data.field, n_modes);
        }
    }
    throw ParameterError("unknown initial data kind");
}

}  // namespace benj

#pragma once

#include <benj/errors.hpp>
#include <benj/fft.hpp>
#include <benj/model.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace benj {

using Complex = std::complex<double>;

/**
 * A real trigonometric polynomial on [-L pi, L pi):
 *
 *     u(x) = sum_{|k| <= N} c_k exp(i k x / L),   c_{-k} = conj(c_k).
 *
 * Only c_0..c_N are stored; negative modes are implied by Hermitian
 * symmetry, so the field is real by construction. c_0 is kept real.
 */
class SpectralField {
public:
    SpectralField() : SpectralField(0, 1.0) {}

    SpectralField(int n_modes, double domain_scale)
        : n_modes_(n_modes), domain_scale_(domain_scale),
          coeffs_(static_cast<std::size_t>(n_modes) + 1) {
        if (n_modes < 0) throw BandwidthError("SpectralField: n_modes must be >= 0");
        if (!(domain_scale > 0.0)) throw ParameterError("SpectralField: domain_scale must be > 0");
    }

    /// From c_0..c_N; the imaginary part of c_0 is dropped.
    static SpectralField from_half(double domain_scale, std::vector<Complex> half) {
        if (half.empty()) throw BandwidthError("SpectralField: empty coefficient vector");
        SpectralField f(static_cast<int>(half.size()) - 1, domain_scale);
        f.coeffs_ = std::move(half);
        f.coeffs_[0] = {f.coeffs_[0].real(), 0.0};
        return f;
    }

    /// From c_{-N}..c_N (2N+1 entries). The Hermitian part is kept:
    /// c_k <- (c_k + conj(c_{-k})) / 2.
    static SpectralField from_full(double domain_scale, std::span<const Complex> full) {
        if (full.size() % 2 == 0) throw BandwidthError("SpectralField: full vector needs 2N+1 entries");
        const int n = static_cast<int>(full.size() / 2);
        SpectralField f(n, domain_scale);
        for (int k = 0; k <= n; ++k)
            f.coeffs_[k] = 0.5 * (full[n + k] + std::conj(full[n - k]));
        f.coeffs_[0] = {f.coeffs_[0].real(), 0.0};
        return f;
    }

    int n_modes() const noexcept { return n_modes_; }
    double domain_scale() const noexcept { return domain_scale_; }

    /// Physical wavenumber k / L.
    double wavenumber(int k) const noexcept { return k / domain_scale_; }

    /// Coefficient c_k for any integer k; zero outside [-N, N].
    Complex operator[](int k) const noexcept {
        if (k > n_modes_ || k < -n_modes_) return {};
        return k >= 0 ? coeffs_[k] : std::conj(coeffs_[-k]);
    }

    /// Sets c_k (and implicitly c_{-k}). Setting k = 0 keeps the real part only.
    void set(int k, Complex value) {
        if (k > n_modes_ || k < -n_modes_)
            throw BandwidthError("SpectralField::set: mode " + std::to_string(k) + " outside [-N, N]");
        if (k == 0) value = {value.real(), 0.0};
        if (k >= 0)
            coeffs_[k] = value;
        else
            coeffs_[-k] = std::conj(value);
    }

    /// c_0..c_N.
    std::span<const Complex> half() const noexcept { return coeffs_; }

    /// c_{-N}..c_N.
    std::vector<Complex> full() const {
        std::vector<Complex> out(2 * static_cast<std::size_t>(n_modes_) + 1);
        for (int k = -n_modes_; k <= n_modes_; ++k) out[k + n_modes_] = (*this)[k];
        return out;
    }

    bool is_finite() const noexcept {
        return std::all_of(coeffs_.begin(), coeffs_.end(), [](const Complex& c) {
            return std::isfinite(c.real()) && std::isfinite(c.imag());
        });
    }

    bool same_shape(const SpectralField& o) const noexcept {
        return n_modes_ == o.n_modes_ && domain_scale_ == o.domain_scale_;
    }

    SpectralField& operator+=(const SpectralField& o) {
        require_same_shape(o, "operator+=");
        for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
        return *this;
    }
    SpectralField& operator-=(const SpectralField& o) {
        require_same_shape(o, "operator-=");
        for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= o.coeffs_[i];
        return *this;
    }
    SpectralField& operator*=(double s) noexcept {
        for (auto& c : coeffs_) c *= s;
        return *this;
    }

    friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
    friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
    friend SpectralField operator*(double s, SpectralField a) { return a *= s; }
    friend SpectralField operator*(SpectralField a, double s) { return a *= s; }

    friend bool operator==(const SpectralField&, const SpectralField&) = default;

    void require_same_shape(const SpectralField& o, const char* where) const {
        if (!same_shape(o))
            throw ShapeError(std::string(where) + ": fields differ in n_modes or domain_scale (" +
                             std::to_string(n_modes_) + " vs " + std::to_string(o.n_modes_) + ")");
    }

private:
    friend class SpectralFieldAccess;

    int n_modes_;
    double domain_scale_;
    std::vector<Complex> coeffs_;
};

/// Mutable access to stored coefficients for kernels that maintain the
/// invariants themselves (c_0 real).
class SpectralFieldAccess {
public:
    static std::vector<Complex>& coeffs(SpectralField& f) noexcept { return f.coeffs_; }
};

/// Samples on x_j = -L pi + 2 L pi j / M, j = 0..M-1.
struct PhysicalField {
    std::vector<double> values;
    double domain_scale = 1.0;

    int n_points() const noexcept { return static_cast<int>(values.size()); }
};

inline double grid_point(int j, int n_points, double domain_scale) noexcept {
    return domain_scale * std::numbers::pi * (-1.0 + 2.0 * j / n_points);
}

/// Trigonometric synthesis onto M equispaced points (M >= 2N+1).
inline PhysicalField to_physical(const SpectralField& field, int n_points) {
    const int n = field.n_modes();
    if (n_points < 2 * n + 1)
        throw BandwidthError("to_physical: " + std::to_string(n_points) + " points cannot carry " +
                             std::to_string(n) + " modes (need M >= 2N+1)");
    RealFft fft(n_points);
    std::vector<Complex> spectrum(static_cast<std::size_t>(fft.half_size()));
    // x_j starts at -L pi, which puts a factor (-1)^k on every mode.
    const auto half = field.half();
    for (int k = 0; k <= n; ++k) spectrum[k] = (k % 2 == 0) ? half[k] : -half[k];
    PhysicalField out{std::vector<double>(static_cast<std::size_t>(n_points)), field.domain_scale()};
    fft.backward(spectrum, out.values);
    return out;
}

/**
 * Discrete Fourier analysis truncated to |k| <= N (M >= 2N+1).
 *
 * The result is the projection onto S_N of the trigonometric interpolant of
 * the samples. Content above the Nyquist mode of the grid is aliased into the
 * retained modes (k <-> k - M); that is a property of sampling, not an error.
 */
inline SpectralField to_spectral(const PhysicalField& values, int n_modes) {
    const int m = values.n_points();
    if (m < 2 * n_modes + 1)
        throw BandwidthError("to_spectral: " + std::to_string(m) + " points cannot resolve " +
                             std::to_string(n_modes) + " modes (need M >= 2N+1)");
    RealFft fft(m);
    std::vector<Complex> spectrum(static_cast<std::size_t>(fft.half_size()));
    fft.forward(values.values, spectrum);
    std::vector<Complex> half(static_cast<std::size_t>(n_modes) + 1);
    const double scale = 1.0 / m;
    for (int k = 0; k <= n_modes; ++k) half[k] = spectrum[k] * ((k % 2 == 0) ? scale : -scale);
    return SpectralField::from_half(values.domain_scale, std::move(half));
}

/// Truncation P_{N'} (N' <= N).
inline SpectralField project(const SpectralField& field, int n_modes) {
    if (n_modes > field.n_modes())
        throw BandwidthError("project: cannot project " + std::to_string(field.n_modes()) +
                             " modes onto " + std::to_string(n_modes) + " (use embed)");
    if (n_modes < 0) throw BandwidthError("project: negative bandwidth");
    const auto half = field.half();
    return SpectralField::from_half(field.domain_scale(),
                                    std::vector<Complex>(half.begin(), half.begin() + n_modes + 1));
}

/// Zero extension to a larger bandwidth.
inline SpectralField embed(const SpectralField& field, int n_modes) {
    if (n_modes < field.n_modes())
        throw BandwidthError("embed: target bandwidth smaller than field (use project)");
    std::vector<Complex> half(static_cast<std::size_t>(n_modes) + 1);
    std::copy(field.half().begin(), field.half().end(), half.begin());
    return SpectralField::from_half(field.domain_scale(), std::move(half));
}

/// project or embed, whichever applies.
inline SpectralField resize(const SpectralField& field, int n_modes) {
    return n_modes <= field.n_modes() ? project(field, n_modes) : embed(field, n_modes);
}

/// One factor a^exponent of a pointwise product.
struct ProductFactor {
    const SpectralField* field;
    int exponent;
};

/**
 * P_{n_out} of the pointwise product of the given factors, free of aliasing.
 *
 * The product has bandwidth B = sum(exponent * N_i); evaluating it on
 * M > B + n_out points keeps every alias image out of |k| <= n_out, so the
 * retained coefficients equal the Galerkin ones up to rounding.
 */
inline SpectralField dealiased_product(std::span<const ProductFactor> factors, int n_out) {
    if (factors.empty()) throw ArgumentError("dealiased_product: no factors");
    const double domain = factors.front().field->domain_scale();
    int bandwidth = 0;
    for (const auto& f : factors) {
        if (f.exponent < 1) throw ArgumentError("dealiased_product: exponents must be >= 1");
        if (f.field->domain_scale() != domain)
            throw ShapeError("dealiased_product: factors on different domains");
        bandwidth += f.exponent * f.field->n_modes();
    }
    const int m = next_smooth(std::max(bandwidth + n_out + 1, 2 * n_out + 1));

    std::vector<double> product(static_cast<std::size_t>(m), 1.0);
    for (const auto& f : factors) {
        const PhysicalField v = to_physical(*f.field, m);
        for (int j = 0; j < m; ++j) product[j] *= ipow(v.values[j], f.exponent);
    }
    return to_spectral(PhysicalField{std::move(product), domain}, n_out);
}

/// P_N(u^p) computed exactly; padded grid M >= (p+1)N + 1.
inline SpectralField dealiased_power(const SpectralField& field, int p) {
    if (p < 1) throw ArgumentError("dealiased_power: p must be >= 1");
    if (p == 1) return field;
    const ProductFactor factor{&field, p};
    return dealiased_product(std::span(&factor, 1), field.n_modes());
}

/// Multiplies mode k by multiplier(k) for k >= 0. The multiplier must satisfy
/// m(-k) = conj(m(k)) and m(0) real for the result to stay a real field.
template <class Multiplier>
SpectralField apply_multiplier(const SpectralField& field, Multiplier&& multiplier) {
    SpectralField out = field;
    auto& c = SpectralFieldAccess::coeffs(out);
    for (int k = 0; k <= field.n_modes(); ++k) c[k] *= multiplier(k);
    c[0] = {c[0].real(), 0.0};
    return out;
}

/// d/dx: multiplies c_k by i k / L.
inline SpectralField derivative(const SpectralField& field) {
    return apply_multiplier(field, [&](int k) { return Complex(0.0, field.wavenumber(k)); });
}

/// u(x) -> u(x - shift): c_k -> c_k exp(-i k shift / L).
inline SpectralField translate(const SpectralField& field, double shift) {
    return apply_multiplier(field, [&](int k) { return std::polar(1.0, -field.wavenumber(k) * shift); });
}

/// Direct evaluation of d^order u / dx^order at an arbitrary point.
inline double evaluate(const SpectralField& field, double x, int order = 0) {
    const auto half = field.half();
    double sum = (order == 0) ? half[0].real() : 0.0;
    for (int k = 1; k <= field.n_modes(); ++k) {
        const double kappa = field.wavenumber(k);
        Complex factor = std::pow(Complex(0.0, kappa), order);
        sum += 2.0 * (half[k] * factor * std::polar(1.0, kappa * x)).real();
    }
    return sum;
}

inline double domain_length(const SpectralField& f) noexcept {
    return 2.0 * std::numbers::pi * f.domain_scale();
}

/// (u, v) = integral of u v over the period, by Parseval.
inline double l2_inner(const SpectralField& u, const SpectralField& v) {
    u.require_same_shape(v, "l2_inner");
    const auto a = u.half();
    const auto b = v.half();
    double sum = a[0].real() * b[0].real();
    double tail = 0.0;
    for (int k = 1; k <= u.n_modes(); ++k) tail += (a[k] * std::conj(b[k])).real();
    return domain_length(u) * (sum + 2.0 * tail);
}

inline double l2_norm(const SpectralField& u) { return std::sqrt(std::max(0.0, l2_inner(u, u))); }

/// (sum_k (1 + kappa_k^2)^mu |c_k|^2 * 2 L pi)^{1/2}
inline double sobolev_norm(const SpectralField& u, double mu) {
    if (!(mu >= 0.0)) throw ArgumentError("sobolev_norm: mu must be >= 0");
    const auto c = u.half();
    double sum = std::norm(c[0]);
    for (int k = 1; k <= u.n_modes(); ++k) {
        const double kappa = u.wavenumber(k);
        sum += 2.0 * std::pow(1.0 + kappa * kappa, mu) * std::norm(c[k]);
    }
    return std::sqrt(domain_length(u) * sum);
}

/// Max |u| over oversample * (2N+1) collocation points. Approximate: the
/// true supremum can sit between grid points.
inline double linf_norm(const SpectralField& u, int oversample = 8) {
    if (oversample < 1) throw ArgumentError("linf_norm: oversample must be >= 1");
    const PhysicalField v = to_physical(u, oversample * (2 * u.n_modes() + 1));
    double m = 0.0;
    for (double x : v.values) m = std::max(m, std::abs(x));
    return m;
}

/**
 * Location of the extremum of largest magnitude, in [-L pi, L pi).
 *
 * Coarse search on an oversampled grid, a parabola through the three best
 * samples, then Newton on u'(x) = 0 with exact trigonometric evaluation.
 */
inline double locate_peak(const SpectralField& u, int oversample = 8) {
    const int m = oversample * (2 * u.n_modes() + 1);
    const PhysicalField v = to_physical(u, m);
    int best = 0;
    for (int j = 1; j < m; ++j)
        if (std::abs(v.values[j]) > std::abs(v.values[best])) best = j;
    const double h = 2.0 * std::numbers::pi * u.domain_scale() / m;
    const double left = v.values[(best + m - 1) % m];
    const double mid = v.values[best];
    const double right = v.values[(best + 1) % m];
    const double curvature = left - 2.0 * mid + right;
    double x = grid_point(best, m, u.domain_scale());
    if (curvature != 0.0) x += h * 0.5 * (left - right) / curvature;

    for (int it = 0; it < 30; ++it) {
        const double d1 = evaluate(u, x, 1);
        const double d2 = evaluate(u, x, 2);
        if (d2 == 0.0) break;
        const double dx = d1 / d2;
        if (std::abs(dx) > h) break;
        x -= dx;
        if (std::abs(dx) <= 1e-15 * u.domain_scale()) break;
    }
    const double period = 2.0 * std::numbers::pi * u.domain_scale();
    x = std::fmod(x + std::numbers::pi * u.domain_scale(), period);
    if (x < 0.0) x += period;
    return x - std::numbers::pi * u.domain_scale();
}

/// Largest |c_k - d_k| over the union of the two bandwidths.
inline double max_coefficient_difference(const SpectralField& a, const SpectralField& b) {
    const int n = std::max(a.n_modes(), b.n_modes());
    double m = 0.0;
    for (int k = 0; k <= n; ++k) m = std::max(m, std::abs(a[k] - b[k]));
    return m;
}

/// P_N of the trigonometric interpolant of fn sampled on M points.
template <class Fn>
SpectralField sample(Fn&& fn, int n_modes, double domain_scale, int n_points) {
    PhysicalField v{std::vector<double>(static_cast<std::size_t>(n_points)), domain_scale};
    for (int j = 0; j < n_points; ++j) v.values[j] = fn(grid_point(j, n_points, domain_scale));
    return to_spectral(v, n_modes);
}

}  // namespace benj

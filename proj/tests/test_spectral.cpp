#include "oracle.hpp"

#include <benj/errors.hpp>
#include <benj/fft.hpp>
#include <benj/spectral.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using benj::Complex;
using benj::SpectralField;
using std::numbers::pi;

namespace {

SpectralField cos_mode(int mode, int n_modes, double L = 1.0) {
    SpectralField f(n_modes, L);
    f.set(mode, 0.5);
    return f;
}

}  // namespace

TEST(Fft, SmoothSizes) {
    EXPECT_TRUE(benj::is_smooth(1));
    EXPECT_TRUE(benj::is_smooth(210));
    EXPECT_FALSE(benj::is_smooth(11));
    EXPECT_EQ(benj::next_smooth(11), 12);
    EXPECT_EQ(benj::next_smooth(97), 98);
    for (int n = 1; n < 500; ++n) {
        const int s = benj::next_smooth(n);
        EXPECT_GE(s, n);
        EXPECT_TRUE(benj::is_smooth(s));
        for (int k = n; k < s; ++k) EXPECT_FALSE(benj::is_smooth(k));
    }
}

TEST(Field, HermitianStorage) {
    SpectralField f(4, 1.0);
    f.set(2, Complex(1.0, 2.0));
    f.set(0, Complex(3.0, 5.0));
    EXPECT_EQ(f[-2], Complex(1.0, -2.0));
    EXPECT_EQ(f[0], Complex(3.0, 0.0));
    EXPECT_EQ(f[5], Complex(0.0));
    EXPECT_THROW(f.set(5, 1.0), benj::BandwidthError);
    f.set(-3, Complex(0.0, 1.0));
    EXPECT_EQ(f[3], Complex(0.0, -1.0));
}

TEST(Field, FromFullKeepsHermitianPart) {
    std::vector<Complex> full{{1, 1}, {2, 0}, {3, 3}};
    const SpectralField f = SpectralField::from_full(1.0, full);
    EXPECT_EQ(f.n_modes(), 1);
    EXPECT_EQ(f[0], Complex(2.0, 0.0));
    EXPECT_EQ(f[1], Complex(2.0, 1.0));
}

TEST(Transform, ConstantField) {
    SpectralField f(3, 1.0);
    f.set(0, 2.0);
    for (double v : benj::to_physical(f, 8).values) EXPECT_NEAR(v, 2.0, 1e-15);
}

TEST(Transform, CosineOnFourPoints) {
    const auto phys = benj::to_physical(cos_mode(1, 1), 4);
    const double expected[] = {-1.0, 0.0, 1.0, 0.0};
    for (int j = 0; j < 4; ++j) EXPECT_NEAR(phys.values[j], expected[j], 1e-15);
    EXPECT_DOUBLE_EQ(benj::grid_point(1, 4, 1.0), -pi / 2);
}

TEST(Transform, RoundTripAtMinimalGrid) {
    std::mt19937_64 rng(1);
    for (int n : {1, 2, 7, 16, 33}) {
        for (double L : {1.0, 3.5}) {
            const SpectralField u = oracle::random_field(n, L, rng);
            const SpectralField back = benj::to_spectral(benj::to_physical(u, 2 * n + 1), n);
            EXPECT_LE(benj::max_coefficient_difference(u, back), 1e-14);
        }
    }
}

TEST(Transform, AnalysisOfSamples) {
    benj::PhysicalField c{std::vector<double>(9, 1.25), 1.0};
    const SpectralField f = benj::to_spectral(c, 4);
    EXPECT_NEAR(f[0].real(), 1.25, 1e-15);
    for (int k = 1; k <= 4; ++k) EXPECT_LT(std::abs(f[k]), 1e-15);

    benj::PhysicalField s{std::vector<double>(7), 1.0};
    for (int j = 0; j < 7; ++j) s.values[j] = std::sin(2.0 * benj::grid_point(j, 7, 1.0));
    const SpectralField g = benj::to_spectral(s, 3);
    EXPECT_NEAR(std::abs(g[2] - Complex(0.0, -0.5)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(g[-2] - Complex(0.0, 0.5)), 0.0, 1e-15);
    EXPECT_LT(std::abs(g[1]) + std::abs(g[3]) + std::abs(g[0]), 1e-15);
}

TEST(Transform, AliasingIdentity) {
    // cos((N+1) x) on M = 2N+1 points is indistinguishable from cos(N x):
    // mode N+1 folds onto N+1-M = -N.
    const int n = 5, M = 2 * n + 1;
    benj::PhysicalField s{std::vector<double>(M), 1.0};
    for (int j = 0; j < M; ++j) s.values[j] = std::cos((n + 1) * benj::grid_point(j, M, 1.0));
    const SpectralField g = benj::to_spectral(s, n);
    // the grid starts at -pi, so the fold also carries the phase (-1)^M = -1
    EXPECT_NEAR(std::abs(g[n] - Complex(-0.5)), 0.0, 1e-14);
    for (int k = 0; k < n; ++k) EXPECT_LT(std::abs(g[k]), 1e-14);
}

TEST(Transform, TooFewPointsRejected) {
    EXPECT_THROW(benj::to_physical(SpectralField(4, 1.0), 8), benj::BandwidthError);
    EXPECT_THROW(benj::to_spectral(benj::PhysicalField{std::vector<double>(8), 1.0}, 4), benj::BandwidthError);
}

TEST(Projection, Examples) {
    std::mt19937_64 rng(2);
    const SpectralField u = oracle::random_field(12, 1.0, rng);
    EXPECT_EQ(benj::project(u, 12), u);
    SpectralField top(6, 1.0);
    top.set(6, Complex(1.0, 1.0));
    EXPECT_EQ(benj::l2_norm(benj::project(top, 5)), 0.0);
    EXPECT_THROW(benj::project(u, 13), benj::BandwidthError);
    for (int n = 0; n <= 12; ++n) {
        const SpectralField diff = u - benj::embed(benj::project(u, n), 12);
        EXPECT_LE(benj::l2_norm(diff), benj::l2_norm(u));
    }
}

TEST(Projection, AnalyticFunctionConvergesSuperalgebraically) {
    // v = 1 / (2 - cos x), reference at bandwidth 256
    const SpectralField v = benj::sample([](double x) { return 1.0 / (2.0 - std::cos(x)); }, 256, 1.0, 1024);
    std::vector<double> err;
    for (int n : {8, 16, 32, 64}) err.push_back(benj::l2_norm(v - benj::embed(benj::project(v, n), 256)));
    for (std::size_t i = 1; i < err.size(); ++i) EXPECT_LT(err[i], err[i - 1]);
    const double r1 = err[1] / err[0], r2 = err[2] / err[1];
    EXPECT_LT(r1, 1e-3);
    EXPECT_LT(r2, r1);
}

TEST(Power, Examples) {
    std::mt19937_64 rng(3);
    const SpectralField u = oracle::random_field(9, 1.0, rng);
    EXPECT_LE(benj::max_coefficient_difference(benj::dealiased_power(u, 1), u), 1e-15);

    const SpectralField sq = benj::dealiased_power(cos_mode(1, 4), 2);
    EXPECT_NEAR(sq[0].real(), 0.5, 1e-15);
    EXPECT_NEAR(std::abs(sq[2] - Complex(0.25)), 0.0, 1e-15);
    EXPECT_LT(std::abs(sq[1]) + std::abs(sq[3]) + std::abs(sq[4]), 1e-15);
}

TEST(Power, CosineCubedAgainstConvolution) {
    for (int n : {1, 4, 16, 64}) {
        const SpectralField u = cos_mode(n, n);
        const oracle::Series ref = oracle::power(oracle::from_field(u), 3);
        const SpectralField got = benj::dealiased_power(u, 3);
        for (int k = -n; k <= n; ++k) EXPECT_LE(std::abs(got[k] - ref.at(k)), 1e-13) << n << ' ' << k;
    }
}

TEST(Power, RandomFieldsAgainstConvolution) {
    std::mt19937_64 rng(4);
    double worst = 0.0;
    for (int n = 1; n <= 16; ++n) {
        for (int p = 1; p <= 4; ++p) {
            for (int trial = 0; trial < 5; ++trial) {
                const double L = trial % 2 ? 2.0 : 1.0;
                const SpectralField u = oracle::random_field(n, L, rng);
                const oracle::Series ref = oracle::power(oracle::from_field(u), p);
                const SpectralField got = benj::dealiased_power(u, p);
                for (int k = -n; k <= n; ++k) worst = std::max(worst, std::abs(got[k] - ref.at(k)));
            }
        }
    }
    EXPECT_LE(worst, 1e-12);
}

TEST(Product, MixedBandwidthsAgainstConvolution) {
    std::mt19937_64 rng(5);
    const SpectralField a = oracle::random_field(10, 1.0, rng);
    const SpectralField b = oracle::random_field(4, 1.0, rng);
    const std::array<benj::ProductFactor, 2> factors{{{&a, 2}, {&b, 1}}};
    const SpectralField got = benj::dealiased_product(factors, 6);
    const oracle::Series ref = oracle::convolve(oracle::power(oracle::from_field(a), 2), oracle::from_field(b));
    for (int k = -6; k <= 6; ++k) EXPECT_LE(std::abs(got[k] - ref.at(k)), 1e-13);
}

TEST(Norms, Examples) {
    SpectralField s(3, 1.0);
    s.set(1, Complex(0.0, -0.5));  // sin x
    EXPECT_NEAR(benj::l2_norm(s), std::sqrt(pi), 1e-15);
    SpectralField one(3, 1.0);
    one.set(0, 1.0);
    for (double mu : {0.0, 1.5, 4.0}) EXPECT_NEAR(benj::sobolev_norm(one, mu), std::sqrt(2 * pi), 1e-15);
    EXPECT_NEAR(benj::linf_norm(cos_mode(1, 3), 8), 1.0, 1e-3);
}

TEST(Norms, ParsevalMatchesQuadrature) {
    std::mt19937_64 rng(6);
    for (int n : {3, 8, 16}) {
        for (double L : {1.0, 2.5}) {
            const SpectralField u = oracle::random_field(n, L, rng);
            const double quad = oracle::periodic_quadrature(
                [&](double x) {
                    const double v = oracle::value(u, x);
                    return v * v;
                },
                L, 4 * n + 1);
            const double norm2 = benj::l2_norm(u) * benj::l2_norm(u);
            EXPECT_LE(std::abs(norm2 - quad), 1e-12 * quad);
        }
    }
}

TEST(Norms, InverseInequality) {
    std::mt19937_64 rng(7);
    for (int n : {4, 16, 64}) {
        for (double L : {1.0, 4.0}) {
            const SpectralField psi = oracle::random_field(n, L, rng);
            const double kappa_max = std::max(1.0, n / L);
            EXPECT_LE(benj::sobolev_norm(psi, 1.0), 2.0 * kappa_max * benj::sobolev_norm(psi, 0.0));
        }
    }
}

TEST(Evaluation, PointValuesAndDerivative) {
    std::mt19937_64 rng(8);
    const SpectralField u = oracle::random_field(9, 1.5, rng);
    const SpectralField ux = benj::derivative(u);
    for (double x : {-4.0, -1.0, 0.3, 2.2}) {
        EXPECT_NEAR(benj::evaluate(u, x), oracle::value(u, x), 1e-13);
        EXPECT_NEAR(benj::evaluate(u, x, 1), oracle::value(ux, x), 1e-12);
    }
}

TEST(Evaluation, TranslationShiftsValues) {
    std::mt19937_64 rng(9);
    const SpectralField u = oracle::random_field(9, 1.0, rng);
    const SpectralField v = benj::translate(u, 0.7);
    for (double x : {-2.0, 0.0, 1.0}) EXPECT_NEAR(benj::evaluate(v, x), benj::evaluate(u, x - 0.7), 1e-13);
}

TEST(Evaluation, PeakLocation) {
    SpectralField u(8, 2.0);
    u.set(0, 1.0);
    u.set(1, 0.5);  // 1 + cos(x / 2), single peak at 0
    for (double shift : {0.0, 1.234, -3.0}) EXPECT_NEAR(benj::locate_peak(benj::translate(u, shift)), shift, 1e-12);
}

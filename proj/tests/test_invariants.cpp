#include "oracle.hpp"

#include <benj/invariants.hpp>
#include <benj/initdata.hpp>
#include <benj/model.hpp>
#include <benj/timestep.hpp>

#include <gtest/gtest.h>

#include <numbers>
#include <random>

using benj::Complex;
using benj::ModelParams;
using benj::SpectralField;
using std::numbers::pi;

namespace {

// E by quadrature: L applied mode by mode, then the trapezoid rule on a grid
// fine enough to integrate u^{q+2} exactly.
double energy_by_quadrature(const SpectralField& u, const ModelParams& p) {
    const SpectralField Lu =
        benj::apply_multiplier(u, [&](int k) { return Complex(benj::symbol_l(p, u.wavenumber(k))); });
    const int M = (p.q() + 2) * u.n_modes() + 1;
    return oracle::periodic_quadrature(
        [&](double x) {
            const double v = oracle::value(u, x);
            return v * oracle::value(Lu, x) - 2.0 * benj::nonlinear_F(p, v);
        },
        u.domain_scale(), M);
}

}  // namespace

TEST(Mass, Examples) {
    SpectralField u(4, 1.0);
    u.set(0, 1.0);
    u.set(1, 0.5);
    EXPECT_NEAR(benj::c_pi(u), 2 * pi, 1e-14);
    SpectralField s(4, 1.0);
    s.set(3, Complex(0.0, -0.5));
    EXPECT_EQ(benj::c_pi(s), 0.0);
    EXPECT_EQ(benj::c_pi(SpectralField(4, 1.0)), 0.0);
}

TEST(Momentum, Examples) {
    SpectralField s(4, 1.0);
    s.set(1, Complex(0.0, -0.5));
    EXPECT_NEAR(benj::i_pi(s), pi, 1e-14);
    SpectralField c(4, 2.5);
    c.set(0, 0.8);
    EXPECT_NEAR(benj::i_pi(c), 2 * 2.5 * pi * 0.64, 1e-14);
}

TEST(Momentum, QuadratureOracleAndIdentity) {
    std::mt19937_64 rng(30);
    for (double L : {1.0, 3.0}) {
        const SpectralField u = oracle::random_field(20, L, rng);
        const double quad = oracle::periodic_quadrature(
            [&](double x) {
                const double v = oracle::value(u, x);
                return v * v;
            },
            L, 81);
        EXPECT_LE(std::abs(benj::i_pi(u) - quad), 1e-12 * quad);
        EXPECT_EQ(benj::i_pi(u), benj::l2_inner(u, u));
    }
}

TEST(Energy, Examples) {
    SpectralField u(4, 1.0);
    u.set(1, 0.5);
    EXPECT_NEAR(benj::e_pi(u, ModelParams::gkdv(1.0)), pi, 1e-14);
    EXPECT_EQ(benj::e_pi(SpectralField(4, 1.0), ModelParams::benjamin(1.0, 1.0)), 0.0);
}

TEST(Energy, QuadratureOracle) {
    std::mt19937_64 rng(31);
    for (int q = 1; q <= 3; ++q) {
        for (double L : {1.0, 2.0}) {
            const ModelParams p = ModelParams::benjamin(1.0, 0.7, q, L);
            const SpectralField u = oracle::random_field(16, L, rng);
            const double quad = energy_by_quadrature(u, p);
            EXPECT_LE(std::abs(benj::e_pi(u, p) - quad), 1e-10 * std::abs(quad)) << q << ' ' << L;
        }
    }
}

TEST(Energy, TranslationInvariant) {
    std::mt19937_64 rng(32);
    const ModelParams p = ModelParams::benjamin(1.0, 1.0, 2);
    const SpectralField u = oracle::random_field(24, 1.0, rng);
    const double e = benj::e_pi(u, p);
    for (double s : {0.1, 1.0, 2.7}) EXPECT_LE(std::abs(benj::e_pi(benj::translate(u, s), p) - e), 1e-12 * std::abs(e));
}

TEST(Record, SingleSnapshotHasNoDrift) {
    const ModelParams p = ModelParams::benjamin(1.0, 1.0);
    std::vector<benj::Snapshot> snaps{{0.0, benj::gaussian(1.0, 0.5, 0.0, 16, 1.0)}};
    const benj::InvariantRecord r = benj::record_invariants(snaps, p);
    EXPECT_EQ(r.rel_drift_C, 0.0);
    EXPECT_EQ(r.rel_drift_I, 0.0);
    EXPECT_EQ(r.rel_drift_E, 0.0);
    EXPECT_THROW(benj::record_invariants(std::vector<benj::Snapshot>{}, p), benj::ArgumentError);
}

TEST(Record, DriftFloorHandlesZeroSeries) {
    const std::vector<double> zeros{0.0, 0.0, 0.0};
    EXPECT_EQ(benj::relative_drift(zeros), 0.0);
    const std::vector<double> series{2.0, 2.5, 1.0};
    EXPECT_DOUBLE_EQ(benj::relative_drift(series), 0.5);
}

TEST(Record, LinearFlowConservesMomentum) {
    const ModelParams p = ModelParams::benjamin(1.0, 1.0);
    const SpectralField u0 = benj::gaussian(1.0, 0.5, 0.0, 64, 1.0);
    const benj::Stepper stepper(benj::linear_multipliers(p, 64), benj::Method::etdrk4, 1e-2, benj::no_nonlinearity());
    std::vector<benj::Snapshot> snaps{{0.0, u0}};
    benj::integrate(stepper, u0, 1.0, 1, [&](long, double t, const SpectralField& u) { snaps.push_back({t, u}); });
    EXPECT_LE(benj::record_invariants(snaps, p).rel_drift_I, 1e-13);
}

TEST(Record, DriftIsFourthOrderInTime) {
    const ModelParams p = ModelParams::benjamin(1.0, 1.0);
    const SpectralField u0 = benj::gaussian(1.0, 0.5, 0.0, 32, 1.0);
    std::vector<double> dI, dE, dC;
    for (double dt : {2e-3, 1e-3, 5e-4}) {
        const auto run = benj::evolve(u0, p, benj::IntegratorConfig{benj::Method::etdrk4, dt, 0.5, 1});
        const auto rec = benj::record_invariants(run.snapshots, p);
        dC.push_back(rec.rel_drift_C);
        dI.push_back(rec.rel_drift_I);
        dE.push_back(rec.rel_drift_E);
    }
    for (std::size_t i = 0; i < dC.size(); ++i) EXPECT_LE(dC[i], 1e-14);
    for (std::size_t i = 1; i < dI.size(); ++i) {
        EXPECT_GE(dI[i - 1] / dI[i], 8.0);
        EXPECT_LE(dI[i - 1] / dI[i], 24.0);
        EXPECT_GE(dE[i - 1] / dE[i], 8.0);
        EXPECT_LE(dE[i - 1] / dE[i], 24.0);
    }
}

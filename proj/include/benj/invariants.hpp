#pragma once

#include <benj/errors.hpp>
#include <benj/model.hpp>
#include <benj/spectral.hpp>
#include <benj/timestep.hpp>

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

namespace benj {

/// Mass: integral of u over the period.
inline double c_pi(const SpectralField& u) { return domain_length(u) * u[0].real(); }

/// Integral of u^2 over the period.
inline double i_pi(const SpectralField& u) { return l2_inner(u, u); }

/**
 * Energy: integral of (u L u - 2 F(u)). The quadratic part is Parseval-exact;
 * the integral of F(u) = u^{q+2} / ((q+1)(q+2)) comes from the zero mode of
 * the dealiased power, so no quadrature error enters.
 */
inline double e_pi(const SpectralField& u, const ModelParams& params) {
    detail::require_domain(params, u, "e_pi");
    const auto c = u.half();
    double quadratic = symbol_l(params, 0.0) * std::norm(c[0]);
    for (int k = 1; k <= u.n_modes(); ++k) quadratic += 2.0 * symbol_l(params, u.wavenumber(k)) * std::norm(c[k]);
    const double q = params.q();
    const double mean_power = dealiased_power(u, params.q() + 2)[0].real();
    const double integral_F = domain_length(u) * mean_power / ((q + 1.0) * (q + 2.0));
    return domain_length(u) * quadratic - 2.0 * integral_F;
}

struct InvariantRecord {
    std::vector<double> times;
    std::vector<double> C;
    std::vector<double> I;
    std::vector<double> E;
    double rel_drift_C = 0.0;
    double rel_drift_I = 0.0;
    double rel_drift_E = 0.0;
};

inline constexpr double kDriftFloor = 1e-30;

/// max_t |X(t) - X(0)| / max(|X(0)|, floor)
inline double relative_drift(std::span<const double> series, double floor = kDriftFloor) {
    if (series.empty()) return 0.0;
    double worst = 0.0;
    for (double x : series) worst = std::max(worst, std::abs(x - series.front()));
    return worst / std::max(std::abs(series.front()), floor);
}

inline InvariantRecord record_invariants(std::span<const Snapshot> snapshots, const ModelParams& params) {
    if (snapshots.empty()) throw ArgumentError("record_invariants: no snapshots");
    InvariantRecord rec;
    for (const auto& s : snapshots) {
        rec.times.push_back(s.t);
        rec.C.push_back(c_pi(s.field));
        rec.I.push_back(i_pi(s.field));
        rec.E.push_back(e_pi(s.field, params));
    }
    rec.rel_drift_C = relative_drift(rec.C);
    rec.rel_drift_I = relative_drift(rec.I);
    rec.rel_drift_E = relative_drift(rec.E);
    return rec;
}

}  // namespace benj

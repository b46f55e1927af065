#pragma once

#include <fftw3.h>

#include <complex>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

namespace benj {

/// True if n has no prime factor other than 2, 3, 5, 7.
inline bool is_smooth(int n) noexcept {
    if (n < 1) return false;
    for (int p : {2, 3, 5, 7})
        while (n % p == 0) n /= p;
    return n == 1;
}

/// Smallest 7-smooth integer >= n.
inline int next_smooth(int n) noexcept {
    if (n < 1) return 1;
    while (!is_smooth(n)) ++n;
    return n;
}

namespace detail {

struct RealPlans {
    fftw_plan forward = nullptr;   // r2c
    fftw_plan backward = nullptr;  // c2r

    RealPlans() = default;
    RealPlans(const RealPlans&) = delete;
    RealPlans& operator=(const RealPlans&) = delete;
    ~RealPlans() {
        if (forward) fftw_destroy_plan(forward);
        if (backward) fftw_destroy_plan(backward);
    }
};

// FFTW's planner is not reentrant; execution with fftw_execute_dft_* on
// caller-owned arrays is. Plans are created once under the lock and then
// shared read-only. FFTW_ESTIMATE keeps plan selection (and so the floating
// point results) independent of timing.
class PlanCache {
public:
    static PlanCache& instance() {
        static PlanCache cache;
        return cache;
    }

    const RealPlans& get(int n) {
        std::lock_guard lock(mutex_);
        auto it = plans_.find(n);
        if (it != plans_.end()) return *it->second;
        auto plans = std::make_unique<RealPlans>();
        std::vector<double> real(static_cast<std::size_t>(n));
        std::vector<fftw_complex> half(static_cast<std::size_t>(n / 2 + 1));
        const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
        plans->forward = fftw_plan_dft_r2c_1d(n, real.data(), half.data(), flags);
        plans->backward = fftw_plan_dft_c2r_1d(n, half.data(), real.data(), flags);
        return *plans_.emplace(n, std::move(plans)).first->second;
    }

private:
    PlanCache() = default;
    std::mutex mutex_;
    std::map<int, std::unique_ptr<RealPlans>> plans_;
};

inline fftw_complex* as_fftw(std::complex<double>* p) noexcept {
    return reinterpret_cast<fftw_complex*>(p);
}

}  // namespace detail

/**
 * Unnormalized real transforms of length n.
 *
 * forward:  X_k = sum_j x_j exp(-2 pi i j k / n),   k = 0..n/2
 * backward: x_j = sum_k X_k exp(+2 pi i j k / n),   with Hermitian extension
 */
class RealFft {
public:
    explicit RealFft(int n) : n_(n), plans_(&detail::PlanCache::instance().get(n)) {}

    int size() const noexcept { return n_; }
    int half_size() const noexcept { return n_ / 2 + 1; }

    void forward(std::span<const double> in, std::span<std::complex<double>> out) const {
        std::vector<double> scratch(in.begin(), in.end());
        fftw_execute_dft_r2c(plans_->forward, scratch.data(), detail::as_fftw(out.data()));
    }

    // c2r overwrites its input, so the spectrum is copied first.
    void backward(std::span<const std::complex<double>> in, std::span<double> out) const {
        std::vector<std::complex<double>> scratch(in.begin(), in.end());
        fftw_execute_dft_c2r(plans_->backward, detail::as_fftw(scratch.data()), out.data());
    }

private:
    int n_;
    const detail::RealPlans* plans_;
};

}  // namespace benj

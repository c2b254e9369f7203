/*
   Copyright 2026 The bhreduce Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

// Truncated power series and the arithmetic the exact engine needs:
// products truncated at order K (direct or FFT-backed) and composition of a
// finite-support pgf with a series.

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "errors.hpp"
#include "models.hpp"

namespace bhr {

/// Coefficients c_0..c_K of a probability generating function, with the
/// unretained mass tracked explicitly.
struct TruncatedSeries {
    std::vector<double> coeffs;
    double tail_mass = 0.0; ///< 1 - sum c_k, computed without cancellation

    int order() const noexcept { return static_cast<int>(coeffs.size()) - 1; }

    double operator[](int k) const
    {
        if (k < 0 || k > order())
            throw TruncationError("coefficient " + std::to_string(k) + " beyond truncation order "
                                  + std::to_string(order()));
        return coeffs[static_cast<std::size_t>(k)];
    }

    /// Truncated polynomial at s.
    double evaluate(double s) const noexcept
    {
        double acc = 0.0;
        for (std::size_t k = coeffs.size(); k-- > 0;)
            acc = acc * s + coeffs[k];
        return acc;
    }

    /// Upper bound on |F(s) - evaluate(s)| for s in [0, 1].
    double truncation_bound(double s) const noexcept
    {
        return std::max(tail_mass, 0.0) * std::pow(s, order() + 1);
    }
};

/// k-th derivative of the truncated polynomial at w.
inline double derivative_at(const TruncatedSeries& series, int k, double w)
{
    if (k < 0 || k > series.order())
        throw TruncationError("derivative order " + std::to_string(k)
                              + " exceeds truncation order " + std::to_string(series.order()));
    const auto& c = series.coeffs;
    double acc = 0.0;
    for (int m = series.order(); m >= k; --m) {
        double falling = 1.0;
        for (int r = 0; r < k; ++r)
            falling *= static_cast<double>(m - r);
        acc = acc * w + c[static_cast<std::size_t>(m)] * falling;
    }
    return acc;
}

namespace detail {

// Cached real-to-complex FFT plans of one transform length.
class FftPlan {
public:
    explicit FftPlan(std::size_t n) : n_(n)
    {
        real_ = static_cast<double*>(fftw_malloc(sizeof(double) * n));
        spec_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (n / 2 + 1)));
        std::lock_guard lock(planner_mutex());
        forward_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), real_, spec_, FFTW_ESTIMATE);
        backward_ = fftw_plan_dft_c2r_1d(static_cast<int>(n), spec_, real_, FFTW_ESTIMATE);
    }
    FftPlan(const FftPlan&) = delete;
    FftPlan& operator=(const FftPlan&) = delete;
    ~FftPlan()
    {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(forward_);
        fftw_destroy_plan(backward_);
        fftw_free(real_);
        fftw_free(spec_);
    }

    std::size_t size() const noexcept { return n_; }

    void forward(std::span<const double> x, std::vector<std::complex<double>>& out)
    {
        std::fill(real_, real_ + n_, 0.0);
        std::copy(x.begin(), x.end(), real_);
        fftw_execute(forward_);
        out.resize(n_ / 2 + 1);
        for (std::size_t i = 0; i <= n_ / 2; ++i)
            out[i] = {spec_[i][0], spec_[i][1]};
    }

    // Inverse of the pointwise product; writes the first out.size() terms.
    void backward_product(const std::vector<std::complex<double>>& a,
                          const std::vector<std::complex<double>>& b, std::span<double> out)
    {
        for (std::size_t i = 0; i <= n_ / 2; ++i) {
            const auto p = a[i] * b[i];
            spec_[i][0] = p.real();
            spec_[i][1] = p.imag();
        }
        fftw_execute(backward_);
        const double scale = 1.0 / static_cast<double>(n_);
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] = real_[i] * scale;
    }

private:
    static std::mutex& planner_mutex()
    {
        static std::mutex m;
        return m;
    }

    std::size_t n_;
    double* real_ = nullptr;
    fftw_complex* spec_ = nullptr;
    fftw_plan forward_ = nullptr;
    fftw_plan backward_ = nullptr;
};

inline constexpr std::size_t kDirectProductLimit = 96;

} // namespace detail

/// Products of series with zero constant term, truncated at a fixed order.
/// Direct convolution for short inputs, FFT otherwise. Not thread-safe; use
/// one instance per thread.
class SeriesMultiplier {
public:
    explicit SeriesMultiplier(int order) : order_(order)
    {
        if (order < 0)
            throw DomainError("truncation order must be nonnegative");
    }

    int order() const noexcept { return order_; }

    /// Fixes the left factor `g` (g[0] is ignored) for repeated products.
    void set_left(std::span<const double> g)
    {
        left_.assign(g.begin(), g.end());
        if (!left_.empty())
            left_[0] = 0.0;
        left_len_ = effective_length(left_);
        left_hat_valid_ = false;
    }

    /// out = (left * r) truncated at order, where r[0] is ignored (so out
    /// has zero coefficients of order < 2).
    void multiply_left(std::span<const double> r, std::vector<double>& out)
    {
        const std::size_t K1 = static_cast<std::size_t>(order_) + 1;
        out.assign(K1, 0.0);
        const std::size_t rlen = effective_length(r);
        if (left_len_ < 2 || rlen < 2)
            return;
        const std::size_t full = std::min(K1, left_len_ + rlen - 1);
        if (std::min(left_len_, rlen) <= detail::kDirectProductLimit) {
            for (std::size_t i = 1; i < left_len_; ++i) {
                const double gi = left_[i];
                if (gi == 0.0)
                    continue;
                const std::size_t jmax = std::min(rlen, full - i);
                for (std::size_t j = 1; j < jmax; ++j)
                    out[i + j] += gi * r[j];
            }
            return;
        }
        auto& plan = plan_for(full);
        if (!left_hat_valid_ || left_plan_size_ != plan.size()) {
            plan.forward(std::span<const double>(left_.data(), left_len_), left_hat_);
            left_hat_valid_ = true;
            left_plan_size_ = plan.size();
        }
        scratch_.assign(r.begin(), r.begin() + static_cast<std::ptrdiff_t>(rlen));
        scratch_[0] = 0.0;
        plan.forward(scratch_, right_hat_);
        plan.backward_product(left_hat_, right_hat_,
                              std::span<double>(out.data(), full));
        out[0] = 0.0;
        out[1] = 0.0;
    }

private:
    static std::size_t effective_length(std::span<const double> x)
    {
        std::size_t n = x.size();
        while (n > 0 && x[n - 1] == 0.0)
            --n;
        return n;
    }

    detail::FftPlan& plan_for(std::size_t needed)
    {
        std::size_t n = 64;
        while (n < 2 * needed)
            n *= 2;
        for (auto& p : plans_)
            if (p->size() == n)
                return *p;
        plans_.push_back(std::make_unique<detail::FftPlan>(n));
        return *plans_.back();
    }

    int order_;
    std::vector<double> left_;
    std::size_t left_len_ = 0;
    std::vector<std::complex<double>> left_hat_, right_hat_;
    bool left_hat_valid_ = false;
    std::size_t left_plan_size_ = 0;
    std::vector<double> scratch_;
    std::vector<std::unique_ptr<detail::FftPlan>> plans_;
};

/// Series of f(F(s)) truncated at the multiplier's order. `one_minus_c0` is
/// 1 - F(0) carried separately so the constant term never loses precision;
/// the returned pair holds the composed coefficients and 1 - f(F(0)).
struct ComposedSeries {
    std::vector<double> coeffs;
    double one_minus_c0 = 0.0;
};

inline ComposedSeries compose(const OffspringLaw& f, std::span<const double> series,
                              double one_minus_c0, SeriesMultiplier& mul)
{
    const int K = mul.order();
    const int D = f.max_count();
    const double c0 = 1.0 - one_minus_c0;

    // Taylor coefficients of f at c0: a_j = f^{(j)}(c0) / j!.
    const int top = std::min(D, K);
    std::vector<double> taylor(static_cast<std::size_t>(top) + 1);
    double jfact = 1.0;
    for (int j = 0; j <= top; ++j) {
        if (j > 0)
            jfact *= j;
        taylor[static_cast<std::size_t>(j)] = f.derivative(j, c0) / jfact;
    }

    // Horner in G = F - c0: R <- a_j + G R.
    const std::size_t K1 = static_cast<std::size_t>(K) + 1;
    std::vector<double> g(K1, 0.0);
    for (std::size_t k = 1; k < std::min(K1, series.size()); ++k)
        g[k] = series[k];
    mul.set_left(g);

    std::vector<double> r(K1, 0.0), prod;
    r[0] = taylor[static_cast<std::size_t>(top)];
    for (int j = top - 1; j >= 0; --j) {
        mul.multiply_left(r, prod);
        const double r0 = r[0];
        for (std::size_t k = 1; k < K1; ++k)
            prod[k] += r0 * g[k];
        prod[0] = taylor[static_cast<std::size_t>(j)];
        r.swap(prod);
    }
    for (std::size_t k = 1; k < K1; ++k)
        if (r[k] < 0.0)
            r[k] = 0.0;

    ComposedSeries out;
    out.one_minus_c0 = f.one_minus_pgf(one_minus_c0);
    r[0] = 1.0 - out.one_minus_c0;
    out.coeffs = std::move(r);
    return out;
}

/// Convenience overload for a series with its constant term taken as is.
inline TruncatedSeries compose(const OffspringLaw& f, const TruncatedSeries& series)
{
    SeriesMultiplier mul(series.order());
    const double q0 = series.tail_mass
                      + detail::kahan_sum(std::span<const double>(series.coeffs).subspan(1));
    auto composed = compose(f, series.coeffs, q0, mul);
    TruncatedSeries out;
    out.tail_mass = composed.one_minus_c0
                    - detail::kahan_sum(std::span<const double>(composed.coeffs).subspan(1));
    out.coeffs = std::move(composed.coeffs);
    return out;
}

} // namespace bhr

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

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "errors.hpp"
#include "rng.hpp"

namespace bhr {

inline constexpr double kPmfTolerance = 1e-12;
inline constexpr double kCriticalityTolerance = 1e-9;

namespace detail {

inline double kahan_sum(std::span<const double> xs)
{
    double sum = 0.0, c = 0.0;
    for (double x : xs) {
        const double y = x - c;
        const double t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    return sum;
}

inline std::vector<double> cumulative(std::span<const double> pmf)
{
    std::vector<double> cdf(pmf.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < pmf.size(); ++i) {
        acc += pmf[i];
        cdf[i] = acc;
    }
    // The last atom with positive mass absorbs any round-off.
    for (std::size_t i = pmf.size(); i-- > 0;) {
        cdf[i] = 1.0;
        if (pmf[i] > 0.0)
            break;
    }
    return cdf;
}

// Inverse-cdf draw; linear scan is fastest for the short tables used here.
template <class Rng>
inline int draw_index(std::span<const double> cdf, Rng& rng) noexcept
{
    const double u = rng.uniform();
    int k = 0;
    while (u >= cdf[static_cast<std::size_t>(k)])
        ++k;
    return k;
}

inline void check_pmf_entries(std::span<const double> pmf, const char* what)
{
    if (pmf.empty())
        throw ModelError(std::string(what) + ": pmf is empty");
    for (double p : pmf) {
        if (!std::isfinite(p) || p < 0.0 || p > 1.0)
            throw ModelError(std::string(what) + ": pmf entries must lie in [0, 1]");
    }
}

// Rescales when the residual mass is within tolerance, rejects otherwise.
inline void normalize_or_throw(std::vector<double>& pmf, const char* what)
{
    const double total = kahan_sum(pmf);
    if (std::abs(total - 1.0) > kPmfTolerance)
        throw ModelError(std::string(what) + ": pmf sums to " + std::to_string(total)
                         + ", not 1");
    for (double& p : pmf)
        p /= total;
}

} // namespace detail

/// Offspring distribution {f_k} with finite support 0..max_count().
class OffspringLaw {
public:
    /// Normalized law with moments computed but no criticality check.
    static OffspringLaw unchecked(std::vector<double> pmf)
    {
        detail::check_pmf_entries(pmf, "offspring");
        detail::normalize_or_throw(pmf, "offspring");
        while (pmf.size() > 1 && pmf.back() == 0.0)
            pmf.pop_back();
        return OffspringLaw(std::move(pmf));
    }

    std::span<const double> pmf() const noexcept { return pmf_; }
    int max_count() const noexcept { return static_cast<int>(pmf_.size()) - 1; }
    double mean() const noexcept { return mean_; }
    double variance() const noexcept { return variance_; }
    /// E xi^2 log(xi + 1).
    double second_log_moment() const noexcept { return second_log_moment_; }

    /// P(xi > i) for i = 0..max_count()-1.
    std::span<const double> tail() const noexcept { return tail_; }

    /// f(s) by Horner.
    double pgf(double s) const noexcept
    {
        double acc = 0.0;
        for (std::size_t k = pmf_.size(); k-- > 0;)
            acc = acc * s + pmf_[k];
        return acc;
    }

    /// 1 - f(1 - q) = q * sum_i P(xi > i) (1 - q)^i, free of cancellation.
    double one_minus_pgf(double q) const noexcept
    {
        const double s = 1.0 - q;
        double acc = 0.0;
        for (std::size_t i = tail_.size(); i-- > 0;)
            acc = acc * s + tail_[i];
        return q * acc;
    }

    /// j-th derivative f^{(j)}(s).
    double derivative(int j, double s) const noexcept
    {
        if (j < 0 || j > max_count())
            return 0.0;
        double acc = 0.0;
        for (int m = max_count(); m >= j; --m) {
            double falling = 1.0;
            for (int r = 0; r < j; ++r)
                falling *= static_cast<double>(m - r);
            acc = acc * s + pmf_[static_cast<std::size_t>(m)] * falling;
        }
        return acc;
    }

    template <class Rng>
    int sample(Rng& rng) const noexcept
    {
        return detail::draw_index(cdf_, rng);
    }

private:
    explicit OffspringLaw(std::vector<double> pmf) : pmf_(std::move(pmf))
    {
        double m1 = 0.0, m2 = 0.0, mlog = 0.0;
        for (std::size_t k = 0; k < pmf_.size(); ++k) {
            const double kk = static_cast<double>(k);
            m1 += kk * pmf_[k];
            m2 += kk * kk * pmf_[k];
            mlog += kk * kk * std::log(kk + 1.0) * pmf_[k];
        }
        mean_ = m1;
        variance_ = m2 - m1 * m1;
        second_log_moment_ = mlog;
        tail_.assign(pmf_.size() > 1 ? pmf_.size() - 1 : 0, 0.0);
        double acc = 0.0;
        for (std::size_t i = pmf_.size(); i-- > 1;) {
            acc += pmf_[i];
            tail_[i - 1] = acc;
        }
        cdf_ = detail::cumulative(pmf_);
    }

    std::vector<double> pmf_;
    std::vector<double> tail_;
    std::vector<double> cdf_;
    double mean_ = 0.0;
    double variance_ = 0.0;
    double second_log_moment_ = 0.0;
};

/// Validated critical offspring law: mean 1 within 1e-9, positive variance.
inline OffspringLaw make_offspring(std::vector<double> pmf)
{
    auto law = OffspringLaw::unchecked(std::move(pmf));
    if (std::abs(law.mean() - 1.0) > kCriticalityTolerance)
        throw ModelError("offspring: mean " + std::to_string(law.mean())
                         + " violates criticality (E xi = 1)");
    if (!(law.variance() > kCriticalityTolerance))
        throw ModelError("offspring: zero variance (degenerate law)");
    return law;
}

enum class LifetimeKind { lattice, exponential, uniform };

struct LatticeLifetimeSpec {
    std::map<int, double> pmf; ///< lifetime -> probability
};
struct ExponentialLifetimeSpec {
    double rate = 1.0;
};
struct UniformLifetimeSpec {
    double a = 0.0;
    double b = 1.0;
};
using LifetimeSpec
    = std::variant<LatticeLifetimeSpec, ExponentialLifetimeSpec, UniformLifetimeSpec>;

/// Particle life-length distribution G.
class LifetimeLaw {
public:
    /// Lattice law from a lifetime -> mass table. Only normalization and
    /// positivity are enforced here; span and degeneracy are recorded.
    static LifetimeLaw lattice(const std::map<int, double>& masses)
    {
        if (masses.empty())
            throw ModelError("lifetime: lattice pmf is empty");
        if (masses.begin()->first < 1)
            throw ModelError("lifetime: lattice support must be positive integers");
        std::vector<double> g(static_cast<std::size_t>(masses.rbegin()->first) + 1, 0.0);
        for (auto [ell, p] : masses)
            g[static_cast<std::size_t>(ell)] = p;
        detail::check_pmf_entries(g, "lifetime");
        detail::normalize_or_throw(g, "lifetime");

        LifetimeLaw law(LifetimeKind::lattice);
        int span = 0, atoms = 0;
        double m1 = 0.0, m3 = 0.0;
        for (std::size_t ell = 1; ell < g.size(); ++ell) {
            if (g[ell] <= 0.0)
                continue;
            ++atoms;
            span = std::gcd(span, static_cast<int>(ell));
            const double l = static_cast<double>(ell);
            m1 += l * g[ell];
            m3 += l * l * l * g[ell];
        }
        while (g.size() > 2 && g.back() == 0.0)
            g.pop_back();
        law.span_ = span;
        law.atoms_ = atoms;
        law.mean_ = m1;
        law.third_moment_ = m3;
        law.survival_.assign(g.size(), 0.0);
        double acc = 0.0;
        for (std::size_t n = g.size(); n-- > 0;) {
            law.survival_[n] = acc; // P(tau > n)
            acc += g[n];
        }
        law.cdf_ = detail::cumulative(g);
        law.pmf_ = std::move(g);
        return law;
    }

    static LifetimeLaw exponential(double rate)
    {
        if (!(rate > 0.0) || !std::isfinite(rate))
            throw ModelError("lifetime: exponential rate must be positive");
        LifetimeLaw law(LifetimeKind::exponential);
        law.a_ = rate;
        law.mean_ = 1.0 / rate;
        law.third_moment_ = 6.0 / (rate * rate * rate);
        return law;
    }

    static LifetimeLaw uniform(double a, double b)
    {
        if (!(a >= 0.0) || !(b > a) || !std::isfinite(b))
            throw ModelError("lifetime: uniform(a, b) needs 0 <= a < b");
        LifetimeLaw law(LifetimeKind::uniform);
        law.a_ = a;
        law.b_ = b;
        law.mean_ = 0.5 * (a + b);
        law.third_moment_ = (b * b * b * b - a * a * a * a) / (4.0 * (b - a));
        return law;
    }

    LifetimeKind kind() const noexcept { return kind_; }
    bool is_lattice() const noexcept { return kind_ == LifetimeKind::lattice; }
    double mean() const noexcept { return mean_; }
    double third_moment() const noexcept { return third_moment_; }
    /// gcd of the lattice support; 0 for continuous laws.
    int span() const noexcept { return span_; }
    bool is_degenerate() const noexcept { return is_lattice() && atoms_ < 2; }
    double rate() const noexcept { return a_; }
    double lower() const noexcept { return a_; }
    double upper() const noexcept { return b_; }

    /// g_ell indexed by lifetime (index 0 carries no mass). Lattice only.
    std::span<const double> lattice_pmf() const noexcept { return pmf_; }
    int max_lifetime() const noexcept
    {
        return is_lattice() ? static_cast<int>(pmf_.size()) - 1 : 0;
    }

    /// 1 - G(x) = P(tau > x).
    double survival(double x) const noexcept
    {
        if (x < 0.0)
            return 1.0;
        switch (kind_) {
        case LifetimeKind::lattice: {
            const double n = std::floor(x);
            if (n >= static_cast<double>(survival_.size()))
                return 0.0;
            return survival_[static_cast<std::size_t>(n)];
        }
        case LifetimeKind::exponential:
            return std::exp(-a_ * x);
        case LifetimeKind::uniform:
            if (x <= a_)
                return 1.0;
            if (x >= b_)
                return 0.0;
            return (b_ - x) / (b_ - a_);
        }
        return 0.0;
    }

    /// G(x) = P(tau <= x).
    double cdf(double x) const noexcept { return 1.0 - survival(x); }

    template <class Rng>
    double sample(Rng& rng) const noexcept
    {
        switch (kind_) {
        case LifetimeKind::lattice:
            return static_cast<double>(detail::draw_index(cdf_, rng));
        case LifetimeKind::exponential:
            return -std::log(rng.uniform_open()) / a_;
        case LifetimeKind::uniform:
            return a_ + (b_ - a_) * rng.uniform_open();
        }
        return 1.0;
    }

private:
    explicit LifetimeLaw(LifetimeKind kind) : kind_(kind) {}

    LifetimeKind kind_;
    std::vector<double> pmf_;
    std::vector<double> cdf_;
    std::vector<double> survival_;
    double a_ = 0.0;
    double b_ = 0.0;
    double mean_ = 0.0;
    double third_moment_ = 0.0;
    int span_ = 0;
    int atoms_ = 0;
};

/// Builds a lifetime law and enforces the lattice hypotheses: span 1 always,
/// non-degeneracy unless `oracle_mode` (which admits tau == 1 only).
inline LifetimeLaw make_lifetime(const LifetimeSpec& spec, bool oracle_mode = false)
{
    return std::visit(
        [&](const auto& s) -> LifetimeLaw {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, LatticeLifetimeSpec>) {
                auto law = LifetimeLaw::lattice(s.pmf);
                if (law.span() > 1)
                    throw ModelError("lifetime: lattice span " + std::to_string(law.span())
                                     + " > 1 (maximal step must be 1)");
                if (law.is_degenerate() && !oracle_mode)
                    throw ModelError("lifetime: degenerate lattice law (single atom); "
                                     "allowed only in oracle mode");
                return law;
            } else if constexpr (std::is_same_v<T, ExponentialLifetimeSpec>) {
                return LifetimeLaw::exponential(s.rate);
            } else {
                return LifetimeLaw::uniform(s.a, s.b);
            }
        },
        spec);
}

struct ModelConstants {
    double mu = 0.0;
    double sigma2 = 0.0;
    double B = 0.0; ///< sigma2 / (2 mu)
    bool is_lattice = false;

    bool operator==(const ModelConstants&) const = default;
};

inline ModelConstants constants(const OffspringLaw& offspring, const LifetimeLaw& lifetime)
{
    ModelConstants c;
    c.mu = lifetime.mean();
    c.sigma2 = offspring.variance();
    c.B = c.sigma2 / (2.0 * c.mu);
    c.is_lattice = lifetime.is_lattice();
    return c;
}

/// A Bellman-Harris model: offspring law, lifetime law and the oracle flag.
struct Model {
    std::string name;
    OffspringLaw offspring;
    LifetimeLaw lifetime;
    bool oracle_mode = false;

    ModelConstants constants() const { return bhr::constants(offspring, lifetime); }
};

namespace models {

/// Geometric law f_k = 2^{-(k+1)} truncated at k = kmax.
inline std::vector<double> geometric_pmf(int kmax = 60)
{
    std::vector<double> pmf(static_cast<std::size_t>(kmax) + 1);
    for (int k = 0; k <= kmax; ++k)
        pmf[static_cast<std::size_t>(k)] = std::ldexp(1.0, -(k + 1));
    return pmf;
}

/// Binary splitting (1/2, 0, 1/2) with lattice lifetimes {1, 2} equally likely.
inline Model bin_lat()
{
    return Model{"BIN-LAT", make_offspring({0.5, 0.0, 0.5}),
                 make_lifetime(LatticeLifetimeSpec{{{1, 0.5}, {2, 0.5}}}), false};
}

/// Geometric offspring with exponential(1) lifetimes.
inline Model geo_exp()
{
    return Model{"GEO-EXP", make_offspring(geometric_pmf()),
                 make_lifetime(ExponentialLifetimeSpec{1.0}), false};
}

/// Geometric Galton-Watson oracle (tau == 1).
inline Model geo_det()
{
    return Model{"GEO-DET", make_offspring(geometric_pmf()),
                 make_lifetime(LatticeLifetimeSpec{{{1, 1.0}}}, true), true};
}

} // namespace models

} // namespace bhr

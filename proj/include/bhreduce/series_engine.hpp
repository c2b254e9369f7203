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

// Exact population-size laws of a lattice Bellman-Harris process.
//
// F(0;s) = s and, for integer n >= 1,
//   F(n;s) = (1 - G(n)) s + sum_{l <= min(n, L)} g_l f(F(n - l; s)).
// Everything near s = 1 is carried in complement form (1 - F) so survival
// probabilities of order 1/t keep full relative precision.

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "errors.hpp"
#include "faa_di_bruno.hpp"
#include "models.hpp"
#include "series.hpp"

namespace bhr {

/// K = max(ceil(8 B t), 256): beyond it the exponential profile leaves < e^-8.
inline int default_truncation(const ModelConstants& c, int t)
{
    return std::max(static_cast<int>(std::ceil(8.0 * c.B * std::max(t, 0))), 256);
}

namespace detail {

inline void require_lattice(const Model& model, const char* op)
{
    if (!model.lifetime.is_lattice())
        throw UnsupportedModel(std::string(op)
                               + ": exact recursion needs a lattice lifetime law (model '"
                               + model.name + "' is continuous)");
}

// Fixed-size ring of the last L values, indexed by absolute time.
template <class T>
class TimeRing {
public:
    explicit TimeRing(int size) : slots_(static_cast<std::size_t>(std::max(size, 1))) {}
    T& operator[](int n) { return slots_[static_cast<std::size_t>(n) % slots_.size()]; }

private:
    std::vector<T> slots_;
};

} // namespace detail

/// Steps F(n; .) forward one integer time at a time, keeping only the
/// lifetime-window of composed series it needs.
class PgfRecursion {
public:
    PgfRecursion(const Model& model, int order)
        : model_(&model), mul_(order), window_(model.lifetime.max_lifetime())
    {
        detail::require_lattice(model, "pgf_recursion");
        if (order < 1)
            throw DomainError("pgf_recursion: truncation order must be >= 1");
        current_.coeffs.assign(static_cast<std::size_t>(order) + 1, 0.0);
        current_.coeffs[1] = 1.0;
        q_ = 1.0;
        current_.tail_mass = 0.0;
        push_composed();
    }

    int time() const noexcept { return n_; }
    int order() const noexcept { return mul_.order(); }
    const TruncatedSeries& current() const noexcept { return current_; }
    /// 1 - F(n; 0) = P(Z(n) > 0).
    double survival() const noexcept { return q_; }

    void advance()
    {
        const int n = n_ + 1;
        const auto& g = model_->lifetime.lattice_pmf();
        const int lmax = std::min(n, model_->lifetime.max_lifetime());
        const double stay = model_->lifetime.survival(static_cast<double>(n));

        auto& c = current_.coeffs;
        std::fill(c.begin(), c.end(), 0.0);
        double q = stay;
        for (int ell = 1; ell <= lmax; ++ell) {
            const double gl = g[static_cast<std::size_t>(ell)];
            if (gl == 0.0)
                continue;
            const auto& h = window_[n - ell];
            for (std::size_t k = 1; k < c.size(); ++k)
                c[k] += gl * h.coeffs[k];
            q += gl * h.one_minus_c0;
        }
        c[1] += stay;
        c[0] = 1.0 - q;
        q_ = q;
        current_.tail_mass
            = q - detail::kahan_sum(std::span<const double>(c).subspan(1));
        n_ = n;
        push_composed();
    }

    void advance_to(int t)
    {
        while (n_ < t)
            advance();
    }

private:
    void push_composed()
    {
        window_[n_] = compose(model_->offspring, current_.coeffs, q_, mul_);
    }

    const Model* model_;
    SeriesMultiplier mul_;
    detail::TimeRing<ComposedSeries> window_;
    TruncatedSeries current_;
    double q_ = 1.0;
    int n_ = 0;
};

/// Coefficients of F(t; .) on s^0..s^K. K < 0 selects default_truncation.
inline TruncatedSeries pgf_recursion(const Model& model, int t, int order = -1)
{
    if (t < 0)
        throw DomainError("pgf_recursion: t must be >= 0");
    detail::require_lattice(model, "pgf_recursion");
    PgfRecursion rec(model, order < 0 ? default_truncation(model.constants(), t) : order);
    rec.advance_to(t);
    return rec.current();
}

/// 1 - F(t; s) by the scalar recursion (no truncation). Lattice time: the
/// process is constant on [n, n+1), so t is floored.
inline double complement_at(const Model& model, double t, double s)
{
    detail::require_lattice(model, "complement_at");
    if (t < 0.0)
        throw DomainError("complement_at: t must be >= 0");
    const int tn = static_cast<int>(std::floor(t));
    const auto& g = model.lifetime.lattice_pmf();
    const int L = model.lifetime.max_lifetime();
    detail::TimeRing<double> composed(L); // 1 - f(F(m; s))
    double q = 1.0 - s;
    composed[0] = model.offspring.one_minus_pgf(q);
    for (int n = 1; n <= tn; ++n) {
        const double stay = model.lifetime.survival(static_cast<double>(n));
        q = stay * (1.0 - s);
        for (int ell = 1; ell <= std::min(n, L); ++ell)
            q += g[static_cast<std::size_t>(ell)] * composed[n - ell];
        composed[n] = model.offspring.one_minus_pgf(q);
    }
    return q;
}

/// Q(t) = P(Z(t) > 0) by the scalar recursion.
inline double survival_prob(const Model& model, double t) { return complement_at(model, t, 0.0); }

/// P(Z(t) = k), read off the truncated series.
inline double point_prob(const Model& model, int t, int k, int order = -1)
{
    const auto series = pgf_recursion(model, t, order);
    if (k < 0 || k > series.order())
        throw TruncationError("point_prob: k = " + std::to_string(k)
                              + " exceeds truncation order " + std::to_string(series.order()));
    return series[k];
}

struct LocalLimitPoint {
    int t = 0;
    double sup_error = 0.0; ///< sup_{1<=k<=Ct} |t^2 e^{k/(Bt)} P(Z(t)=k) - 1/B^2|
    int argmax_k = 0;
    double c1 = 0.0; ///< max_{k>=1} t^2 P(Z(t)=k) over retained coefficients
};

namespace detail {

inline LocalLimitPoint local_limit_point(const TruncatedSeries& series, int t, double B, double C)
{
    LocalLimitPoint p;
    p.t = t;
    const double tt = static_cast<double>(t);
    const double target = 1.0 / (B * B);
    const int kmax = std::min(series.order(), static_cast<int>(std::floor(C * tt)));
    for (int k = 1; k <= series.order(); ++k) {
        const double ck = series.coeffs[static_cast<std::size_t>(k)];
        p.c1 = std::max(p.c1, tt * tt * ck);
        if (k > kmax)
            continue;
        const double err = std::abs(tt * tt * std::exp(k / (B * tt)) * ck - target);
        if (err > p.sup_error) {
            p.sup_error = err;
            p.argmax_k = k;
        }
    }
    return p;
}

} // namespace detail

/// Local-limit deviations for every t in `t_grid` from a single recursion.
inline std::vector<LocalLimitPoint> local_limit_sweep(const Model& model, std::vector<int> t_grid,
                                                      double C)
{
    detail::require_lattice(model, "local_limit_error");
    if (t_grid.empty())
        return {};
    if (!(C > 0.0))
        throw DomainError("local_limit_error: C must be positive");
    std::sort(t_grid.begin(), t_grid.end());
    if (t_grid.front() < 1)
        throw DomainError("local_limit_error: t must be >= 1");
    const auto c = model.constants();
    const int tmax = t_grid.back();
    const int order
        = std::max(default_truncation(c, tmax), static_cast<int>(std::ceil(C * tmax)) + 1);
    PgfRecursion rec(model, order);
    std::vector<LocalLimitPoint> out;
    for (int t : t_grid) {
        rec.advance_to(t);
        out.push_back(detail::local_limit_point(rec.current(), t, c.B, C));
    }
    return out;
}

inline LocalLimitPoint local_limit_error(const Model& model, int t, double C)
{
    return local_limit_sweep(model, {t}, C).front();
}

namespace detail {

inline void require_psi(double t, double psi, const char* op)
{
    if (!(psi > 1.0) || !(psi < t))
        throw DomainError(std::string(op) + ": need 1 < psi < t (psi = " + std::to_string(psi)
                          + ", t = " + std::to_string(t) + ")");
}

} // namespace detail

/// [F(t; 1 - 1/psi) - F(t; 0)] B^2 t^2 / psi by the complement recursion.
inline double difference_ratio(const Model& model, int t, double psi)
{
    detail::require_psi(t, psi, "difference_ratio");
    const double B = model.constants().B;
    const double diff = complement_at(model, t, 0.0) - complement_at(model, t, 1.0 - 1.0 / psi);
    const double tt = static_cast<double>(t);
    return diff * B * B * tt * tt / psi;
}

struct BoundedValue {
    double value = 0.0;
    double error_bound = 0.0;
};

/// Same ratio evaluated on the truncated series, with the truncation bound
/// tail_mass * s0^{K+1} propagated to the ratio.
inline BoundedValue difference_ratio_series(const Model& model, int t, double psi, int order = -1)
{
    detail::require_psi(t, psi, "difference_ratio");
    const auto series = pgf_recursion(model, t, order);
    const double B = model.constants().B;
    const double tt = static_cast<double>(t);
    const double s0 = 1.0 - 1.0 / psi;
    const double scale = B * B * tt * tt / psi;
    // Sum c_k s0^k over k >= 1 only; c_0 cancels exactly.
    double acc = 0.0;
    for (std::size_t k = series.coeffs.size(); k-- > 1;)
        acc = acc * s0 + series.coeffs[k];
    return {acc * s0 * scale, series.truncation_bound(s0) * scale};
}

/// Taylor jet of F(t; w + h) in h: coefficients a_0..a_k with a_0 carried as
/// its complement 1 - F(t; w).
struct PgfJet {
    double one_minus_value = 0.0;
    std::vector<double> taylor; ///< taylor[r] = F^{(r)}(t; w) / r!, r >= 1

    double derivative(int r) const
    {
        double fact = 1.0;
        for (int i = 2; i <= r; ++i)
            fact *= i;
        return taylor.at(static_cast<std::size_t>(r)) * fact;
    }
};

namespace detail {

// Jet of f(F(.)) from the jet of F, using Faa di Bruno for each order.
inline PgfJet compose_jet(const OffspringLaw& f, const PgfJet& inner, int k)
{
    PgfJet out;
    out.one_minus_value = f.one_minus_pgf(inner.one_minus_value);
    out.taylor.assign(static_cast<std::size_t>(k) + 1, 0.0);
    const double at = 1.0 - inner.one_minus_value;
    std::vector<double> h(static_cast<std::size_t>(k) + 1), tder(static_cast<std::size_t>(k));
    for (int m = 0; m <= k; ++m)
        h[static_cast<std::size_t>(m)] = f.derivative(m, at);
    double fact = 1.0;
    for (int r = 1; r <= k; ++r) {
        fact *= r;
        tder[static_cast<std::size_t>(r - 1)] = inner.taylor[static_cast<std::size_t>(r)] * fact;
    }
    fact = 1.0;
    for (int r = 1; r <= k; ++r) {
        fact *= r;
        out.taylor[static_cast<std::size_t>(r)] = faa_di_bruno(h, tder, r) / fact;
    }
    return out;
}

} // namespace detail

/// Jet of F(t; .) of order k at the point w = 1 - one_minus_w.
inline PgfJet pgf_jet(const Model& model, int t, double one_minus_w, int k)
{
    detail::require_lattice(model, "pgf_jet");
    if (t < 0 || k < 0)
        throw DomainError("pgf_jet: need t >= 0 and k >= 0");
    const auto& g = model.lifetime.lattice_pmf();
    const int L = model.lifetime.max_lifetime();
    const std::size_t width = static_cast<std::size_t>(k) + 1;

    PgfJet identity;
    identity.one_minus_value = one_minus_w;
    identity.taylor.assign(width, 0.0);
    if (k >= 1)
        identity.taylor[1] = 1.0;

    detail::TimeRing<PgfJet> composed(L);
    PgfJet cur = identity;
    composed[0] = detail::compose_jet(model.offspring, cur, k);
    for (int n = 1; n <= t; ++n) {
        const double stay = model.lifetime.survival(static_cast<double>(n));
        PgfJet next;
        next.one_minus_value = stay * identity.one_minus_value;
        next.taylor.assign(width, 0.0);
        for (std::size_t r = 1; r < width; ++r)
            next.taylor[r] = stay * identity.taylor[r];
        for (int ell = 1; ell <= std::min(n, L); ++ell) {
            const double gl = g[static_cast<std::size_t>(ell)];
            if (gl == 0.0)
                continue;
            const auto& h = composed[n - ell];
            next.one_minus_value += gl * h.one_minus_value;
            for (std::size_t r = 1; r < width; ++r)
                next.taylor[r] += gl * h.taylor[r];
        }
        cur = std::move(next);
        composed[n] = detail::compose_jet(model.offspring, cur, k);
    }
    return cur;
}

/// F^{(k)}(t; w) B^2 t^2 / ((B psi)^{k+1} k!) with w = f(F(psi; 0)).
inline double derivative_ratio(const Model& model, int t, double psi, int k)
{
    detail::require_psi(t, psi, "derivative_ratio");
    if (k < 1)
        throw DomainError("derivative_ratio: k must be >= 1");
    const double B = model.constants().B;
    const double one_minus_w = model.offspring.one_minus_pgf(survival_prob(model, psi));
    const auto jet = pgf_jet(model, t, one_minus_w, k);
    const double tt = static_cast<double>(t);
    // F^{(k)} / k! is exactly the k-th Taylor coefficient.
    return jet.taylor[static_cast<std::size_t>(k)] * B * B * tt * tt / std::pow(B * psi, k + 1);
}

/// T(t; s) = f(F(t; s)): pgf of the process started from xi particles.
inline TruncatedSeries y_pgf(const Model& model, int t, int order = -1)
{
    return compose(model.offspring, pgf_recursion(model, t, order));
}

/// P(Y(t) > 0) = 1 - f(F(t; 0)).
inline double y_survival_prob(const Model& model, double t)
{
    return model.offspring.one_minus_pgf(survival_prob(model, t));
}

} // namespace bhr

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

// Discrete renewal quantities for lattice lifetimes: renewal masses u(n),
// the renewal function U, expected young-particle counts and the tail
// condition that makes long-lived particles negligible.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <vector>

#include "errors.hpp"
#include "models.hpp"
#include "schedule.hpp"

namespace bhr {

struct RenewalTable {
    std::vector<double> u; // u(n): renewal mass at n, u(0) = 1
    std::vector<double> U; // U(n) = sum_{m <= n} u(m)

    int t_max() const noexcept { return static_cast<int>(u.size()) - 1; }

    /// U(t) with U(t) = 0 for t < 0 and U(floor t) otherwise.
    double cumulative(double t) const
    {
        if (t < 0)
            return 0.0;
        const auto n = static_cast<std::size_t>(std::floor(t));
        if (n >= U.size())
            throw TruncationError("renewal table only reaches t = " + std::to_string(t_max()));
        return U[n];
    }
};

inline RenewalTable renewal_function(const LifetimeLaw& life, int t_max)
{
    if (!life.is_lattice())
        throw UnsupportedModel("renewal_function: lattice lifetime required "
                               "(exponential laws use exponential_renewal)");
    if (t_max < 0)
        throw DomainError("renewal_function: t_max must be >= 0");
    const auto g = life.lattice_pmf();
    const int L = static_cast<int>(g.size()) - 1;
    RenewalTable tab;
    tab.u.assign(static_cast<std::size_t>(t_max) + 1, 0.0);
    tab.U.assign(tab.u.size(), 0.0);
    tab.u[0] = 1.0;
    tab.U[0] = 1.0;
    for (int n = 1; n <= t_max; ++n) {
        double acc = 0.0;
        for (int l = 1; l <= std::min(n, L); ++l)
            acc += g[static_cast<std::size_t>(l)] * tab.u[static_cast<std::size_t>(n - l)];
        tab.u[static_cast<std::size_t>(n)] = acc;
        tab.U[static_cast<std::size_t>(n)] = tab.U[static_cast<std::size_t>(n - 1)] + acc;
    }
    return tab;
}

/// Poisson renewals: U(t) = 1 + rate t (the atom at 0 included).
inline double exponential_renewal(const LifetimeLaw& life, double t)
{
    if (life.kind() != LifetimeKind::exponential)
        throw UnsupportedModel("exponential_renewal: exponential lifetime required");
    return t < 0 ? 0.0 : 1.0 + life.rate() * t;
}

/// U(t) for any model with a lattice or exponential lifetime.
inline double renewal_at(const Model& model, double t)
{
    if (model.lifetime.is_lattice())
        return renewal_function(model.lifetime, static_cast<int>(std::max(0.0, std::floor(t))))
            .cumulative(t);
    return exponential_renewal(model.lifetime, t);
}

/// A(t,x) = sum_{n <= t} (1 - G(t-n)) J(x - (t-n)) u(n), J(y) = 1 for y >= 0.
inline double expected_young(const Model& model, int t, double x, const RenewalTable& tab)
{
    if (x < 0 || t < 0)
        return 0.0;
    if (t > tab.t_max())
        throw TruncationError("expected_young: renewal table too short");
    double acc = 0.0;
    for (int n = std::max(0, t - static_cast<int>(std::floor(x))); n <= t; ++n)
        acc += model.lifetime.survival(t - n) * tab.u[static_cast<std::size_t>(n)];
    return acc;
}

inline double expected_young(const Model& model, int t, double x)
{
    if (!model.lifetime.is_lattice())
        throw UnsupportedModel("expected_young: lattice lifetime required");
    return expected_young(model, t, x, renewal_function(model.lifetime, std::max(t, 0)));
}

/// U(t) (1 - G(eps phi(t))), an upper bound for P(Z*(t, eps phi(t)) >= 1).
inline double neglig_bound(const Model& model, double t, double epsilon, const Schedule& phi)
{
    return renewal_at(model, t) * model.lifetime.survival(epsilon * phi(t));
}

/// Largest U(n) mu / n over 1 <= n <= t_max.
inline double renewal_ratio_max(const RenewalTable& tab, double mu)
{
    double best = 0.0;
    for (int n = 1; n <= tab.t_max(); ++n)
        best = std::max(best, tab.U[static_cast<std::size_t>(n)] * mu / n);
    return best;
}

inline constexpr std::array<double, 3> kTailEpsilons{0.1, 0.5, 1.0};

struct TailRow {
    double t = 0;
    std::array<double, 3> value{}; // t^3 (1 - G(eps phi(t))) / phi(t), one per epsilon
};

struct TailReport {
    std::vector<TailRow> rows;
    std::array<bool, 3> flagged{}; // sequence fails to decay over the grid
    bool ok() const noexcept { return std::none_of(flagged.begin(), flagged.end(), [](bool f) { return f; }); }
};

/// Tabulates t^3 (1 - G(eps phi(t))) / phi(t) for a lifetime tail function.
/// An epsilon is flagged when its last value is positive and not below the
/// value at the middle of the grid.
inline TailReport check_tail_condition(const std::function<double(double)>& tail, const Schedule& phi,
                                       const std::vector<double>& t_grid)
{
    if (t_grid.empty())
        throw DomainError("check_tail_condition: empty t grid");
    TailReport rep;
    for (double t : t_grid) {
        const double p = phi(t);
        if (!(p < t))
            throw DomainError("check_tail_condition: schedule " + phi.to_string()
                              + " is not o(t) (phi(" + shortest(t) + ") >= t)");
        if (!(p > 0))
            throw DomainError("check_tail_condition: schedule must be positive on the grid");
        TailRow row{t, {}};
        for (std::size_t e = 0; e < kTailEpsilons.size(); ++e)
            row.value[e] = t * t * t * tail(kTailEpsilons[e] * p) / p;
        rep.rows.push_back(row);
    }
    const std::size_t mid = rep.rows.size() / 2;
    for (std::size_t e = 0; e < kTailEpsilons.size(); ++e) {
        const double last = rep.rows.back().value[e];
        rep.flagged[e] = last > 0 && last >= rep.rows[mid].value[e];
    }
    return rep;
}

inline TailReport check_tail_condition(const Model& model, const Schedule& phi,
                                       const std::vector<double>& t_grid)
{
    const LifetimeLaw& life = model.lifetime;
    return check_tail_condition([&life](double x) { return life.survival(x); }, phi, t_grid);
}

} // namespace bhr

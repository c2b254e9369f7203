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

// Comparison machinery for empirical laws against analytic targets:
// Wilson intervals, pooled chi-square, per-cell z-scores, Kolmogorov-Smirnov
// against Exp(1) and convergence sweeps along a time grid.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

#include "errors.hpp"

namespace bhr {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    double half_width() const noexcept { return 0.5 * (hi - lo); }
    bool contains(double x) const noexcept { return lo <= x && x <= hi; }
};

inline double normal_quantile_two_sided(double confidence)
{
    if (!(confidence > 0.0 && confidence < 1.0))
        throw DomainError("confidence must lie in (0, 1)");
    return boost::math::quantile(boost::math::normal_distribution<double>(),
                                 0.5 + 0.5 * confidence);
}

inline Interval wilson_interval(std::int64_t successes, std::int64_t n, double confidence = 0.95)
{
    if (n <= 0)
        throw EmptySample("wilson_interval: empty sample");
    if (successes < 0 || successes > n)
        throw DomainError("wilson_interval: successes must lie in [0, n]");
    const double z = normal_quantile_two_sided(confidence);
    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(successes) / nn;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nn;
    const double centre = (p + z2 / (2.0 * nn)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
    Interval iv{std::max(0.0, centre - half), std::min(1.0, centre + half)};
    if (successes == 0)
        iv.lo = 0.0;
    if (successes == n)
        iv.hi = 1.0;
    return iv;
}

/// |emp - target| <= max(wilson_multiplier * Wilson half-width, absolute).
struct TolerancePolicy {
    double wilson_multiplier = 3.0;
    double absolute = 0.05;
    double confidence = 0.95;
    double pool_expected = 5.0;
};

inline bool within_policy(std::int64_t successes, std::int64_t n, double target,
                          const TolerancePolicy& policy = {})
{
    const Interval iv = wilson_interval(successes, n, policy.confidence);
    const double p = static_cast<double>(successes) / static_cast<double>(n);
    return std::abs(p - target) <= std::max(policy.wilson_multiplier * iv.half_width(), policy.absolute);
}

/// Counts for a list of outcome cells plus an implicit remainder:
/// n - sum(counts) observations fell outside the listed cells.
struct EmpiricalDist {
    std::vector<std::int64_t> labels;
    std::vector<std::int64_t> counts;
    std::int64_t n = 0;

    std::int64_t listed() const noexcept { return std::accumulate(counts.begin(), counts.end(), std::int64_t{0}); }
    std::int64_t remainder() const noexcept { return n - listed(); }

    /// Cells for labels [first, last]; anything else lands in the remainder.
    static EmpiricalDist from_values(const std::vector<std::int64_t>& values, std::int64_t first,
                                     std::int64_t last)
    {
        EmpiricalDist d;
        for (std::int64_t j = first; j <= last; ++j)
            d.labels.push_back(j);
        d.counts.assign(d.labels.size(), 0);
        d.n = static_cast<std::int64_t>(values.size());
        for (std::int64_t v : values)
            if (v >= first && v <= last)
                ++d.counts[static_cast<std::size_t>(v - first)];
        return d;
    }
};

struct CellReport {
    std::int64_t label = 0;
    std::int64_t count = 0;
    double proportion = 0.0;
    Interval wilson;
    double target = 0.0;
    double z = 0.0;
    bool pass = false;
};

struct ComparisonReport {
    std::vector<CellReport> cells;
    double chi_square = 0.0;
    int dof = 0;
    double chi_square_p = 1.0;
    double tv_distance = 0.0;
    int pooled_cells = 0;
    bool pass = false;
};

inline double z_score(double proportion, double target, std::int64_t n)
{
    const double var = target * (1.0 - target) / static_cast<double>(n);
    if (var <= 0.0)
        return proportion == target ? 0.0 : std::numeric_limits<double>::infinity();
    return (proportion - target) / std::sqrt(var);
}

inline ComparisonReport compare_pmf(const EmpiricalDist& emp, const std::vector<double>& analytic,
                                    const TolerancePolicy& policy = {})
{
    if (emp.n <= 0)
        throw EmptySample("compare_pmf: empty empirical sample");
    if (analytic.size() != emp.counts.size())
        throw DomainError("compare_pmf: analytic pmf and empirical cells differ in length");
    if (emp.remainder() < 0)
        throw DomainError("compare_pmf: cell counts exceed n");
    double mass = 0.0;
    for (double p : analytic) {
        if (p < 0.0)
            throw DomainError("compare_pmf: negative analytic probability");
        mass += p;
    }
    if (mass > 1.0 + 1e-9)
        throw DomainError("compare_pmf: analytic pmf sums above 1");

    const double n = static_cast<double>(emp.n);
    ComparisonReport rep;
    double tail_target = std::max(0.0, 1.0 - mass);
    std::int64_t tail_count = emp.remainder();
    rep.tv_distance = 0.5 * std::abs(static_cast<double>(tail_count) / n - tail_target);
    rep.pass = true;
    for (std::size_t i = 0; i < analytic.size(); ++i) {
        CellReport c;
        c.label = emp.labels.empty() ? static_cast<std::int64_t>(i) : emp.labels[i];
        c.count = emp.counts[i];
        c.proportion = static_cast<double>(c.count) / n;
        c.wilson = wilson_interval(c.count, emp.n, policy.confidence);
        c.target = analytic[i];
        c.z = z_score(c.proportion, c.target, emp.n);
        c.pass = within_policy(c.count, emp.n, c.target, policy);
        rep.pass = rep.pass && c.pass;
        rep.tv_distance += 0.5 * std::abs(c.proportion - c.target);
        rep.cells.push_back(c);
    }

    // Pool sparse cells into the remainder, then chi-square over what is left.
    int kept = 0;
    for (const auto& c : rep.cells) {
        if (n * c.target < policy.pool_expected) {
            tail_target += c.target;
            tail_count += c.count;
            ++rep.pooled_cells;
            continue;
        }
        const double e = n * c.target;
        const double d = static_cast<double>(c.count) - e;
        rep.chi_square += d * d / e;
        ++kept;
    }
    if (n * tail_target > 0.0) {
        const double e = n * tail_target;
        const double d = static_cast<double>(tail_count) - e;
        rep.chi_square += d * d / e;
        ++kept;
    } else if (tail_count > 0) {
        rep.chi_square = std::numeric_limits<double>::infinity();
    }
    rep.dof = std::max(kept - 1, 0);
    if (std::isinf(rep.chi_square))
        rep.chi_square_p = 0.0;
    else if (rep.dof > 0)
        rep.chi_square_p = boost::math::cdf(
            boost::math::complement(boost::math::chi_squared_distribution<double>(rep.dof), rep.chi_square));
    return rep;
}

/// sup_z |F_n(z) - (1 - e^{-z})|.
inline double ks_exponential(std::vector<double> samples)
{
    if (samples.empty())
        throw EmptySample("ks_exponential: no samples");
    std::sort(samples.begin(), samples.end());
    if (samples.front() < 0.0)
        throw DomainError("ks_exponential: samples must be nonnegative");
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = -std::expm1(-samples[i]);
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    return d;
}

/// Asymptotic Kolmogorov critical value c / sqrt(n); c = 1.95 is the 0.999 level.
inline double ks_critical(std::size_t n, double c = 1.95)
{
    return c / std::sqrt(static_cast<double>(n));
}

struct ConvergenceRow {
    double t = 0.0;
    double quantity = 0.0;
    double predicted = 0.0;
    double ratio = 0.0;
    double error = 0.0; // |ratio - 1|
};

struct ConvergenceTable {
    std::vector<ConvergenceRow> rows;
    double log_error_slope = 0.0; // least-squares slope of log error against log t
    bool trivially_converged = false;
    bool converged = false;
};

/// Runs `experiment(t) -> (quantity, predicted)` on an increasing grid. The
/// sweep counts as converged when the error decreases strictly over the last
/// three steps of the grid.
inline ConvergenceTable convergence_sweep(const std::function<std::pair<double, double>(double)>& experiment,
                                          const std::vector<double>& t_grid)
{
    if (t_grid.empty())
        throw DomainError("convergence_sweep: empty grid");
    for (std::size_t i = 1; i < t_grid.size(); ++i)
        if (!(t_grid[i] > t_grid[i - 1]))
            throw DomainError("convergence_sweep: t grid must be increasing");
    ConvergenceTable tab;
    for (double t : t_grid) {
        const auto [q, p] = experiment(t);
        ConvergenceRow r{t, q, p, p != 0.0 ? q / p : std::numeric_limits<double>::quiet_NaN(), 0.0};
        r.error = std::abs(r.ratio - 1.0);
        tab.rows.push_back(r);
    }
    tab.trivially_converged = std::all_of(tab.rows.begin(), tab.rows.end(),
                                          [](const ConvergenceRow& r) { return r.error <= 1e-15; });
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (const auto& r : tab.rows) {
        if (!(r.error > 0.0) || !std::isfinite(r.error))
            continue;
        const double x = std::log(r.t), y = std::log(r.error);
        sx += x, sy += y, sxx += x * x, sxy += x * y;
        ++m;
    }
    if (m >= 2 && m * sxx - sx * sx > 0)
        tab.log_error_slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    if (tab.trivially_converged) {
        tab.converged = true;
        return tab;
    }
    const std::size_t k = tab.rows.size();
    const std::size_t from = k > 3 ? k - 4 : 0;
    bool decreasing = k >= 2;
    for (std::size_t i = from + 1; i < k; ++i)
        decreasing = decreasing && tab.rows[i].error < tab.rows[i - 1].error;
    tab.converged = decreasing;
    return tab;
}

} // namespace bhr

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

// Limiting laws of the reduced process and the asymptotic predictors used to
// judge finite-t runs.

#include <cmath>
#include <limits>

#include <boost/math/special_functions/gamma.hpp>

#include "errors.hpp"
#include "events.hpp"
#include "models.hpp"

namespace bhr {

/// Regularized lower incomplete gamma P(j, z) = (1/(j-1)!) int_0^z u^{j-1} e^{-u} du.
inline double incomplete_gamma_p(int j, double z)
{
    if (j < 1)
        throw DomainError("incomplete gamma: j must be >= 1");
    if (!(z >= 0))
        throw DomainError("incomplete gamma: z must be >= 0");
    if (z == 0)
        return 0.0;
    if (std::isinf(z))
        return 1.0;
    return boost::math::gamma_p(static_cast<double>(j), z);
}

namespace detail {

inline void require_j(int j)
{
    if (j < 1)
        throw DomainError("limit law: j must be >= 1");
}

inline void require_unit_open(double x, const char* what)
{
    if (!(x > 0 && x < 1))
        throw DomainError(std::string(what) + ": x must lie in (0, 1)");
}

inline void require_positive(double v, const char* what)
{
    if (!(v > 0))
        throw DomainError(std::string(what) + " must be positive");
}

} // namespace detail

/// lim P(Z(t - y phi(t), t) = j | H(t)) = y P(j, 1/y).
inline double theorem1_limit(int j, double y)
{
    detail::require_j(j);
    detail::require_positive(y, "theorem1_limit: y");
    return y * incomplete_gamma_p(j, 1.0 / y);
}

/// lim P(d(t) <= y phi(t) | H(t)) = y (1 - e^{-1/y}).
inline double corollary1_mrca(double y)
{
    detail::require_positive(y, "corollary1_mrca: y");
    return -y * std::expm1(-1.0 / y);
}

/// lim P(Z(x t, t) = j | 0 < Z(t) < B a t).
inline double theorem2_limit(int j, double x, double a)
{
    detail::require_j(j);
    detail::require_unit_open(x, "theorem2_limit");
    detail::require_positive(a, "theorem2_limit: a");
    return incomplete_gamma_p(j, a / (1.0 - x)) * (1.0 - x) * std::pow(x, j - 1) / -std::expm1(-a);
}

/// lim P(d(t) <= x t | 0 < Z(t) < B a t); x = 1 gives 1.
inline double corollary2_mrca(double x, double a)
{
    if (!(x > 0 && x <= 1))
        throw DomainError("corollary2_mrca: x must lie in (0, 1]");
    detail::require_positive(a, "corollary2_mrca: a");
    return x * std::expm1(-a / x) / std::expm1(-a);
}

/// Laplace transform 1/(1 + lambda) of the Exp(1) limit of Z(t)/(Bt).
inline double yaglom_laplace(double lambda)
{
    if (!(lambda >= 0))
        throw DomainError("yaglom_laplace: lambda must be >= 0");
    return 1.0 / (1.0 + lambda);
}

inline double yaglom_cdf(double z)
{
    if (!(z >= 0))
        throw DomainError("yaglom_cdf: z must be >= 0");
    return -std::expm1(-z);
}

/// lim P(Z(x t, t) = j) / P(Z(t) > 0) = (1 - x) x^{j-1}.
inline double intermediate_reduced_limit(int j, double x)
{
    detail::require_j(j);
    detail::require_unit_open(x, "intermediate_reduced_limit");
    return (1.0 - x) * std::pow(x, j - 1);
}

/// P(Z(t) > 0) ~ 1/(B t).
inline double survival_predictor(const ModelConstants& c, double t)
{
    detail::require_positive(t, "survival_predictor: t");
    return 1.0 / (c.B * t);
}

/// P(event) for survival, H(t) ~ phi(t)/(B t^2), or the Theorem 2 event ~ (1 - e^{-a})/(B t).
inline double event_predictor(const ModelConstants& c, double t, const EventSpec& event)
{
    detail::require_positive(t, "event_predictor: t");
    switch (event.kind) {
    case EventKind::survival:
        return survival_predictor(c, t);
    case EventKind::small_population:
        return event.phi(t) / (c.B * t * t);
    case EventKind::theorem2:
        return -std::expm1(-event.a) / (c.B * t);
    }
    return 0.0;
}

/// P(Z(t) = k) ~ e^{-k/(B t)} / (B^2 t^2).
inline double local_limit_predictor(const ModelConstants& c, double t, std::int64_t k)
{
    detail::require_positive(t, "local_limit_predictor: t");
    if (k < 1)
        throw DomainError("local_limit_predictor: k must be >= 1");
    const double bt = c.B * t;
    return std::exp(-static_cast<double>(k) / bt) / (bt * bt);
}

struct TruncatedSum {
    double sum = 0.0;
    double tail_bound = 0.0; // bound on the omitted terms j > j_max
    int j_max = 0;
};

inline constexpr int kLimitSumTerms = 400;

/// sum_{j <= j_max} theorem1_limit(j, y); terms obey y (1/y)^j / j!.
inline TruncatedSum theorem1_sum(double y, int j_max = kLimitSumTerms)
{
    TruncatedSum s{0.0, 0.0, j_max};
    for (int j = 1; j <= j_max; ++j)
        s.sum += theorem1_limit(j, y);
    const double z = 1.0 / y;
    s.tail_bound = y * std::exp((j_max + 1) * std::log(z) - std::lgamma(j_max + 2.0) + z);
    return s;
}

/// sum_{j <= j_max} theorem2_limit(j, x, a); terms obey (1 - x) x^{j-1} / (1 - e^{-a}).
inline TruncatedSum theorem2_sum(double x, double a, int j_max = kLimitSumTerms)
{
    TruncatedSum s{0.0, 0.0, j_max};
    for (int j = 1; j <= j_max; ++j)
        s.sum += theorem2_limit(j, x, a);
    s.tail_bound = std::pow(x, j_max) / -std::expm1(-a);
    return s;
}

} // namespace bhr

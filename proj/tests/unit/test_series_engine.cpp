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


#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "bhreduce/series_engine.hpp"

using namespace bhr;

namespace {

// Geometric Galton-Watson closed form: F_n(s) = (n - (n-1)s) / (n+1 - n s),
// P(Z_n = 0) = n/(n+1), P(Z_n = k) = n^{k-1}/(n+1)^{k+1}.
double geo_coeff(int n, int k)
{
    if (k == 0)
        return static_cast<double>(n) / (n + 1.0);
    return std::exp((k - 1) * std::log(static_cast<double>(n)) - (k + 1) * std::log(n + 1.0));
}

// 1 - F_n(s) = (1-s) / (1 + n(1-s)); F^{(k)}_n(s) = k! n^{k-1} (1 + n(1-s))^{-(k+1)}.
double geo_derivative(int n, int k, double one_minus_s)
{
    double fact = 1.0;
    for (int i = 2; i <= k; ++i)
        fact *= i;
    return fact * std::pow(n, k - 1) * std::pow(1.0 + n * one_minus_s, -(k + 1));
}

// Plain polynomial arithmetic, independent of the engine's composition.
std::vector<double> poly_mul(const std::vector<double>& a, const std::vector<double>& b)
{
    std::vector<double> c(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j)
            c[i + j] += a[i] * b[j];
    return c;
}

std::vector<double> poly_compose(const std::vector<double>& h, const std::vector<double>& t)
{
    std::vector<double> out{0.0}, power{1.0};
    for (double hk : h) {
        if (out.size() < power.size())
            out.resize(power.size(), 0.0);
        for (std::size_t i = 0; i < power.size(); ++i)
            out[i] += hk * power[i];
        power = poly_mul(power, t);
    }
    return out;
}

TruncatedSeries as_series(std::vector<double> c) { return TruncatedSeries{std::move(c), 0.0}; }

} // namespace

TEST(PgfRecursion, BinLatSmallTimesMatchEnumeration)
{
    const auto m = models::bin_lat();
    const auto f1 = pgf_recursion(m, 1, 8);
    const std::vector<double> t1{0.25, 0.5, 0.25};
    for (int k = 0; k < 3; ++k)
        EXPECT_NEAR(f1[k], t1[static_cast<std::size_t>(k)], 1e-15);
    EXPECT_NEAR(f1[3], 0.0, 1e-15);

    const auto f2 = pgf_recursion(m, 2, 8);
    const std::vector<double> t2{33.0 / 64, 1.0 / 16, 11.0 / 32, 1.0 / 16, 1.0 / 64};
    for (int k = 0; k < 5; ++k)
        EXPECT_NEAR(f2[k], t2[static_cast<std::size_t>(k)], 1e-15);

    // Exhaustive rational enumeration (tests/oracles/enumerate_bin_lat.py).
    const auto f3 = pgf_recursion(m, 3, 16);
    const std::vector<double> t3{9537.0 / 16384, 161.0 / 2048, 751.0 / 4096,
                                 183.0 / 2048,   419.0 / 8192, 23.0 / 2048,
                                 15.0 / 4096,    1.0 / 2048,   1.0 / 16384};
    for (int k = 0; k < 9; ++k)
        EXPECT_NEAR(f3[k], t3[static_cast<std::size_t>(k)], 1e-15);
    EXPECT_NEAR(f3.tail_mass, 0.0, 1e-15);
}

TEST(PgfRecursion, GeoDetThreeSteps)
{
    const auto s = pgf_recursion(models::geo_det(), 3, 40);
    EXPECT_NEAR(s[0], 0.75, 1e-15);
    for (int k = 1; k <= 40; ++k)
        EXPECT_NEAR(s[k], std::pow(3.0, k - 1) / std::pow(4.0, k + 1), 1e-15) << k;
}

TEST(PgfRecursion, GeoDetClosedFormUpTo200)
{
    const auto m = models::geo_det();
    PgfRecursion rec(m, 64);
    for (int n = 1; n <= 200; ++n) {
        rec.advance();
        const auto& s = rec.current();
        for (int k = 0; k <= 50; ++k)
            ASSERT_NEAR(s[k], geo_coeff(n, k), 1e-12) << "n=" << n << " k=" << k;
    }
}

TEST(PgfRecursion, TruncationIsExactForRetainedCoefficients)
{
    // Order 120 takes the direct product path, order 3000 the FFT path.
    const auto m = models::bin_lat();
    const auto small = pgf_recursion(m, 300, 120);
    const auto large = pgf_recursion(m, 300, 3000);
    for (int k = 0; k <= 120; ++k)
        ASSERT_NEAR(small[k], large[k], 1e-15 + 1e-11 * large[k]) << k;
    EXPECT_GT(small.tail_mass, large.tail_mass);

    const auto g_small = pgf_recursion(models::geo_det(), 60, 100);
    const auto g_large = pgf_recursion(models::geo_det(), 60, 1000);
    for (int k = 0; k <= 100; ++k)
        ASSERT_NEAR(g_small[k], g_large[k], 1e-15 + 1e-11 * g_large[k]) << k;
    for (int k = 0; k <= 1000; ++k)
        ASSERT_NEAR(g_large[k], geo_coeff(60, k), 1e-14 + 1e-9 * geo_coeff(60, k)) << k;
}

TEST(PgfRecursion, SubProbabilityAndMonotoneExtinction)
{
    const auto m = models::bin_lat();
    PgfRecursion rec(m, 512);
    double prev_c0 = 0.0;
    for (int n = 1; n <= 400; ++n) {
        rec.advance();
        const auto& s = rec.current();
        double total = 0.0;
        for (double c : s.coeffs) {
            ASSERT_GE(c, 0.0);
            total += c;
        }
        ASSERT_LE(total, 1.0 + 1e-12);
        ASSERT_GE(s.tail_mass, -1e-12);
        ASSERT_GE(s[0], prev_c0);
        prev_c0 = s[0];
    }
}

TEST(PgfRecursion, CriticalMeanIsOne)
{
    const auto m = models::bin_lat();
    for (int t : {10, 100, 500}) {
        const auto s = pgf_recursion(m, t, 40 * t + 64);
        ASSERT_LT(s.tail_mass, 1e-10);
        double mean = 0.0;
        for (int k = 1; k <= s.order(); ++k)
            mean += k * s[k];
        EXPECT_NEAR(mean, 1.0, 1e-6) << t;
    }
}

TEST(PgfRecursion, RejectsContinuousLifetimes)
{
    EXPECT_THROW(pgf_recursion(models::geo_exp(), 5), UnsupportedModel);
    EXPECT_THROW(survival_prob(models::geo_exp(), 5), UnsupportedModel);
}

TEST(Survival, ExactValues)
{
    EXPECT_NEAR(survival_prob(models::geo_det(), 10), 1.0 / 11, 1e-15);
    EXPECT_NEAR(survival_prob(models::bin_lat(), 1), 0.75, 1e-15);
    EXPECT_NEAR(survival_prob(models::bin_lat(), 2), 31.0 / 64, 1e-15);
    EXPECT_NEAR(survival_prob(models::bin_lat(), 2.9), 31.0 / 64, 1e-15);
    EXPECT_NEAR(survival_prob(models::geo_det(), 5000) * 5001.0, 1.0, 1e-12);
}

TEST(Survival, ScalarAndSeriesPathsAgree)
{
    const auto m = models::bin_lat();
    PgfRecursion rec(m, 1);
    for (int n = 1; n <= 2048; ++n) {
        rec.advance();
        if (n % 64 == 0 || n < 20) {
            ASSERT_NEAR(rec.survival(), survival_prob(m, n), 1e-14) << n;
        }
    }
    // c_0 itself does not depend on the truncation order.
    EXPECT_NEAR(1.0 - pgf_recursion(m, 100, 1)[0], 1.0 - pgf_recursion(m, 100, 500)[0], 1e-15);
}

TEST(Survival, AsymptoticsApproachOne)
{
    const auto m = models::bin_lat();
    const double B = m.constants().B;
    double prev_err = 1.0;
    for (int t = 256; t <= 4096; t *= 2) {
        const double ratio = survival_prob(m, t) * B * t;
        const double err = std::abs(ratio - 1.0);
        EXPECT_LT(err, prev_err) << t;
        prev_err = err;
        if (t == 4096) {
            EXPECT_GE(ratio, 0.9);
            EXPECT_LE(ratio, 1.1);
        }
    }
}

TEST(PointProb, Examples)
{
    const double expected = std::exp(99 * std::log(100.0) - 101 * std::log(101.0));
    EXPECT_NEAR(point_prob(models::geo_det(), 100, 100) / expected, 1.0, 1e-9);
    EXPECT_NEAR(point_prob(models::bin_lat(), 2, 3), 1.0 / 16, 1e-15);
    EXPECT_DOUBLE_EQ(point_prob(models::bin_lat(), 0, 1), 1.0);
    EXPECT_DOUBLE_EQ(point_prob(models::geo_det(), 0, 1), 1.0);
    EXPECT_THROW(point_prob(models::bin_lat(), 2, 9, 8), TruncationError);
}

TEST(LocalLimit, GeoDetMatchesClosedForm)
{
    const auto p = local_limit_error(models::geo_det(), 100, 1.0);
    double sup = 0.0;
    for (int k = 1; k <= 100; ++k)
        sup = std::max(sup, std::abs(1e4 * std::exp(k / 100.0) * geo_coeff(100, k) - 1.0));
    EXPECT_NEAR(p.sup_error, sup, 1e-9);
    const double at100 = std::exp(1.0) * std::pow(100.0 / 101.0, 101);
    EXPECT_NEAR(at100 - 1.0, -0.00497, 5e-5);
    EXPECT_GE(p.sup_error, std::abs(at100 - 1.0) - 1e-12);
    EXPECT_TRUE(std::isfinite(p.c1));
    EXPECT_GT(p.c1, 0.0);
}

TEST(LocalLimit, BinLatErrorShrinks)
{
    const auto pts = local_limit_sweep(models::bin_lat(), {64, 256}, 1.0);
    ASSERT_EQ(pts.size(), 2u);
    EXPECT_LT(pts[1].sup_error, pts[0].sup_error);
    for (const auto& p : pts)
        EXPECT_TRUE(std::isfinite(p.c1));
}

TEST(DifferenceRatio, GeoDetClosedForm)
{
    const double t = 1e4, psi = 100;
    const double expected = t * t * (psi - 1) / (psi * (1 + t) * (psi + t));
    EXPECT_NEAR(expected, 0.9801, 1e-4);
    EXPECT_NEAR(difference_ratio(models::geo_det(), 10000, 100.0), expected, 1e-9);
    EXPECT_THROW(difference_ratio(models::geo_det(), 100, 100.0), DomainError);
    EXPECT_THROW(difference_ratio(models::geo_det(), 100, 1.0), DomainError);
}

TEST(DifferenceRatio, SeriesPathWithinItsBound)
{
    const auto m = models::bin_lat();
    const auto s = difference_ratio_series(m, 400, 20.0);
    const double scalar = difference_ratio(m, 400, 20.0);
    EXPECT_NEAR(s.value, scalar, s.error_bound + 1e-9);
    EXPECT_LT(s.error_bound, 1e-6);
}

TEST(DerivativeAt, Examples)
{
    EXPECT_DOUBLE_EQ(derivative_at(as_series({0.0, 1.0}), 1, 0.37), 1.0);
    EXPECT_DOUBLE_EQ(derivative_at(as_series({0.25, 0.5, 0.25}), 2, 0.0), 0.5);
    EXPECT_DOUBLE_EQ(derivative_at(as_series({0.25, 0.5, 0.25}), 1, 1.0), 1.0);
    EXPECT_THROW(derivative_at(as_series({0.25, 0.5, 0.25}), 3, 0.0), TruncationError);
}

TEST(DerivativeRatio, GeoDetClosedForm)
{
    const auto m = models::geo_det();
    const int t = 10000;
    const double psi = 100;
    // w = f(F(psi; 0)) = (psi+1)/(psi+2).
    const double one_minus_w = 1.0 / (psi + 2.0);
    const double r2 = derivative_ratio(m, t, psi, 2);
    EXPECT_NEAR(r2, 2e4 * std::pow(1.0 + 1e4 / 102.0, -3) / 0.02, 1e-6);
    EXPECT_NEAR(r2, 1.029, 1e-3);
    for (int k = 1; k <= 3; ++k) {
        double fact = 1.0;
        for (int i = 2; i <= k; ++i)
            fact *= i;
        const double expected = geo_derivative(t, k, one_minus_w) * 1e8 / (std::pow(psi, k + 1) * fact);
        EXPECT_NEAR(derivative_ratio(m, t, psi, k), expected, 1e-6 * expected) << k;
    }
    EXPECT_THROW(derivative_ratio(m, t, 1.0, 1), DomainError);
    EXPECT_THROW(derivative_ratio(m, t, psi, 0), DomainError);
}

TEST(DerivativeRatio, FirstOrderMatchesCentralDifference)
{
    const auto m = models::bin_lat();
    const int t = 300;
    const double psi = 20.0;
    const double one_minus_w = m.offspring.one_minus_pgf(survival_prob(m, psi));
    const auto jet = pgf_jet(m, t, one_minus_w, 1);
    const double h = 1e-5;
    const double w = 1.0 - one_minus_w;
    const double fd = (complement_at(m, t, w - h) - complement_at(m, t, w + h)) / (2 * h);
    EXPECT_NEAR(jet.derivative(1) / fd, 1.0, 1e-6);
}

TEST(DerivativeRatio, JetMatchesSeriesDerivatives)
{
    const auto m = models::bin_lat();
    const int t = 120;
    const double w = 0.97;
    const auto series = pgf_recursion(m, t, 4000);
    const auto jet = pgf_jet(m, t, 1.0 - w, 4);
    EXPECT_NEAR(1.0 - jet.one_minus_value, series.evaluate(w), 1e-13);
    for (int k = 1; k <= 4; ++k) {
        const double d = derivative_at(series, k, w);
        EXPECT_NEAR(jet.derivative(k) / d, 1.0, 1e-10) << k;
    }
}

TEST(FaaDiBruno, ChainRuleAndSquare)
{
    EXPECT_DOUBLE_EQ(faa_di_bruno(std::vector<double>{9.0, 3.0}, std::vector<double>{5.0}, 1), 15.0);
    // H(u) = u^2, T(z) = z + z^2 at z = 0: H'' T'^2 + H' T'' = 2.
    EXPECT_DOUBLE_EQ(faa_di_bruno(std::vector<double>{0.0, 0.0, 2.0}, std::vector<double>{1.0, 2.0}, 2),
                     2.0);
    EXPECT_THROW(faa_di_bruno(std::vector<double>{1.0}, std::vector<double>{1.0}, 1), DomainError);
    EXPECT_EQ(integer_compositions(4).size(), 5u);
    EXPECT_EQ(integer_compositions(5).size(), 7u);
}

TEST(FaaDiBruno, MatchesComposedPolynomials)
{
    std::mt19937_64 gen(2024);
    std::uniform_real_distribution<double> coef(-1.0, 1.0), point(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> h(5), t(5);
        for (auto& x : h)
            x = coef(gen);
        for (auto& x : t)
            x = coef(gen);
        const double z = point(gen);
        const auto composed = as_series(poly_compose(h, t));
        const auto hs = as_series(h), ts = as_series(t);
        const double tz = ts.evaluate(z);
        std::vector<double> hd(6, 0.0), td(5, 0.0);
        for (int m = 0; m <= 5; ++m)
            hd[static_cast<std::size_t>(m)] = m <= hs.order() ? derivative_at(hs, m, tz) : 0.0;
        for (int r = 1; r <= 5; ++r)
            td[static_cast<std::size_t>(r - 1)] = r <= ts.order() ? derivative_at(ts, r, z) : 0.0;
        for (int k = 1; k <= 5; ++k) {
            const double expected = derivative_at(composed, k, z);
            ASSERT_NEAR(faa_di_bruno(hd, td, k), expected, 1e-10 * std::max(1.0, std::abs(expected)))
                << "trial " << trial << " k " << k;
        }
    }
}

TEST(YPgf, Examples)
{
    EXPECT_NEAR(y_survival_prob(models::geo_det(), 10), 1.0 / 12, 1e-15);
    EXPECT_NEAR(y_survival_prob(models::bin_lat(), 1), 15.0 / 32, 1e-15);
    const auto y1 = y_pgf(models::bin_lat(), 1, 16);
    EXPECT_NEAR(y1[0], 17.0 / 32, 1e-15);
    const auto y0 = y_pgf(models::bin_lat(), 0, 8);
    EXPECT_NEAR(y0[0], 0.5, 1e-15);
    EXPECT_NEAR(y0[1], 0.0, 1e-15);
    EXPECT_NEAR(y0[2], 0.5, 1e-15);
    const auto yg = y_pgf(models::geo_det(), 10, 400);
    EXPECT_NEAR(1.0 - yg[0], 1.0 / 12, 1e-14);
}

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

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "bhreduce/limit_laws.hpp"

using namespace bhr;

namespace {

double quad_gamma(int j, double z)
{
    auto f = [j](double u) { return std::exp((j - 1) * std::log(u) - u - std::lgamma(j)); };
    if (j == 1)
        return -std::expm1(-z);
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, z, 8, 1e-12);
}

} // namespace

TEST(Theorem1, Examples)
{
    EXPECT_NEAR(theorem1_limit(1, 1.0), 1.0 - std::exp(-1.0), 1e-15);
    EXPECT_NEAR(theorem1_limit(1, 1.0), 0.6321206, 1e-7);
    EXPECT_NEAR(theorem1_limit(2, 1.0), 1.0 - 2.0 * std::exp(-1.0), 1e-15);
    EXPECT_NEAR(theorem1_limit(2, 1.0), 0.2642411, 1e-7);
    EXPECT_THROW(theorem1_limit(0, 1.0), DomainError);
    EXPECT_THROW(theorem1_limit(1, 0.0), DomainError);
}

TEST(Theorem1, Normalization)
{
    for (double y : {0.25, 1.0, 4.0}) {
        const auto s = theorem1_sum(y, 200);
        EXPECT_NEAR(s.sum, 1.0, 1e-10) << y;
        const auto s400 = theorem1_sum(y);
        EXPECT_NEAR(s400.sum, 1.0, 1e-10);
        EXPECT_LT(s400.tail_bound, 1e-12);
    }
}

TEST(Theorem1, RangeAndQuadrature)
{
    std::mt19937_64 gen(7);
    std::uniform_int_distribution<int> jd(1, 40);
    std::uniform_real_distribution<double> yd(0.02, 20.0);
    for (int i = 0; i < 1000; ++i) {
        const int j = jd(gen);
        const double y = yd(gen);
        const double v = theorem1_limit(j, y);
        ASSERT_GE(v, 0.0);
        ASSERT_LE(v, 1.0);
        const double q = y * quad_gamma(j, 1.0 / y);
        ASSERT_NEAR(v, q, 1e-9 * std::max(1.0, q)) << j << " " << y;
    }
}

TEST(Corollary1, ReductionAndShape)
{
    EXPECT_NEAR(corollary1_mrca(1.0), 0.6321206, 1e-7);
    EXPECT_NEAR(corollary1_mrca(1e6), 1.0, 1e-6);
    double prev = 0.0;
    for (int i = 1; i <= 100; ++i) {
        const double y = 0.1 * i;
        EXPECT_NEAR(theorem1_limit(1, y), corollary1_mrca(y), 1e-12);
        EXPECT_GT(corollary1_mrca(y), prev);
        EXPECT_LE(corollary1_mrca(y), 1.0);
        prev = corollary1_mrca(y);
    }
}

TEST(Theorem2, ExamplesAndNormalization)
{
    const double expected = 0.5 * (1.0 - std::exp(-2.0)) / (1.0 - std::exp(-1.0));
    EXPECT_NEAR(theorem2_limit(1, 0.5, 1.0), expected, 1e-15);
    EXPECT_NEAR(theorem2_limit(1, 0.5, 1.0), 0.683940, 1e-6);
    for (double x : {0.3, 0.5, 0.7})
        for (double a : {0.5, 1.0, 2.0}) {
            const auto s = theorem2_sum(x, a);
            EXPECT_NEAR(s.sum, 1.0, 1e-10) << x << " " << a;
            EXPECT_LT(s.tail_bound, 1e-10);
        }
    EXPECT_NEAR(theorem2_limit(1, 1e-6, 1.0), 1.0, 1e-5);
    EXPECT_THROW(theorem2_limit(1, 1.0, 1.0), DomainError);
    EXPECT_THROW(theorem2_limit(1, 0.5, 0.0), DomainError);
}

TEST(Corollary2, ReductionAndShape)
{
    EXPECT_NEAR(corollary2_mrca(0.5, 1.0), 0.683940, 1e-6);
    EXPECT_DOUBLE_EQ(corollary2_mrca(1.0, 1.0), 1.0);
    for (double a : {0.25, 1.0, 3.0}) {
        double prev = 0.0;
        for (int i = 1; i < 100; ++i) {
            const double x = i / 100.0;
            EXPECT_NEAR(corollary2_mrca(x, a), theorem2_limit(1, 1.0 - x, a), 1e-12);
            EXPECT_GT(corollary2_mrca(x, a), prev);
            EXPECT_LE(corollary2_mrca(x, a), 1.0);
            prev = corollary2_mrca(x, a);
        }
    }
}

TEST(Yaglom, Examples)
{
    EXPECT_DOUBLE_EQ(yaglom_laplace(1.0), 0.5);
    EXPECT_DOUBLE_EQ(yaglom_laplace(0.0), 1.0);
    EXPECT_NEAR(yaglom_cdf(std::log(2.0)), 0.5, 1e-15);
}

TEST(Intermediate, Examples)
{
    EXPECT_DOUBLE_EQ(intermediate_reduced_limit(1, 0.5), 0.5);
    EXPECT_DOUBLE_EQ(intermediate_reduced_limit(3, 0.5), 0.125);
    double s = 0.0;
    for (int j = 1; j <= 400; ++j)
        s += intermediate_reduced_limit(j, 0.7);
    EXPECT_NEAR(s, 1.0, 1e-12);
}

TEST(Predictors, Examples)
{
    const ModelConstants c{1.0, 2.0, 1.0, true};
    EXPECT_DOUBLE_EQ(survival_predictor(c, 100), 0.01);
    EXPECT_DOUBLE_EQ(event_predictor(c, 100, EventSpec::small_population(Schedule::constant(10.0))), 1e-3);
    EXPECT_NEAR(event_predictor(c, 150, EventSpec::theorem2(1.0)), 0.632120558828558 / 150, 1e-15);
    EXPECT_NEAR(local_limit_predictor(c, 10, 10), std::exp(-1.0) / 100, 1e-15);
    EXPECT_NEAR(local_limit_predictor(c, 10, 10), 0.0036788, 1e-7);
}

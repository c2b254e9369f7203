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

#include "bhreduce/models.hpp"

using namespace bhr;

TEST(Offspring, BinarySplittingMoments)
{
    const auto f = make_offspring({0.5, 0.0, 0.5});
    EXPECT_DOUBLE_EQ(f.mean(), 1.0);
    EXPECT_DOUBLE_EQ(f.variance(), 1.0);
    EXPECT_NEAR(f.second_log_moment(), 2.0 * std::log(3.0), 1e-15);
    EXPECT_EQ(f.max_count(), 2);
}

TEST(Offspring, TruncatedGeometricMoments)
{
    const auto f = make_offspring(models::geometric_pmf(60));
    EXPECT_NEAR(f.mean(), 1.0, 1e-12);
    EXPECT_NEAR(f.variance(), 2.0, 1e-12);
}

TEST(Offspring, RejectsDegenerateAndNonCritical)
{
    EXPECT_THROW(make_offspring({1.0, 0.0}), ModelError);
    EXPECT_THROW(make_offspring({0.0, 1.0}), ModelError); // mean 1, zero variance
    EXPECT_THROW(make_offspring({0.5, 0.5}), ModelError); // subcritical
    EXPECT_THROW(make_offspring({0.5, 0.0, 0.4}), ModelError); // not normalized
    EXPECT_THROW(make_offspring({}), ModelError);
    EXPECT_THROW(make_offspring({-0.1, 0.6, 0.5}), ModelError);
}

TEST(Offspring, RenormalizesTinyResidual)
{
    auto pmf = models::geometric_pmf(60); // residual 2^-61
    const auto f = make_offspring(pmf);
    double total = 0.0;
    for (double p : f.pmf())
        total += p;
    EXPECT_NEAR(total, 1.0, 1e-15);
}

TEST(Offspring, ComplementPgfIsStable)
{
    const auto f = make_offspring(models::geometric_pmf(60));
    for (double q : {1.0, 0.5, 0.1, 1e-3}) {
        EXPECT_NEAR(f.one_minus_pgf(q), 1.0 - f.pgf(1.0 - q), 1e-15);
    }
    // Closed form for the untruncated geometric: 1 - 1/(1+q) = q/(1+q).
    const double q = 1e-9;
    EXPECT_NEAR(f.one_minus_pgf(q) / (q / (1.0 + q)), 1.0, 1e-14);
}

TEST(Offspring, DerivativesMatchFiniteDifferences)
{
    const auto f = OffspringLaw::unchecked({0.25, 0.5, 0.0, 0.0, 0.125, 0.125});
    const double s = 0.7, h = 1e-5;
    EXPECT_NEAR(f.derivative(1, s), (f.pgf(s + h) - f.pgf(s - h)) / (2 * h), 1e-8);
    EXPECT_NEAR(f.derivative(2, s), (f.derivative(1, s + h) - f.derivative(1, s - h)) / (2 * h),
                1e-8);
    EXPECT_NEAR(f.derivative(1, 1.0), f.mean(), 1e-15);
}

TEST(Lifetime, LatticeMean)
{
    const auto g = make_lifetime(LatticeLifetimeSpec{{{1, 0.5}, {2, 0.5}}});
    EXPECT_TRUE(g.is_lattice());
    EXPECT_DOUBLE_EQ(g.mean(), 1.5);
    EXPECT_DOUBLE_EQ(g.third_moment(), 0.5 + 4.0);
    EXPECT_EQ(g.span(), 1);
    EXPECT_FALSE(g.is_degenerate());
    EXPECT_DOUBLE_EQ(g.survival(0.0), 1.0);
    EXPECT_DOUBLE_EQ(g.survival(1.0), 0.5);
    EXPECT_DOUBLE_EQ(g.survival(1.7), 0.5);
    EXPECT_DOUBLE_EQ(g.survival(2.0), 0.0);
    EXPECT_DOUBLE_EQ(g.cdf(-1.0), 0.0);
}

TEST(Lifetime, ExponentialAndUniform)
{
    const auto e = make_lifetime(ExponentialLifetimeSpec{1.0});
    EXPECT_FALSE(e.is_lattice());
    EXPECT_DOUBLE_EQ(e.mean(), 1.0);
    EXPECT_DOUBLE_EQ(e.third_moment(), 6.0);
    const auto e2 = make_lifetime(ExponentialLifetimeSpec{2.0});
    EXPECT_DOUBLE_EQ(e2.mean(), 0.5);
    EXPECT_DOUBLE_EQ(e2.third_moment(), 6.0 / 8.0);

    const auto u = make_lifetime(UniformLifetimeSpec{1.0, 3.0});
    EXPECT_DOUBLE_EQ(u.mean(), 2.0);
    EXPECT_DOUBLE_EQ(u.third_moment(), (81.0 - 1.0) / 8.0);
    EXPECT_DOUBLE_EQ(u.cdf(2.0), 0.5);
    EXPECT_DOUBLE_EQ(u.cdf(0.0), 0.0);
    EXPECT_DOUBLE_EQ(u.cdf(5.0), 1.0);

    EXPECT_THROW(make_lifetime(ExponentialLifetimeSpec{0.0}), ModelError);
    EXPECT_THROW(make_lifetime(UniformLifetimeSpec{2.0, 1.0}), ModelError);
}

TEST(Lifetime, LatticeHypotheses)
{
    EXPECT_THROW(make_lifetime(LatticeLifetimeSpec{{{2, 1.0}}}), ModelError);
    EXPECT_THROW(make_lifetime(LatticeLifetimeSpec{{{2, 1.0}}}, true), ModelError);
    EXPECT_THROW(make_lifetime(LatticeLifetimeSpec{{{2, 0.5}, {4, 0.5}}}), ModelError);
    EXPECT_THROW(make_lifetime(LatticeLifetimeSpec{{{1, 1.0}}}), ModelError);
    EXPECT_NO_THROW(make_lifetime(LatticeLifetimeSpec{{{1, 1.0}}}, true));
    EXPECT_THROW(make_lifetime(LatticeLifetimeSpec{{{0, 0.5}, {1, 0.5}}}), ModelError);

    // The raw factory records span and degeneracy instead of throwing.
    const auto raw = LifetimeLaw::lattice({{2, 0.5}, {4, 0.5}});
    EXPECT_EQ(raw.span(), 2);
    EXPECT_TRUE(LifetimeLaw::lattice({{3, 1.0}}).is_degenerate());
}

TEST(Constants, ReferenceModels)
{
    EXPECT_DOUBLE_EQ(models::bin_lat().constants().B, 1.0 / 3.0);
    EXPECT_NEAR(models::geo_exp().constants().B, 1.0, 1e-12);
    EXPECT_NEAR(models::geo_det().constants().B, 1.0, 1e-12);
    const auto c = models::bin_lat().constants();
    EXPECT_EQ(c.B, c.sigma2 / (2.0 * c.mu));
    EXPECT_TRUE(c.is_lattice);
    EXPECT_FALSE(models::geo_exp().constants().is_lattice);
    // Pure: repeated evaluation is bit-identical.
    EXPECT_EQ(models::geo_exp().constants(), models::geo_exp().constants());
}

TEST(Sampling, OffspringMeanWithinClt)
{
    const auto f = make_offspring({0.5, 0.0, 0.5});
    RngStream rng(12345);
    const int n = 1'000'000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        const int k = f.sample(rng);
        ASSERT_TRUE(k == 0 || k == 2);
        sum += k;
    }
    EXPECT_NEAR(sum / n, 1.0, 0.005);
    EXPECT_NEAR(sum / n, 1.0, 4.0 / std::sqrt(n));
}

TEST(Sampling, ExponentialLifetimeMean)
{
    const auto g = make_lifetime(ExponentialLifetimeSpec{1.0});
    RngStream rng(777);
    const int n = 1'000'000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = g.sample(rng);
        ASSERT_GT(x, 0.0);
        sum += x;
    }
    EXPECT_NEAR(sum / n, 1.0, 0.003);
}

TEST(Sampling, LatticeLifetimeFrequencies)
{
    const auto g = make_lifetime(LatticeLifetimeSpec{{{1, 0.25}, {3, 0.75}}});
    RngStream rng(4);
    int ones = 0, threes = 0;
    for (int i = 0; i < 200'000; ++i) {
        const double x = g.sample(rng);
        ones += x == 1.0;
        threes += x == 3.0;
    }
    EXPECT_EQ(ones + threes, 200'000);
    EXPECT_NEAR(ones / 200'000.0, 0.25, 0.005);
}

TEST(Rng, ReplicateStreamsAreDeterministicAndDistinct)
{
    auto a = RngStream::for_replicate(42, 7);
    auto b = RngStream::for_replicate(42, 7);
    auto c = RngStream::for_replicate(42, 8);
    auto d = RngStream::for_replicate(43, 7);
    EXPECT_EQ(a(), b());
    EXPECT_NE(a(), c());
    EXPECT_NE(b(), d());
}

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

#include "bhreduce/rng.hpp"
#include "bhreduce/stats.hpp"

using namespace bhr;

TEST(Wilson, Examples)
{
    EXPECT_EQ(wilson_interval(0, 100).lo, 0.0);
    EXPECT_EQ(wilson_interval(100, 100).hi, 1.0);
    const auto iv = wilson_interval(632, 1000);
    EXPECT_NEAR(iv.lo, 0.602, 5e-4);
    EXPECT_NEAR(iv.hi, 0.661, 5e-4);
    EXPECT_THROW(wilson_interval(0, 0), EmptySample);
    EXPECT_THROW(wilson_interval(5, 3), DomainError);
}

TEST(Wilson, MonotoneAndContainsEstimate)
{
    for (std::int64_t n : {1, 7, 100, 12345})
        for (std::int64_t k = 0; k <= n; k += std::max<std::int64_t>(1, n / 13)) {
            const auto narrow = wilson_interval(k, n, 0.8);
            const auto wide = wilson_interval(k, n, 0.99);
            const double p = static_cast<double>(k) / n;
            EXPECT_TRUE(narrow.contains(p));
            EXPECT_LE(wide.lo, narrow.lo);
            EXPECT_GE(wide.hi, narrow.hi);
            EXPECT_GE(wide.lo, 0.0);
            EXPECT_LE(wide.hi, 1.0);
        }
}

TEST(ComparePmf, ExactMatch)
{
    EmpiricalDist e{{1, 2, 3}, {500, 300, 200}, 1000};
    const auto r = compare_pmf(e, {0.5, 0.3, 0.2});
    EXPECT_NEAR(r.chi_square, 0.0, 1e-12);
    EXPECT_NEAR(r.tv_distance, 0.0, 1e-12);
    EXPECT_TRUE(r.pass);
    EXPECT_EQ(r.dof, 2);
}

TEST(ComparePmf, GrossMismatch)
{
    EmpiricalDist e{{0, 1}, {1000, 0}, 1000};
    const auto r = compare_pmf(e, {0.5, 0.5});
    EXPECT_FALSE(r.pass);
    EXPECT_NEAR(r.cells[0].z, std::sqrt(1000.0), 1e-9);
    EXPECT_NEAR(std::abs(r.cells[1].z), 31.6, 0.05);
    EXPECT_LT(r.chi_square_p, 1e-100);
}

TEST(ComparePmf, PoolsSparseCellsAndRelabels)
{
    EmpiricalDist e{{1, 2, 3, 4}, {600, 390, 7, 1}, 1000};
    const std::vector<double> pmf{0.6, 0.39, 0.004, 0.001};
    const auto r = compare_pmf(e, pmf);
    EXPECT_EQ(r.pooled_cells, 2);
    EXPECT_EQ(r.dof, 2);
    EmpiricalDist perm{{4, 2, 1, 3}, {1, 390, 600, 7}, 1000};
    const auto rp = compare_pmf(perm, {0.001, 0.39, 0.6, 0.004});
    EXPECT_NEAR(rp.chi_square, r.chi_square, 1e-12);
    EXPECT_NEAR(rp.tv_distance, r.tv_distance, 1e-15);
    EXPECT_EQ(rp.pass, r.pass);
    EXPECT_THROW(compare_pmf(EmpiricalDist{{1}, {0}, 0}, {1.0}), EmptySample);
}

TEST(ComparePmf, FromValues)
{
    const auto d = EmpiricalDist::from_values({1, 1, 2, 5, 0}, 1, 3);
    EXPECT_EQ(d.counts, (std::vector<std::int64_t>{2, 1, 0}));
    EXPECT_EQ(d.remainder(), 2);
}

TEST(Policy, AbsoluteFloorAndWilsonWidth)
{
    EXPECT_TRUE(within_policy(60, 100, 0.65));
    EXPECT_FALSE(within_policy(6000, 10000, 0.66));
    EXPECT_TRUE(within_policy(6000, 10000, 0.649));
}

TEST(Ks, ExponentialSamplesPass)
{
    RngStream rng(99);
    std::exponential_distribution<double> e1(1.0);
    std::vector<double> xs(100000);
    for (auto& x : xs)
        x = e1(rng);
    EXPECT_LT(ks_exponential(xs), 0.0062);
    EXPECT_NEAR(ks_critical(xs.size()), 0.0062, 1e-4);
}

TEST(Ks, DetectsWrongLaws)
{
    EXPECT_GE(ks_exponential(std::vector<double>(100, 1.0)), 1.0 - std::exp(-1.0) - 1e-12);
    RngStream rng(5);
    std::exponential_distribution<double> e2(2.0), e1(1.0);
    std::vector<double> xs(10000), half(10000), twice(10000);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        xs[i] = e2(rng);
        const double z = e1(rng);
        half[i] = 0.5 * z;
        twice[i] = 2.0 * z;
    }
    EXPECT_GT(ks_exponential(xs), 0.1);
    EXPECT_GT(ks_exponential(half), ks_critical(10000));
    EXPECT_GT(ks_exponential(twice), ks_critical(10000));
    EXPECT_THROW(ks_exponential({}), EmptySample);
}

TEST(Convergence, Sweeps)
{
    const auto decaying = convergence_sweep(
        [](double t) { return std::pair{1.0 + 1.0 / t, 1.0}; }, {128, 256, 512, 1024, 2048, 4096});
    EXPECT_TRUE(decaying.converged);
    EXPECT_NEAR(decaying.log_error_slope, -1.0, 1e-9);

    const auto flat = convergence_sweep([](double) { return std::pair{3.0, 3.0}; }, {1, 2, 4, 8});
    EXPECT_TRUE(flat.trivially_converged);
    EXPECT_TRUE(flat.converged);

    const auto stuck = convergence_sweep([](double) { return std::pair{1.2, 1.0}; }, {1, 2, 4, 8});
    EXPECT_FALSE(stuck.converged);
    EXPECT_THROW(convergence_sweep([](double) { return std::pair{1.0, 1.0}; }, {2, 1}), DomainError);
}

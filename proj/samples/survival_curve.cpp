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


// Survival curve of a critical process and the ancestry of small populations.

#include <bhreduce/limit_laws.hpp>
#include <bhreduce/series_engine.hpp>
#include <bhreduce/simulator.hpp>

#include <cstdio>

int main()
{
    using namespace bhr;
    const Model m = models::bin_lat();
    const auto c = m.constants();

    std::printf("%6s %14s %10s\n", "t", "P(Z(t)>0)", "Q*B*t");
    for (int t = 16; t <= 4096; t *= 4)
        std::printf("%6d %14.8g %10.6f\n", t, survival_prob(m, t), survival_prob(m, t) * c.B * t);

    SimConfig cfg;
    cfg.model = &m;
    cfg.t = 100;
    cfg.s_grid = {100 - std::pow(100.0, 0.6)};
    cfg.seed = 42;
    cfg.replicates = 500'000;
    cfg.event = EventSpec::small_population(Schedule::power(0.6));
    const auto s = run_conditioned(cfg);

    std::int64_t single = 0;
    for (const auto& r : s.accepted)
        single += r.obs->Z_reduced[0] == 1;
    std::printf("\n%lld of %lld replicates kept (Z(100) <= %lld)\n", static_cast<long long>(s.n_accepted),
                static_cast<long long>(s.n_total), static_cast<long long>(s.threshold));
    std::printf("one ancestor at s=%.2f: %.3f (limit %.3f)\n", cfg.s_grid[0],
                static_cast<double>(single) / static_cast<double>(s.n_accepted), theorem1_limit(1, 1.0));
}

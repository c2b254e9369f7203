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

// Conditioning events on the population at the observation time.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <string>

#include "errors.hpp"
#include "schedule.hpp"

namespace bhr {

enum class EventKind { survival, small_population, theorem2 };

struct EventSpec {
    EventKind kind = EventKind::survival;
    Schedule phi = Schedule::constant(1.0);
    double a = 1.0;

    static EventSpec survival() { return {}; }
    static EventSpec small_population(Schedule phi) { return {EventKind::small_population, phi, 1.0}; }
    static EventSpec theorem2(double a)
    {
        if (!(a > 0))
            throw DomainError("event: a must be positive");
        return {EventKind::theorem2, Schedule::constant(1.0), a};
    }

    /// Largest accepted Z(t): floor(B phi(t) + 1e-12) for H(t), ceil(B a t) - 1
    /// for the Theorem 2 event, unbounded for survival.
    std::int64_t threshold(double B, double t) const
    {
        switch (kind) {
        case EventKind::survival:
            return std::numeric_limits<std::int64_t>::max();
        case EventKind::small_population:
            return static_cast<std::int64_t>(std::floor(B * phi(t) + 1e-12));
        case EventKind::theorem2:
            return static_cast<std::int64_t>(std::ceil(B * a * t)) - 1;
        }
        return 0;
    }

    std::string describe() const
    {
        switch (kind) {
        case EventKind::survival:
            return "Z(t)>0";
        case EventKind::small_population:
            return "0<Z(t)<=B*phi(t), phi=" + phi.to_string();
        case EventKind::theorem2:
            return "0<Z(t)<B*a*t, a=" + shortest(a);
        }
        return {};
    }
};

} // namespace bhr

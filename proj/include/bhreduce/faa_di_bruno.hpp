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

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"

namespace bhr {

/// Multiplicity vectors (i_1, ..., i_k) with 1 i_1 + 2 i_2 + ... + k i_k = k.
inline std::vector<std::vector<int>> integer_compositions(int k)
{
    std::vector<std::vector<int>> out;
    if (k < 1)
        return out;
    std::vector<int> mult(static_cast<std::size_t>(k), 0);
    // Depth-first over part sizes from k down to 1.
    auto rec = [&](auto&& self, int part, int remaining) -> void {
        if (remaining == 0) {
            out.push_back(mult);
            return;
        }
        if (part == 0)
            return;
        for (int count = remaining / part; count >= 0; --count) {
            mult[static_cast<std::size_t>(part - 1)] = count;
            self(self, part - 1, remaining - count * part);
        }
        mult[static_cast<std::size_t>(part - 1)] = 0;
    };
    rec(rec, k, k);
    return out;
}

/// d^k/dz^k H(T(z)) from H^{(0..k)}(T(z)) and T^{(1..k)}(z).
inline double faa_di_bruno(std::span<const double> h_derivs, std::span<const double> t_derivs,
                           int k)
{
    if (k < 1)
        throw DomainError("faa_di_bruno: order must be >= 1");
    if (h_derivs.size() < static_cast<std::size_t>(k) + 1
        || t_derivs.size() < static_cast<std::size_t>(k))
        throw DomainError("faa_di_bruno: need H^(0..k) and T^(1..k) for k = "
                          + std::to_string(k));

    std::vector<double> scaled(static_cast<std::size_t>(k)); // T^{(r)} / r!
    double rfact = 1.0;
    for (int r = 1; r <= k; ++r) {
        rfact *= r;
        scaled[static_cast<std::size_t>(r - 1)] = t_derivs[static_cast<std::size_t>(r - 1)] / rfact;
    }
    const double kfact = rfact;

    double total = 0.0;
    for (const auto& mult : integer_compositions(k)) {
        int parts = 0;
        double coef = kfact;
        double prod = 1.0;
        for (int r = 1; r <= k; ++r) {
            const int i = mult[static_cast<std::size_t>(r - 1)];
            parts += i;
            for (int c = 2; c <= i; ++c)
                coef /= c;
            if (i > 0)
                prod *= std::pow(scaled[static_cast<std::size_t>(r - 1)], i);
        }
        total += coef * h_derivs[static_cast<std::size_t>(parts)] * prod;
    }
    return total;
}

} // namespace bhr

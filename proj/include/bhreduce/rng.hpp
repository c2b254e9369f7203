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

// Counter-based stream splitting: every replicate gets its own xoshiro256++
// generator whose state is a pure function of (master seed, replicate index).

#include <array>
#include <bit>
#include <cstdint>
#include <limits>

namespace bhr {

inline constexpr std::uint64_t splitmix64(std::uint64_t& state) noexcept
{
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Stateless 64-bit mixer (the splitmix64 finalizer).
inline constexpr std::uint64_t mix64(std::uint64_t z) noexcept
{
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// xoshiro256++ (Blackman & Vigna). Satisfies UniformRandomBitGenerator.
class RngStream {
public:
    using result_type = std::uint64_t;

    explicit constexpr RngStream(std::uint64_t seed = 0) noexcept
    {
        std::uint64_t sm = seed;
        for (auto& w : s_)
            w = splitmix64(sm);
    }

    /// Stream for replicate `index` under `master_seed`. Independent of how
    /// replicates are scheduled across workers.
    static constexpr RngStream for_replicate(std::uint64_t master_seed,
                                             std::uint64_t index) noexcept
    {
        return RngStream(mix64(master_seed ^ mix64(index + 0x632BE59BD9B4E019ULL)));
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept
    {
        return std::numeric_limits<result_type>::max();
    }

    constexpr result_type operator()() noexcept
    {
        const std::uint64_t result = std::rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = std::rotl(s_[3], 45);
        return result;
    }

    /// Uniform on [0, 1) with 53 random bits.
    constexpr double uniform() noexcept
    {
        return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
    }

    /// Uniform on the open interval (0, 1).
    constexpr double uniform_open() noexcept
    {
        return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
    }

    constexpr bool operator==(const RngStream&) const = default;

private:
    std::array<std::uint64_t, 4> s_{};
};

/// Replicate root key under `master_seed`; matches RngStream::for_replicate.
inline constexpr std::uint64_t replicate_key(std::uint64_t master_seed, std::uint64_t index) noexcept
{
    return mix64(master_seed ^ mix64(index + 0x632BE59BD9B4E019ULL));
}

/// Key of the i-th child of the node with key `parent`.
inline constexpr std::uint64_t child_key(std::uint64_t parent, std::uint64_t i) noexcept
{
    return mix64(parent ^ ((i + 1) * 0xD1B54A32D192ED03ULL));
}

/// Short counter-mode stream owned by one tree node. A node's draws depend
/// only on its key, so a genealogy is the same whatever order or horizon it
/// is explored with.
class KeyedRng {
public:
    using result_type = std::uint64_t;

    explicit constexpr KeyedRng(std::uint64_t key) noexcept : key_(key) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept
    {
        return std::numeric_limits<result_type>::max();
    }

    constexpr result_type operator()() noexcept
    {
        return mix64(key_ + (++ctr_) * 0x9E3779B97F4A7C15ULL);
    }

    constexpr double uniform() noexcept
    {
        return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
    }

    constexpr double uniform_open() noexcept
    {
        return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
    }

private:
    std::uint64_t key_;
    std::uint64_t ctr_ = 0;
};

} // namespace bhr

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

// Monte Carlo Bellman-Harris genealogies and a rejection harness for the
// small-population events.
//
// Every node draws its lifetime and offspring count from a stream keyed by
// its position in the tree, so a replicate's tree is fixed by (seed, index)
// alone. Replicates are screened with a cheap counting pass that stops as
// soon as Z(t) exceeds the event threshold; accepted ones are replayed with
// full bookkeeping.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <type_traits>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "events.hpp"
#include "models.hpp"
#include "rng.hpp"
#include "schedule.hpp"
#include "stats.hpp"

namespace bhr {

inline constexpr std::int64_t kDefaultPopulationCap = 1'000'000;

struct GenealogyNode {
    std::int64_t id = 0;
    std::int64_t parent = -1;
    double birth = 0.0;
    double death = 0.0;
    int n_children = 0;
    std::int64_t first_child = -1; // children occupy ids [first_child, first_child + n_children)

    bool alive_at(double u) const noexcept { return birth <= u && u < death; }
};

/// All particles born at times <= horizon. Roots are ids [0, n_roots).
struct Genealogy {
    std::vector<GenealogyNode> nodes;
    double horizon = 0.0;
    std::int64_t n_roots = 1;
    bool capped = false;
};

namespace detail {

inline constexpr std::uint64_t kInitialCountSalt = 0xA0761D6478BD642FULL;

inline std::vector<std::uint64_t> root_keys(const Model& model, std::uint64_t key, bool y_process)
{
    if (!y_process)
        return {key};
    KeyedRng r(mix64(key ^ kInitialCountSalt));
    const int n = model.offspring.sample(r);
    std::vector<std::uint64_t> keys(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        keys[static_cast<std::size_t>(i)] = child_key(key, static_cast<std::uint64_t>(i));
    return keys;
}

enum class Explore { completed, stopped, capped };

struct Pending {
    std::uint64_t key;
    double birth;
};

// Depth-first walk over every particle born at or before `horizon`.
// visit(birth, death) returns true to stop early.
template <class Visit>
Explore explore(const Model& model, const std::vector<std::uint64_t>& roots, double horizon,
                std::int64_t cap, std::vector<Pending>& stack, Visit&& visit)
{
    stack.clear();
    for (auto k : roots)
        stack.push_back({k, 0.0});
    std::int64_t nodes = static_cast<std::int64_t>(roots.size());
    if (nodes > cap)
        return Explore::capped;
    while (!stack.empty()) {
        const Pending p = stack.back();
        stack.pop_back();
        KeyedRng r(p.key);
        const double death = p.birth + model.lifetime.sample(r);
        if (visit(p.birth, death))
            return Explore::stopped;
        if (death > horizon)
            continue;
        const int n = model.offspring.sample(r);
        nodes += n;
        if (nodes > cap)
            return Explore::capped;
        for (int i = 0; i < n; ++i)
            stack.push_back({child_key(p.key, static_cast<std::uint64_t>(i)), death});
    }
    return Explore::completed;
}

} // namespace detail

inline Genealogy build_genealogy(const Model& model, double horizon, std::uint64_t key, bool y_process,
                                 std::int64_t cap = kDefaultPopulationCap)
{
    if (!(horizon >= 0))
        throw DomainError("simulate_tree: horizon must be >= 0");
    Genealogy g;
    g.horizon = horizon;
    const auto roots = detail::root_keys(model, key, y_process);
    g.n_roots = static_cast<std::int64_t>(roots.size());
    std::vector<std::uint64_t> keys(roots);
    for (std::size_t i = 0; i < roots.size(); ++i)
        g.nodes.push_back({static_cast<std::int64_t>(i), -1, 0.0, 0.0, 0, -1});
    std::vector<std::int64_t> stack;
    for (std::int64_t i = g.n_roots; i-- > 0;)
        stack.push_back(i);
    while (!stack.empty()) {
        const std::int64_t i = stack.back();
        stack.pop_back();
        KeyedRng r(keys[static_cast<std::size_t>(i)]);
        auto& node = g.nodes[static_cast<std::size_t>(i)];
        node.death = node.birth + model.lifetime.sample(r);
        if (node.death > horizon)
            continue;
        const int n = model.offspring.sample(r);
        if (n == 0)
            continue;
        if (static_cast<std::int64_t>(g.nodes.size()) + n > cap) {
            g.capped = true;
            break;
        }
        const std::int64_t first = static_cast<std::int64_t>(g.nodes.size());
        const double birth = node.death;
        const std::uint64_t parent_key = keys[static_cast<std::size_t>(i)];
        node.n_children = n;
        node.first_child = first;
        for (int c = 0; c < n; ++c) {
            g.nodes.push_back({first + c, i, birth, 0.0, 0, -1});
            keys.push_back(child_key(parent_key, static_cast<std::uint64_t>(c)));
        }
        for (int c = n; c-- > 0;)
            stack.push_back(first + c);
    }
    return g;
}

/// Complete genealogy of one process started by a single particle at time 0.
inline Genealogy simulate_tree(const Model& model, double t_extended, std::uint64_t key,
                               std::int64_t cap = kDefaultPopulationCap)
{
    return build_genealogy(model, t_extended, key, false, cap);
}

/// Process started by a random number of particles distributed as xi.
inline Genealogy simulate_Y(const Model& model, double t, std::uint64_t key,
                            std::int64_t cap = kDefaultPopulationCap)
{
    return build_genealogy(model, t, key, true, cap);
}

inline std::int64_t alive_count(const Genealogy& g, double u)
{
    if (u > g.horizon)
        throw DomainError("alive_count: time beyond the simulated horizon");
    return std::count_if(g.nodes.begin(), g.nodes.end(), [u](const GenealogyNode& n) { return n.alive_at(u); });
}

/// Z~(u, x): particles alive at u whose age u - birth does not exceed x.
inline std::int64_t young_count(const Genealogy& g, double u, double x)
{
    if (u > g.horizon)
        throw DomainError("young_count: time beyond the simulated horizon");
    return std::count_if(g.nodes.begin(), g.nodes.end(),
                         [u, x](const GenealogyNode& n) { return n.alive_at(u) && u - n.birth <= x; });
}

/// Z*(t, x): particles born before t that are still alive at t + x.
inline std::int64_t long_lived_count(const Genealogy& g, double t, double x)
{
    if (t > g.horizon)
        throw DomainError("long_lived_count: time beyond the simulated horizon");
    return std::count_if(g.nodes.begin(), g.nodes.end(),
                         [t, x](const GenealogyNode& n) { return n.birth < t && n.death > t + x; });
}

struct TrajectoryObservables {
    double t = 0.0;
    std::int64_t Z_t = 0;
    std::vector<double> s_grid;
    std::vector<std::int64_t> Z_reduced; // Z(s, t) per s_grid entry
    std::optional<double> beta;
    std::optional<double> d;
    std::vector<double> x_grid;
    std::vector<std::int64_t> Z_star;  // Z*(t, x) per x_grid entry
    std::vector<std::int64_t> Z_tilde; // Z~(t, x) per x_grid entry
    std::vector<double> max_residual;  // per s_grid entry, 0 when nobody is alive
    std::optional<double> extinct_by;
};

inline TrajectoryObservables observables(const Genealogy& g, double t, const std::vector<double>& s_grid,
                                         const std::vector<double>& x_grid)
{
    if (t > g.horizon)
        throw DomainError("observables: genealogy horizon is shorter than t");
    for (double s : s_grid)
        if (!(s >= 0 && s <= t))
            throw DomainError("observables: s grid must lie in [0, t]");
    for (double x : x_grid)
        if (!(x >= 0))
            throw DomainError("observables: x grid must be nonnegative");

    const auto n = g.nodes.size();
    std::vector<std::uint8_t> flagged(n, 0);
    std::vector<std::int32_t> flagged_kids(n, 0);
    TrajectoryObservables o;
    o.t = t;
    o.s_grid = s_grid;
    o.x_grid = x_grid;
    for (std::size_t i = n; i-- > 0;) {
        const auto& node = g.nodes[i];
        if (node.alive_at(t)) {
            flagged[i] = 1;
            ++o.Z_t;
        }
        if (flagged[i] && node.parent >= 0) {
            flagged[static_cast<std::size_t>(node.parent)] = 1;
            ++flagged_kids[static_cast<std::size_t>(node.parent)];
        }
    }

    for (double s : s_grid) {
        std::int64_t z = 0;
        double resid = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const auto& node = g.nodes[i];
            if (!node.alive_at(s))
                continue;
            resid = std::max(resid, node.death - s);
            z += flagged[i];
        }
        o.Z_reduced.push_back(z);
        o.max_residual.push_back(resid);
    }

    if (o.Z_t > 0) {
        std::int64_t flagged_roots = 0, v = -1;
        for (std::int64_t r = 0; r < g.n_roots; ++r)
            if (flagged[static_cast<std::size_t>(r)]) {
                ++flagged_roots;
                v = r;
            }
        if (flagged_roots > 1) {
            o.beta = 0.0;
        } else {
            // Follow the single ancestral line down to its first split.
            for (;;) {
                const auto& node = g.nodes[static_cast<std::size_t>(v)];
                if (node.alive_at(t) || node.death > t) {
                    o.beta = t;
                    break;
                }
                if (flagged_kids[static_cast<std::size_t>(v)] >= 2) {
                    o.beta = node.death;
                    break;
                }
                std::int64_t next = -1;
                for (std::int64_t c = node.first_child; c < node.first_child + node.n_children; ++c)
                    if (flagged[static_cast<std::size_t>(c)]) {
                        next = c;
                        break;
                    }
                if (next < 0)
                    throw DomainError("observables: inconsistent ancestral flags");
                v = next;
            }
        }
        o.d = t - *o.beta;
    }

    for (double x : x_grid) {
        o.Z_tilde.push_back(young_count(g, t, x));
        o.Z_star.push_back(long_lived_count(g, t, x));
    }

    if (!g.capped && alive_count(g, g.horizon) == 0) {
        double last = 0.0;
        for (const auto& node : g.nodes)
            last = std::max(last, node.death);
        o.extinct_by = last;
    }
    return o;
}

/// Exact joint law of (Z(s,t), Z(t)) by exhaustive recursion over lifetimes
/// and offspring counts.
struct JointPmf {
    std::map<std::pair<std::int64_t, std::int64_t>, double> p; // (Z(s,t), Z(t)) -> probability

    double at(std::int64_t a, std::int64_t c) const
    {
        const auto it = p.find({a, c});
        return it == p.end() ? 0.0 : it->second;
    }
    std::map<std::int64_t, double> reduced_marginal() const
    {
        std::map<std::int64_t, double> m;
        for (const auto& [k, v] : p)
            m[k.first] += v;
        return m;
    }
    std::map<std::int64_t, double> population_marginal() const
    {
        std::map<std::int64_t, double> m;
        for (const auto& [k, v] : p)
            m[k.second] += v;
        return m;
    }
};

inline constexpr double kEnumerationMaxTime = 4.0;
inline constexpr double kEnumerationMaxStates = 1024.0;

namespace detail {

template <class Key>
std::map<Key, double> convolve(const std::map<Key, double>& a, const std::map<Key, double>& b)
{
    std::map<Key, double> out;
    for (const auto& [ka, va] : a)
        for (const auto& [kb, vb] : b) {
            if constexpr (std::is_same_v<Key, std::int64_t>)
                out[ka + kb] += va * vb;
            else
                out[{ka.first + kb.first, ka.second + kb.second}] += va * vb;
        }
    return out;
}

// sum_n p_n X^{*n}
template <class Key>
std::map<Key, double> compound(std::span<const double> offspring, const std::map<Key, double>& x, Key zero)
{
    std::map<Key, double> acc, power{{zero, 1.0}};
    for (std::size_t n = 0; n < offspring.size(); ++n) {
        if (offspring[n] > 0.0)
            for (const auto& [k, v] : power)
                acc[k] += offspring[n] * v;
        if (n + 1 < offspring.size())
            power = convolve(power, x);
    }
    return acc;
}

} // namespace detail

inline JointPmf enumerate_exact(const Model& model, int t, double s)
{
    if (!model.lifetime.is_lattice())
        throw UnsupportedModel("enumerate_exact: lattice lifetime required");
    if (t < 0 || t > kEnumerationMaxTime)
        throw DomainError("enumerate_exact: t must lie in [0, 4]");
    if (!(s >= 0 && s <= t))
        throw DomainError("enumerate_exact: s must lie in [0, t]");
    const auto g = model.lifetime.lattice_pmf();
    int min_life = 1;
    while (g[static_cast<std::size_t>(min_life)] <= 0.0)
        ++min_life;
    const double generations = std::ceil(static_cast<double>(t) / min_life);
    if (std::pow(static_cast<double>(model.offspring.max_count()), generations) > kEnumerationMaxStates)
        throw DomainError("enumerate_exact: state space too large for exhaustive enumeration");

    using Pair = std::pair<std::int64_t, std::int64_t>;
    const auto off = model.offspring.pmf();
    std::map<int, std::map<std::int64_t, double>> pop_memo;
    std::map<int, std::map<Pair, double>> joint_memo;

    // Law of the number alive at t among descendants of a particle born at b <= t.
    std::function<const std::map<std::int64_t, double>&(int)> population = [&](int b) -> const auto& {
        if (auto it = pop_memo.find(b); it != pop_memo.end())
            return it->second;
        std::map<std::int64_t, double> out;
        for (std::size_t l = 1; l < g.size(); ++l) {
            if (g[l] <= 0.0)
                continue;
            const int d = b + static_cast<int>(l);
            if (d > t) {
                out[1] += g[l];
                continue;
            }
            for (const auto& [k, v] : detail::compound<std::int64_t>(off, population(d), 0))
                out[k] += g[l] * v;
        }
        return pop_memo[b] = std::move(out);
    };

    // Joint law of (flagged particles alive at s, alive at t) below a particle born at b <= s.
    std::function<const std::map<Pair, double>&(int)> joint = [&](int b) -> const auto& {
        if (auto it = joint_memo.find(b); it != joint_memo.end())
            return it->second;
        std::map<Pair, double> out;
        for (std::size_t l = 1; l < g.size(); ++l) {
            if (g[l] <= 0.0)
                continue;
            const int d = b + static_cast<int>(l);
            if (d > s) {
                if (d > t) {
                    out[{1, 1}] += g[l];
                } else {
                    for (const auto& [k, v] : detail::compound<std::int64_t>(off, population(d), 0))
                        out[{k > 0 ? 1 : 0, k}] += g[l] * v;
                }
                continue;
            }
            for (const auto& [k, v] : detail::compound<Pair>(off, joint(d), Pair{0, 0}))
                out[k] += g[l] * v;
        }
        return joint_memo[b] = std::move(out);
    };

    JointPmf res;
    res.p = joint(0);
    return res;
}

struct SimConfig {
    const Model* model = nullptr;
    double t = 0.0;
    std::vector<double> s_grid;
    std::vector<double> x_grid;
    std::uint64_t seed = 0;
    std::int64_t replicates = 0;
    std::int64_t first_replicate = 0;
    std::int64_t cap = kDefaultPopulationCap;
    EventSpec event;
    bool y_process = false;
    bool observe = true; // replay accepted replicates for genealogical observables
    int jobs = 1;
};

struct AcceptedRecord {
    std::int64_t index = 0;
    std::int64_t Z_t = 0;
    std::optional<TrajectoryObservables> obs;
};

struct ConditionedSample {
    std::int64_t n_total = 0;
    std::int64_t n_accepted = 0;
    std::int64_t n_capped = 0;
    std::int64_t threshold = 0;
    std::vector<AcceptedRecord> accepted; // ordered by replicate index

    bool empty() const noexcept { return n_accepted == 0; }
    void require_nonempty() const
    {
        if (empty())
            throw EmptySample("conditioned sample has no accepted replicates ("
                              + std::to_string(n_total) + " simulated)");
    }
    double acceptance_rate() const noexcept
    {
        return n_total > 0 ? static_cast<double>(n_accepted) / static_cast<double>(n_total) : 0.0;
    }
    Interval acceptance_ci(double confidence = 0.95) const { return wilson_interval(n_accepted, n_total, confidence); }

    std::vector<std::int64_t> population_values() const
    {
        std::vector<std::int64_t> v;
        for (const auto& r : accepted)
            v.push_back(r.Z_t);
        return v;
    }
    std::vector<std::int64_t> reduced_values(std::size_t s_index) const
    {
        std::vector<std::int64_t> v;
        for (const auto& r : accepted)
            v.push_back(r.obs.value().Z_reduced.at(s_index));
        return v;
    }
    /// Accepted replicates with d(t) <= depth.
    std::int64_t mrca_within(double depth) const
    {
        std::int64_t c = 0;
        for (const auto& r : accepted)
            c += r.obs.value().d.value() <= depth ? 1 : 0;
        return c;
    }
};

namespace detail {

inline ConditionedSample run_block(const SimConfig& cfg, std::int64_t lo, std::int64_t hi)
{
    const Model& model = *cfg.model;
    const double B = model.constants().B;
    ConditionedSample out;
    out.threshold = cfg.event.threshold(B, cfg.t);
    const double horizon = cfg.t + (cfg.x_grid.empty() ? 0.0 : *std::max_element(cfg.x_grid.begin(), cfg.x_grid.end()));
    std::vector<Pending> stack;
    for (std::int64_t i = lo; i < hi; ++i) {
        ++out.n_total;
        const std::uint64_t key = replicate_key(cfg.seed, static_cast<std::uint64_t>(i));
        const auto roots = root_keys(model, key, cfg.y_process);
        std::int64_t z = 0;
        const auto status = explore(model, roots, cfg.t, cfg.cap, stack, [&](double birth, double death) {
            if (birth <= cfg.t && cfg.t < death)
                return ++z > out.threshold;
            return false;
        });
        if (status == Explore::capped) {
            ++out.n_capped;
            continue;
        }
        if (status == Explore::stopped || z == 0)
            continue;
        AcceptedRecord rec{i, z, std::nullopt};
        if (cfg.observe) {
            const Genealogy g = build_genealogy(model, horizon, key, cfg.y_process, cfg.cap);
            if (g.capped) {
                ++out.n_capped;
                continue;
            }
            rec.obs = observables(g, cfg.t, cfg.s_grid, cfg.x_grid);
        }
        ++out.n_accepted;
        out.accepted.push_back(std::move(rec));
    }
    return out;
}

} // namespace detail

inline ConditionedSample run_conditioned(const SimConfig& cfg)
{
    if (cfg.model == nullptr)
        throw DomainError("run_conditioned: no model");
    if (!(cfg.t >= 0))
        throw DomainError("run_conditioned: t must be >= 0");
    if (cfg.replicates < 0)
        throw DomainError("run_conditioned: replicate count must be >= 0");
    for (double s : cfg.s_grid)
        if (!(s >= 0 && s <= cfg.t))
            throw DomainError("run_conditioned: s grid must lie in [0, t]");
    const int jobs = std::max(1, cfg.jobs);
    const std::int64_t lo = cfg.first_replicate, hi = cfg.first_replicate + cfg.replicates;
    std::vector<ConditionedSample> parts(static_cast<std::size_t>(jobs));
    if (jobs == 1) {
        parts[0] = detail::run_block(cfg, lo, hi);
    } else {
        std::vector<std::thread> pool;
        const std::int64_t chunk = (cfg.replicates + jobs - 1) / jobs;
        for (int w = 0; w < jobs; ++w) {
            const std::int64_t a = std::min(hi, lo + w * chunk), b = std::min(hi, a + chunk);
            pool.emplace_back([&parts, &cfg, w, a, b] { parts[static_cast<std::size_t>(w)] = detail::run_block(cfg, a, b); });
        }
        for (auto& th : pool)
            th.join();
    }
    ConditionedSample merged;
    merged.threshold = cfg.event.threshold(cfg.model->constants().B, cfg.t);
    for (auto& p : parts) {
        merged.n_total += p.n_total;
        merged.n_accepted += p.n_accepted;
        merged.n_capped += p.n_capped;
        for (auto& r : p.accepted)
            merged.accepted.push_back(std::move(r));
    }
    return merged;
}

namespace detail {

// Replicate-level indicator counts for two events evaluated on the same trees.
struct RatePair {
    std::int64_t n_total = 0;
    std::int64_t numerator = 0;
    std::int64_t denominator = 0;
    std::int64_t n_capped = 0;
};

template <class Numer, class Denom>
RatePair count_events(const Model& model, std::int64_t replicates, std::uint64_t seed, int jobs,
                      Numer&& numer, Denom&& denom)
{
    jobs = std::max(1, jobs);
    std::vector<RatePair> parts(static_cast<std::size_t>(jobs));
    auto work = [&](int w, std::int64_t a, std::int64_t b) {
        std::vector<Pending> stack;
        RatePair& out = parts[static_cast<std::size_t>(w)];
        for (std::int64_t i = a; i < b; ++i) {
            ++out.n_total;
            const std::uint64_t key = replicate_key(seed, static_cast<std::uint64_t>(i));
            const std::vector<std::uint64_t> roots{key};
            const auto nu = numer(model, roots, stack);
            const auto de = denom(model, roots, stack);
            if (!nu || !de) {
                ++out.n_capped;
                continue;
            }
            out.numerator += *nu ? 1 : 0;
            out.denominator += *de ? 1 : 0;
        }
    };
    const std::int64_t chunk = (replicates + jobs - 1) / jobs;
    std::vector<std::thread> pool;
    for (int w = 0; w < jobs; ++w) {
        const std::int64_t a = std::min(replicates, w * chunk), b = std::min(replicates, a + chunk);
        if (jobs == 1)
            work(w, a, b);
        else
            pool.emplace_back(work, w, a, b);
    }
    for (auto& th : pool)
        th.join();
    RatePair total;
    for (const auto& p : parts) {
        total.n_total += p.n_total;
        total.numerator += p.numerator;
        total.denominator += p.denominator;
        total.n_capped += p.n_capped;
    }
    return total;
}

// Whether 0 < Z(t) <= threshold; nullopt when the population cap is hit.
inline auto population_event(double t, std::int64_t threshold, std::int64_t cap)
{
    return [=](const Model& model, const std::vector<std::uint64_t>& roots,
               std::vector<Pending>& stack) -> std::optional<bool> {
        std::int64_t z = 0;
        const auto st = explore(model, roots, t, cap, stack, [&](double birth, double death) {
            return birth <= t && t < death && ++z > threshold;
        });
        if (st == Explore::capped)
            return std::nullopt;
        return st == Explore::completed && z > 0;
    };
}

// Whether Z(t) > 0; stops at the first particle alive at t.
inline auto survival_event(double t, std::int64_t cap)
{
    return [=](const Model& model, const std::vector<std::uint64_t>& roots,
               std::vector<Pending>& stack) -> std::optional<bool> {
        const auto st = explore(model, roots, t, cap, stack,
                                [&](double birth, double death) { return birth <= t && t < death; });
        if (st == Explore::capped)
            return std::nullopt;
        return st == Explore::stopped;
    };
}

// Whether some particle alive at s (born strictly before s when `strict`)
// outlives s + x.
inline auto outlives_event(double s, double x, bool strict, std::int64_t cap)
{
    return [=](const Model& model, const std::vector<std::uint64_t>& roots,
               std::vector<Pending>& stack) -> std::optional<bool> {
        const auto st = explore(model, roots, s, cap, stack, [&](double birth, double death) {
            const bool born = strict ? birth < s : birth <= s;
            return born && s < death && death - s > x;
        });
        if (st == Explore::capped)
            return std::nullopt;
        return st == Explore::stopped;
    };
}

} // namespace detail

struct EventRate {
    std::int64_t n_total = 0;
    std::int64_t n_event = 0;     // numerator event count
    std::int64_t n_condition = 0; // denominator event count
    std::int64_t n_capped = 0;
    double ratio = std::numeric_limits<double>::quiet_NaN(); // NaN when the condition never occurred
};

inline EventRate to_rate(const detail::RatePair& p)
{
    EventRate r{p.n_total, p.numerator, p.denominator, p.n_capped};
    if (p.denominator > 0)
        r.ratio = static_cast<double>(p.numerator) / static_cast<double>(p.denominator);
    return r;
}

/// Empirical P(max residual lifetime at t - y phi(t) exceeds eps phi(t)) / P(H(t)).
inline EventRate residual_event_rate(const Model& model, double t, double y, double epsilon,
                                     const Schedule& phi, std::int64_t replicates, std::uint64_t seed,
                                     int jobs = 1, std::int64_t cap = kDefaultPopulationCap)
{
    const double p = phi(t);
    if (!(y * p < t) || !(y > 0) || !(epsilon > 0))
        throw DomainError("residual_event_rate: need y > 0, eps > 0 and y phi(t) < t");
    const double B = model.constants().B;
    const auto threshold = EventSpec::small_population(phi).threshold(B, t);
    return to_rate(detail::count_events(model, replicates, seed, jobs,
                                        detail::outlives_event(t - y * p, epsilon * p, false, cap),
                                        detail::population_event(t, threshold, cap)));
}

/// Empirical P(Z*(t, x) > 0) / P(Z(t) > 0).
inline EventRate long_lived_rate(const Model& model, double t, double x, std::int64_t replicates,
                                 std::uint64_t seed, int jobs = 1, std::int64_t cap = kDefaultPopulationCap)
{
    if (!(x >= 0) || !(t >= 0))
        throw DomainError("long_lived_rate: need t >= 0 and x >= 0");
    return to_rate(detail::count_events(model, replicates, seed, jobs,
                                        detail::outlives_event(t, x, true, cap),
                                        detail::survival_event(t, cap)));
}

} // namespace bhr

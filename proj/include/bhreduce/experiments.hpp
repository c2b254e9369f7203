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

// End-to-end experiments: hypothesis checks, conditioned simulation runs
// compared against the limit laws, convergence sweeps and their CSV/JSON
// artifacts.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "errors.hpp"
#include "events.hpp"
#include "limit_laws.hpp"
#include "model_io.hpp"
#include "models.hpp"
#include "renewal.hpp"
#include "schedule.hpp"
#include "series_engine.hpp"
#include "simulator.hpp"
#include "stats.hpp"

namespace bhr {

using ojson = nlohmann::ordered_json;

enum ExitCode : int { kExitPass = 0, kExitUsage = 1, kExitStatFail = 2, kExitInsufficient = 3 };

/// A theorem's hypotheses do not hold for the requested model.
class HypothesisError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// ---------------------------------------------------------------------------
// Hypothesis checks

struct ConditionItem {
    std::string id;
    std::string description;
    bool pass = false;
    std::string detail;
};

struct ConditionReport {
    std::string model;
    bool lattice = false;
    std::vector<ConditionItem> items;
    std::optional<TailReport> tail;

    bool passes(const std::string& id) const
    {
        for (const auto& i : items)
            if (i.id == id)
                return i.pass;
        return false;
    }
    bool all_pass() const
    {
        return std::all_of(items.begin(), items.end(), [](const ConditionItem& i) { return i.pass; });
    }
    bool core_pass() const
    {
        for (const auto& i : items)
            if (i.id != "tail_condition" && !i.pass)
                return false;
        return true;
    }
    bool theorem1_ready() const { return lattice && all_pass(); }
    bool theorem2_ready() const { return !lattice && core_pass(); }
};

inline std::string fmt(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

inline ConditionReport check_conditions(const ModelSpec& spec, const Schedule& phi, const std::vector<double>& t_grid)
{
    ConditionReport rep;
    rep.model = spec.name;

    const auto& pmf = spec.offspring_pmf;
    double total = 0.0;
    bool entries_ok = !pmf.empty();
    for (double p : pmf) {
        entries_ok = entries_ok && p >= 0.0 && p <= 1.0;
        total += p;
    }
    const auto off = OffspringLaw::unchecked(pmf);
    const bool normalized = entries_ok && std::abs(total - 1.0) <= kPmfTolerance;
    const double mean = off.mean() / (total > 0 ? total : 1.0);
    rep.items.push_back({"criticality", "offspring pmf normalized with mean 1",
                         normalized && std::abs(mean - 1.0) <= kCriticalityTolerance,
                         "sum=" + fmt(total) + " mean=" + fmt(mean)});
    const double var = off.variance();
    rep.items.push_back({"finite_variance", "offspring variance in (0, inf)",
                         std::isfinite(var) && var > kCriticalityTolerance, "sigma2=" + fmt(var)});
    const double lm = off.second_log_moment();
    rep.items.push_back({"offspring_log_moment", "E xi^2 log(xi + 1) finite", std::isfinite(lm),
                         "value=" + fmt(lm)});

    std::optional<LifetimeLaw> life;
    std::string life_error;
    try {
        life = std::visit(
            [](const auto& s) -> LifetimeLaw {
                using T = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<T, LatticeLifetimeSpec>)
                    return LifetimeLaw::lattice(s.pmf);
                else if constexpr (std::is_same_v<T, ExponentialLifetimeSpec>)
                    return LifetimeLaw::exponential(s.rate);
                else
                    return LifetimeLaw::uniform(s.a, s.b);
            },
            spec.lifetime);
    } catch (const std::exception& e) {
        life_error = e.what();
    }
    rep.lattice = life && life->is_lattice();
    rep.items.push_back({"lifetime_third_moment", "E tau^3 finite", life && std::isfinite(life->third_moment()),
                         life ? "value=" + fmt(life->third_moment()) : life_error});
    if (!life) {
        rep.items.push_back({"lattice_structure", "lattice span 1 and nondegenerate, or non-lattice", false, life_error});
    } else if (life->is_lattice()) {
        const bool ok = life->span() == 1 && !life->is_degenerate();
        std::string detail = "lattice, span=" + std::to_string(life->span());
        if (life->is_degenerate())
            detail += ", degenerate (single atom)";
        rep.items.push_back({"lattice_structure", "lattice span 1 and nondegenerate, or non-lattice", ok, detail});
    } else {
        rep.items.push_back({"lattice_structure", "lattice span 1 and nondegenerate, or non-lattice", true,
                             "non-lattice"});
    }

    ConditionItem tail{"tail_condition", "t^3 (1 - G(eps phi(t))) / phi(t) -> 0 for eps in {0.1, 0.5, 1}", false, ""};
    if (!life) {
        tail.detail = life_error;
    } else {
        try {
            const LifetimeLaw& law = *life;
            rep.tail = check_tail_condition([&law](double x) { return law.survival(x); }, phi, t_grid);
            tail.pass = rep.tail->ok();
            tail.detail = "phi=" + phi.to_string() + (tail.pass ? ", decays on grid" : ", fails to decay on grid");
        } catch (const DomainError& e) {
            tail.detail = std::string("schedule rejected: ") + e.what();
        }
    }
    rep.items.push_back(tail);
    return rep;
}

inline ojson to_json(const ConditionReport& rep)
{
    ojson j;
    j["model"] = rep.model;
    j["lattice"] = rep.lattice;
    j["items"] = ojson::array();
    for (const auto& i : rep.items)
        j["items"].push_back({{"id", i.id}, {"description", i.description}, {"pass", i.pass}, {"detail", i.detail}});
    if (rep.tail) {
        ojson rows = ojson::array();
        for (const auto& r : rep.tail->rows)
            rows.push_back({{"t", r.t}, {"eps_0.1", r.value[0]}, {"eps_0.5", r.value[1]}, {"eps_1", r.value[2]}});
        j["tail_table"] = rows;
    }
    j["all_pass"] = rep.all_pass();
    j["theorem1_ready"] = rep.theorem1_ready();
    j["theorem2_ready"] = rep.theorem2_ready();
    return j;
}

inline void require_theorem1(const Model& m)
{
    if (!m.lifetime.is_lattice())
        throw HypothesisError("verify-theorem1 needs a lattice lifetime law with maximal step 1; model '" + m.name
                              + "' has a continuous (non-lattice) lifetime");
    if (m.oracle_mode || m.lifetime.is_degenerate())
        throw HypothesisError("verify-theorem1 needs a nondegenerate lattice lifetime law; model '" + m.name
                              + "' is a degenerate oracle-mode model");
}

inline void require_theorem2(const Model& m)
{
    if (m.lifetime.is_lattice())
        throw HypothesisError("verify-theorem2 needs a non-lattice lifetime distribution G; model '" + m.name
                              + "' has a lattice lifetime");
}

// ---------------------------------------------------------------------------
// Verification runs

struct CellCheck {
    std::string law;   // which limit the cell is compared with
    double parameter;  // y for the MRCA/Theorem 1 cells, x otherwise
    int j = 0;         // 0 for MRCA cells
    std::int64_t count = 0;
    std::int64_t n = 0;
    double proportion = 0.0;
    Interval wilson;
    double target = 0.0;
    double deviation = 0.0;
    bool pass = false;
};

inline CellCheck make_cell(std::string law, double parameter, int j, std::int64_t count, std::int64_t n,
                           double target, const TolerancePolicy& policy)
{
    CellCheck c{std::move(law), parameter, j, count, n, 0.0, {}, target, 0.0, false};
    c.proportion = static_cast<double>(count) / static_cast<double>(n);
    c.wilson = wilson_interval(count, n, policy.confidence);
    c.deviation = c.proportion - target;
    c.pass = within_policy(count, n, target, policy);
    return c;
}

struct RunSummary {
    std::string event;
    std::int64_t threshold = 0;
    std::int64_t n_total = 0;
    std::int64_t n_accepted = 0;
    std::int64_t n_capped = 0;
    double acceptance_rate = 0.0;
    Interval acceptance_ci;
    double predicted_rate = 0.0;
};

inline RunSummary summarize(const ConditionedSample& s, const EventSpec& ev, const ModelConstants& c, double t)
{
    RunSummary r{ev.describe(), s.threshold, s.n_total, s.n_accepted, s.n_capped, s.acceptance_rate(), {}, 0.0};
    if (s.n_total > 0)
        r.acceptance_ci = s.acceptance_ci();
    if (t > 0)
        r.predicted_rate = event_predictor(c, t, ev);
    return r;
}

inline ojson to_json(const Interval& iv) { return ojson::array({iv.lo, iv.hi}); }

inline ojson to_json(const RunSummary& r)
{
    return ojson{{"event", r.event},
                 {"threshold", r.threshold},
                 {"n_total", r.n_total},
                 {"n_accepted", r.n_accepted},
                 {"n_capped", r.n_capped},
                 {"acceptance_rate", r.acceptance_rate},
                 {"wilson_ci", to_json(r.acceptance_ci)},
                 {"predicted_rate", r.predicted_rate},
                 {"rate_over_predicted", r.predicted_rate > 0 ? r.acceptance_rate / r.predicted_rate : 0.0}};
}

struct VerifyReport {
    std::string command;
    ojson config;
    std::vector<RunSummary> runs;
    std::vector<CellCheck> cells;
    std::int64_t min_accepted = 0;
    bool insufficient = false;
    bool pass = false;
    ojson extra = ojson::object();

    int exit_code() const
    {
        if (insufficient)
            return kExitInsufficient;
        return pass ? kExitPass : kExitStatFail;
    }
};

inline ojson to_json(const VerifyReport& r)
{
    ojson j;
    j["command"] = r.command;
    j["config"] = r.config;
    j["runs"] = ojson::array();
    for (const auto& s : r.runs)
        j["runs"].push_back(to_json(s));
    j["cells"] = ojson::array();
    for (const auto& c : r.cells)
        j["cells"].push_back({{"law", c.law},
                              {"parameter", c.parameter},
                              {"j", c.j},
                              {"count", c.count},
                              {"n", c.n},
                              {"empirical", c.proportion},
                              {"wilson_ci", to_json(c.wilson)},
                              {"target", c.target},
                              {"deviation", c.deviation},
                              {"pass", c.pass}});
    for (const auto& [k, v] : r.extra.items())
        j[k] = v;
    j["min_accepted"] = r.min_accepted;
    j["insufficient_sample"] = r.insufficient;
    j["pass"] = r.pass;
    j["exit_code"] = r.exit_code();
    return j;
}

inline ojson model_echo(const Model& m)
{
    const auto c = m.constants();
    return ojson{{"name", m.name}, {"mu", c.mu}, {"sigma2", c.sigma2}, {"B", c.B}, {"lattice", c.is_lattice}};
}

/// Offset scale for the reduced-count time t - scale * y * phi(t): "1" or "B".
inline double offset_scale_value(const std::string& scale, const ModelConstants& c)
{
    if (scale == "1")
        return 1.0;
    if (scale == "B")
        return c.B;
    throw DomainError("offset scale must be '1' or 'B', got '" + scale + "'");
}

struct Theorem1Config {
    double t = 300;
    Schedule phi = Schedule::power(0.6);
    std::vector<double> y_grid{0.5, 1.0};
    int j_max = 2;
    std::int64_t replicates = 10'000'000;
    std::uint64_t seed = 1;
    int jobs = 1;
    std::string offset_scale = "1";
    std::int64_t min_accepted = 5000;
    std::int64_t cap = kDefaultPopulationCap;
    TolerancePolicy policy;
};

inline VerifyReport verify_theorem1(const Model& m, const Theorem1Config& cfg)
{
    require_theorem1(m);
    const auto c = m.constants();
    const double scale = offset_scale_value(cfg.offset_scale, c);
    const double p = cfg.phi(cfg.t);
    if (cfg.y_grid.empty() || cfg.j_max < 1)
        throw DomainError("verify-theorem1: need a nonempty y grid and j_max >= 1");
    SimConfig sim;
    sim.model = &m;
    sim.t = cfg.t;
    for (double y : cfg.y_grid) {
        const double s = cfg.t - scale * y * p;
        if (!(y > 0) || !(s >= 0))
            throw DomainError("verify-theorem1: need y > 0 and scale * y * phi(t) <= t");
        sim.s_grid.push_back(s);
    }
    sim.seed = cfg.seed;
    sim.replicates = cfg.replicates;
    sim.cap = cfg.cap;
    sim.jobs = cfg.jobs;
    sim.event = EventSpec::small_population(cfg.phi);
    const auto sample = run_conditioned(sim);

    VerifyReport rep;
    rep.command = "verify-theorem1";
    rep.config = {{"model", model_echo(m)},
                  {"t", cfg.t},
                  {"phi", cfg.phi.to_string()},
                  {"phi_t", p},
                  {"threshold", sample.threshold},
                  {"offset_scale", cfg.offset_scale},
                  {"y_grid", cfg.y_grid},
                  {"s_grid", sim.s_grid},
                  {"j_max", cfg.j_max},
                  {"replicates", cfg.replicates},
                  {"seed", cfg.seed},
                  {"population_cap", cfg.cap}};
    rep.runs.push_back(summarize(sample, sim.event, c, cfg.t));
    rep.min_accepted = cfg.min_accepted;
    rep.insufficient = sample.n_accepted < cfg.min_accepted;
    if (sample.empty()) {
        rep.insufficient = true;
        return rep;
    }
    const std::int64_t n = sample.n_accepted;
    for (std::size_t yi = 0; yi < cfg.y_grid.size(); ++yi) {
        const double y = cfg.y_grid[yi];
        const auto vals = sample.reduced_values(yi);
        for (int j = 1; j <= cfg.j_max; ++j) {
            const auto cnt = std::count(vals.begin(), vals.end(), static_cast<std::int64_t>(j));
            rep.cells.push_back(make_cell("theorem1", y, j, cnt, n, theorem1_limit(j, y), cfg.policy));
        }
        rep.cells.push_back(
            make_cell("corollary1", y, 0, sample.mrca_within(scale * y * p), n, corollary1_mrca(y), cfg.policy));
    }
    rep.pass = std::all_of(rep.cells.begin(), rep.cells.end(), [](const CellCheck& c) { return c.pass; });
    return rep;
}

struct Theorem2Config {
    double t = 150;
    double a = 1.0;
    std::vector<double> x_grid{0.5};
    int j_max = 3;
    std::int64_t replicates = 5'000'000;
    std::uint64_t seed = 1;
    int jobs = 1;
    std::int64_t min_accepted = 2000;
    bool intermediate = true;
    std::int64_t intermediate_replicates = 1'000'000;
    std::int64_t cap = kDefaultPopulationCap;
    TolerancePolicy policy;
};

inline VerifyReport verify_theorem2(const Model& m, const Theorem2Config& cfg)
{
    require_theorem2(m);
    const auto c = m.constants();
    if (cfg.x_grid.empty() || cfg.j_max < 1)
        throw DomainError("verify-theorem2: need a nonempty x grid and j_max >= 1");
    for (double x : cfg.x_grid)
        if (!(x > 0 && x < 1))
            throw DomainError("verify-theorem2: x must lie in (0, 1)");
    SimConfig sim;
    sim.model = &m;
    sim.t = cfg.t;
    // Reduced counts at x t for Theorem 2 and at (1 - x) t for the MRCA depth.
    for (double x : cfg.x_grid)
        sim.s_grid.push_back(x * cfg.t);
    sim.seed = cfg.seed;
    sim.replicates = cfg.replicates;
    sim.cap = cfg.cap;
    sim.jobs = cfg.jobs;
    sim.event = EventSpec::theorem2(cfg.a);
    const auto sample = run_conditioned(sim);

    VerifyReport rep;
    rep.command = "verify-theorem2";
    rep.config = {{"model", model_echo(m)},
                  {"t", cfg.t},
                  {"a", cfg.a},
                  {"threshold", sample.threshold},
                  {"x_grid", cfg.x_grid},
                  {"j_max", cfg.j_max},
                  {"replicates", cfg.replicates},
                  {"seed", cfg.seed},
                  {"intermediate", cfg.intermediate},
                  {"intermediate_replicates", cfg.intermediate ? cfg.intermediate_replicates : 0},
                  {"population_cap", cfg.cap}};
    rep.runs.push_back(summarize(sample, sim.event, c, cfg.t));
    rep.min_accepted = cfg.min_accepted;
    rep.insufficient = sample.n_accepted < cfg.min_accepted;
    if (!sample.empty()) {
        const std::int64_t n = sample.n_accepted;
        for (std::size_t xi = 0; xi < cfg.x_grid.size(); ++xi) {
            const double x = cfg.x_grid[xi];
            const auto vals = sample.reduced_values(xi);
            for (int j = 1; j <= cfg.j_max; ++j) {
                const auto cnt = std::count(vals.begin(), vals.end(), static_cast<std::int64_t>(j));
                rep.cells.push_back(make_cell("theorem2", x, j, cnt, n, theorem2_limit(j, x, cfg.a), cfg.policy));
            }
            rep.cells.push_back(make_cell("corollary2", x, 0, sample.mrca_within(x * cfg.t), n,
                                          corollary2_mrca(x, cfg.a), cfg.policy));
        }
    } else {
        rep.insufficient = true;
    }

    if (cfg.intermediate) {
        SimConfig surv = sim;
        surv.replicates = cfg.intermediate_replicates;
        surv.event = EventSpec::survival();
        const auto ss = run_conditioned(surv);
        rep.runs.push_back(summarize(ss, surv.event, c, cfg.t));
        if (ss.empty()) {
            rep.insufficient = true;
        } else {
            for (std::size_t xi = 0; xi < cfg.x_grid.size(); ++xi) {
                const double x = cfg.x_grid[xi];
                const auto vals = ss.reduced_values(xi);
                for (int j = 1; j <= cfg.j_max; ++j) {
                    const auto cnt = std::count(vals.begin(), vals.end(), static_cast<std::int64_t>(j));
                    rep.cells.push_back(make_cell("intermediate", x, j, cnt, ss.n_accepted,
                                                  intermediate_reduced_limit(j, x), cfg.policy));
                }
            }
        }
    }
    rep.pass = !rep.cells.empty()
               && std::all_of(rep.cells.begin(), rep.cells.end(), [](const CellCheck& c) { return c.pass; });
    return rep;
}

struct YaglomConfig {
    double t = 500;
    std::int64_t replicates = 2'000'000;
    std::uint64_t seed = 1;
    int jobs = 1;
    bool y_process = false;
    double ks_max = 0.05;
    std::int64_t min_accepted = 10000;
    std::int64_t cap = kDefaultPopulationCap;
};

inline VerifyReport verify_yaglom(const Model& m, const YaglomConfig& cfg)
{
    const auto c = m.constants();
    SimConfig sim;
    sim.model = &m;
    sim.t = cfg.t;
    sim.seed = cfg.seed;
    sim.replicates = cfg.replicates;
    sim.cap = cfg.cap;
    sim.jobs = cfg.jobs;
    sim.y_process = cfg.y_process;
    sim.observe = false;
    sim.event = EventSpec::survival();
    const auto sample = run_conditioned(sim);

    VerifyReport rep;
    rep.command = "verify-yaglom";
    rep.config = {{"model", model_echo(m)},     {"t", cfg.t},
                  {"process", cfg.y_process ? "Y" : "Z"},
                  {"replicates", cfg.replicates}, {"seed", cfg.seed},
                  {"ks_max", cfg.ks_max},         {"population_cap", cfg.cap}};
    RunSummary run = summarize(sample, sim.event, c, cfg.t);
    run.event = cfg.y_process ? "Y(t)>0" : "Z(t)>0";
    rep.runs.push_back(run);
    rep.min_accepted = cfg.min_accepted;
    rep.insufficient = sample.n_accepted < cfg.min_accepted;
    if (sample.empty()) {
        rep.insufficient = true;
        return rep;
    }
    std::vector<double> scaled;
    scaled.reserve(sample.accepted.size());
    for (const auto& r : sample.accepted)
        scaled.push_back(static_cast<double>(r.Z_t) / (c.B * cfg.t));
    const double ks = ks_exponential(scaled);
    const double mean = std::accumulate(scaled.begin(), scaled.end(), 0.0) / static_cast<double>(scaled.size());
    rep.extra["ks_statistic"] = ks;
    rep.extra["ks_critical_0.999"] = ks_critical(scaled.size());
    rep.extra["scaled_mean"] = mean;
    rep.pass = ks < cfg.ks_max;
    return rep;
}

// ---------------------------------------------------------------------------
// Convergence sweeps

struct SweepConfig {
    std::string quantity = "survival";
    std::vector<double> t_grid;
    double psi_exponent = 0.5; // difference-ratio: psi = t^e
    double jet_exponent = 0.4; // derivative-ratio: psi = t^e
    int k = 1;
    double C = 1.0;
    EventSpec event;
    std::int64_t replicates = 1'000'000;
    std::uint64_t seed = 1;
    int jobs = 1;
};

inline const std::vector<std::string>& sweep_quantities()
{
    static const std::vector<std::string> q{"survival",         "local-limit", "difference-ratio",
                                            "derivative-ratio", "renewal",     "expected-young",
                                            "acceptance"};
    return q;
}

inline ConvergenceTable run_sweep(const Model& m, const SweepConfig& cfg)
{
    const auto c = m.constants();
    auto as_int = [](double t) {
        if (t != std::floor(t) || t < 1)
            throw DomainError("sweep: exact quantities need positive integer t");
        return static_cast<int>(t);
    };
    std::function<std::pair<double, double>(double)> f;
    const auto& q = cfg.quantity;
    if (q == "survival") {
        f = [&](double t) { return std::pair{survival_prob(m, as_int(t)), survival_predictor(c, t)}; };
    } else if (q == "local-limit") {
        f = [&](double t) {
            const auto p = local_limit_error(m, as_int(t), cfg.C);
            return std::pair{1.0 + c.B * c.B * p.sup_error, 1.0};
        };
    } else if (q == "difference-ratio") {
        f = [&](double t) { return std::pair{difference_ratio(m, as_int(t), std::pow(t, cfg.psi_exponent)), 1.0}; };
    } else if (q == "derivative-ratio") {
        f = [&](double t) {
            return std::pair{derivative_ratio(m, as_int(t), std::pow(t, cfg.jet_exponent), cfg.k), 1.0};
        };
    } else if (q == "renewal") {
        f = [&](double t) {
            const auto tab = renewal_function(m.lifetime, as_int(t));
            return std::pair{tab.U.back() * c.mu / t, 1.0};
        };
    } else if (q == "expected-young") {
        f = [&](double t) { return std::pair{expected_young(m, as_int(t), t), 1.0}; };
    } else if (q == "acceptance") {
        f = [&](double t) {
            SimConfig sim;
            sim.model = &m;
            sim.t = t;
            sim.seed = cfg.seed;
            sim.replicates = cfg.replicates;
            sim.jobs = cfg.jobs;
            sim.observe = false;
            sim.event = cfg.event;
            const auto s = run_conditioned(sim);
            return std::pair{s.acceptance_rate(), event_predictor(c, t, cfg.event)};
        };
    } else {
        throw DomainError("sweep: unknown quantity '" + q + "'");
    }
    return convergence_sweep(f, cfg.t_grid);
}

// ---------------------------------------------------------------------------
// Artifact output

/// Writes `text` to `path`, creating parent directories; "-" or empty means stdout.
inline void emit_text(const std::string& path, const std::string& text)
{
    if (path.empty() || path == "-") {
        std::cout << text;
        std::cout.flush();
        return;
    }
    const std::filesystem::path p(path);
    if (p.has_parent_path())
        std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write " + path);
    out << text;
}

inline std::string dump(const ojson& j) { return j.dump(2) + "\n"; }

inline std::string csv_number(double v) { return shortest(v); }

/// Columns t,quantity,value,predicted,ratio.
inline std::string sweep_csv(const std::string& quantity, const ConvergenceTable& tab)
{
    std::string out = "t,quantity,value,predicted,ratio\n";
    for (const auto& r : tab.rows)
        out += csv_number(r.t) + "," + quantity + "," + csv_number(r.quantity) + "," + csv_number(r.predicted) + ","
               + csv_number(r.ratio) + "\n";
    return out;
}

inline ojson to_json(const ConvergenceTable& tab, const std::string& quantity)
{
    ojson rows = ojson::array();
    for (const auto& r : tab.rows)
        rows.push_back({{"t", r.t}, {"value", r.quantity}, {"predicted", r.predicted}, {"ratio", r.ratio},
                        {"error", r.error}});
    return {{"quantity", quantity},
            {"rows", rows},
            {"log_error_slope", tab.log_error_slope},
            {"trivially_converged", tab.trivially_converged},
            {"converged", tab.converged}};
}

/// Columns t,k,prob,tail_mass.
inline std::string series_csv(int t, const TruncatedSeries& s, int k_max)
{
    std::string out = "t,k,prob,tail_mass\n";
    const int last = std::min(k_max, s.order());
    for (int k = 0; k <= last; ++k)
        out += std::to_string(t) + "," + std::to_string(k) + "," + csv_number(s[k]) + "," + csv_number(s.tail_mass)
               + "\n";
    return out;
}

/// Columns replicate,Z_t,d_t,Z_s_t@<s> for each s.
inline std::string accepted_csv(const ConditionedSample& s, const std::vector<double>& s_grid)
{
    std::string out = "replicate,Z_t,d_t";
    for (double v : s_grid)
        out += ",Z_s_t@" + csv_number(v);
    out += "\n";
    for (const auto& r : s.accepted) {
        out += std::to_string(r.index) + "," + std::to_string(r.Z_t) + ",";
        if (r.obs && r.obs->d)
            out += csv_number(*r.obs->d);
        for (std::size_t i = 0; i < s_grid.size(); ++i)
            out += "," + (r.obs ? std::to_string(r.obs->Z_reduced[i]) : std::string());
        out += "\n";
    }
    return out;
}

inline ojson histogram_json(const std::vector<std::int64_t>& values)
{
    std::map<std::int64_t, std::int64_t> h;
    for (auto v : values)
        ++h[v];
    ojson arr = ojson::array();
    for (const auto& [v, c] : h)
        arr.push_back(ojson::array({v, c}));
    return arr;
}

inline ojson simulation_json(const Model& m, const SimConfig& cfg, const ConditionedSample& s)
{
    const auto c = m.constants();
    ojson j;
    j["command"] = "simulate";
    j["config"] = {{"model", model_echo(m)},
                   {"t", cfg.t},
                   {"event", cfg.event.describe()},
                   {"threshold", s.threshold},
                   {"process", cfg.y_process ? "Y" : "Z"},
                   {"s_grid", cfg.s_grid},
                   {"x_grid", cfg.x_grid},
                   {"replicates", cfg.replicates},
                   {"seed", cfg.seed},
                   {"population_cap", cfg.cap}};
    j["summary"] = to_json(summarize(s, cfg.event, c, cfg.t));
    j["histograms"]["Z_t"] = histogram_json(s.population_values());
    if (cfg.observe) {
        j["histograms"]["Z_reduced"] = ojson::array();
        for (std::size_t i = 0; i < cfg.s_grid.size(); ++i)
            j["histograms"]["Z_reduced"].push_back({{"s", cfg.s_grid[i]}, {"counts", histogram_json(s.reduced_values(i))}});
        j["histograms"]["Z_star_positive"] = ojson::array();
        for (std::size_t i = 0; i < cfg.x_grid.size(); ++i) {
            std::int64_t pos = 0;
            for (const auto& r : s.accepted)
                pos += r.obs->Z_star[i] > 0 ? 1 : 0;
            j["histograms"]["Z_star_positive"].push_back({{"x", cfg.x_grid[i]}, {"count", pos}});
        }
        double dsum = 0.0;
        for (const auto& r : s.accepted)
            dsum += r.obs->d.value_or(0.0);
        j["d_t_mean"] = s.empty() ? 0.0 : dsum / static_cast<double>(s.n_accepted);
    }
    return j;
}

} // namespace bhr

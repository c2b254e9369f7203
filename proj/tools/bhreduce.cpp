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


// bhreduce: command-line runner for exact laws, simulations and limit checks
// of critical Bellman-Harris processes.

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bhreduce/experiments.hpp"

using namespace bhr;

namespace {

struct Common {
    std::string model_path;
    std::string json_path;
    std::string csv_path;
    std::optional<std::uint64_t> seed;
    int jobs = 1;
};

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag)
{
    if (flag)
        return *flag;
    if (const char* env = std::getenv("BH_SEED")) {
        try {
            std::size_t used = 0;
            const auto v = std::stoull(env, &used);
            if (used == std::string(env).size())
                return v;
        } catch (const std::exception&) {
        }
        throw DomainError(std::string("BH_SEED is not an unsigned integer: '") + env + "'");
    }
    return 1;
}

void add_model(CLI::App* cmd, Common& c)
{
    cmd->add_option("--model", c.model_path, "model JSON file")->required()->check(CLI::ExistingFile);
}

void add_outputs(CLI::App* cmd, Common& c)
{
    cmd->add_option("--json", c.json_path, "JSON summary path (default: stdout)");
    cmd->add_option("--csv", c.csv_path, "CSV output path");
}

void add_sampling(CLI::App* cmd, Common& c)
{
    cmd->add_option("--seed", c.seed, "master seed (falls back to BH_SEED, then 1)");
    cmd->add_option("--jobs", c.jobs, "worker threads")->check(CLI::PositiveNumber);
}

Schedule parse_schedule(const std::string& s) { return Schedule::parse(s); }

int finish(const VerifyReport& rep, const Common& c)
{
    emit_text(c.json_path, dump(to_json(rep)));
    if (!c.csv_path.empty()) {
        std::string csv = "law,parameter,j,count,n,empirical,wilson_lo,wilson_hi,target,pass\n";
        for (const auto& cell : rep.cells)
            csv += cell.law + "," + csv_number(cell.parameter) + "," + std::to_string(cell.j) + ","
                   + std::to_string(cell.count) + "," + std::to_string(cell.n) + "," + csv_number(cell.proportion)
                   + "," + csv_number(cell.wilson.lo) + "," + csv_number(cell.wilson.hi) + ","
                   + csv_number(cell.target) + "," + (cell.pass ? "1" : "0") + "\n";
        emit_text(c.csv_path, csv);
    }
    return rep.exit_code();
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Exact laws, simulation and limit-theorem checks for critical Bellman-Harris processes"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "bhreduce 1.0.0");

    Common c;

    // exact
    auto* exact = app.add_subcommand("exact", "exact law of Z(t) for lattice models");
    add_model(exact, c);
    add_outputs(exact, c);
    int exact_t = 0, exact_order = -1, exact_kmax = -1;
    bool exact_y = false;
    exact->add_option("--t", exact_t, "integer time")->required()->check(CLI::NonNegativeNumber);
    exact->add_option("--order", exact_order, "truncation order K (default max(ceil(8Bt), 256))");
    exact->add_option("--k-max", exact_kmax, "largest k written (default K)");
    exact->add_flag("--y-process", exact_y, "law of Y(t) instead of Z(t)");

    // simulate
    auto* simulate = app.add_subcommand("simulate", "conditioned Monte Carlo genealogies");
    add_model(simulate, c);
    add_outputs(simulate, c);
    add_sampling(simulate, c);
    double sim_t = 0, sim_a = 1.0;
    std::int64_t sim_reps = 0, sim_cap = kDefaultPopulationCap;
    std::string sim_event = "survival", sim_phi = "pow:0.6";
    std::vector<double> sim_s, sim_x;
    bool sim_y = false;
    simulate->add_option("--t", sim_t, "observation time")->required()->check(CLI::NonNegativeNumber);
    simulate->add_option("--replicates", sim_reps, "number of replicates")->required()->check(CLI::NonNegativeNumber);
    simulate->add_option("--event", sim_event, "survival | H | theorem2")
        ->check(CLI::IsMember({"survival", "H", "theorem2"}));
    simulate->add_option("--phi", sim_phi, "schedule for H: pow:g | lin:a | const:c");
    simulate->add_option("--a", sim_a, "level a of the theorem2 event");
    simulate->add_option("--s-grid", sim_s, "times s for Z(s,t)")->delimiter(',');
    simulate->add_option("--x-grid", sim_x, "offsets x for Z*(t,x) and Z~(t,x)")->delimiter(',');
    simulate->add_option("--cap", sim_cap, "population cap per replicate");
    simulate->add_flag("--y-process", sim_y, "start from a random number of particles distributed as xi");

    // limits
    auto* limits = app.add_subcommand("limits", "evaluate limit laws");
    add_outputs(limits, c);
    std::string lim_theorem;
    int lim_j = 1, lim_jmax = 0;
    double lim_y = 1.0, lim_x = 0.5, lim_a = 1.0, lim_lambda = 0.0, lim_z = 1.0;
    std::vector<double> lim_grid;
    limits->add_option("--theorem", lim_theorem, "1 | 2 | c1 | c2 | yaglom | intermediate")
        ->required()
        ->check(CLI::IsMember({"1", "2", "c1", "c2", "yaglom", "intermediate"}));
    limits->add_option("--j", lim_j, "reduced count j")->check(CLI::PositiveNumber);
    limits->add_option("--j-max", lim_jmax, "emit j = 1..j_max over the grid");
    limits->add_option("--y", lim_y, "depth parameter y");
    limits->add_option("--x", lim_x, "fraction x");
    limits->add_option("--a", lim_a, "level a");
    limits->add_option("--lambda", lim_lambda, "Laplace argument");
    limits->add_option("--z", lim_z, "cdf argument");
    limits->add_option("--grid", lim_grid, "parameter grid (y, x, z or lambda)")->delimiter(',');

    // verify-theorem1
    auto* v1 = app.add_subcommand("verify-theorem1", "reduced counts and MRCA depth under H(t), lattice lifetimes");
    add_model(v1, c);
    add_outputs(v1, c);
    add_sampling(v1, c);
    Theorem1Config t1;
    std::string t1_phi = "pow:0.6";
    v1->add_option("--t", t1.t, "observation time")->check(CLI::PositiveNumber);
    v1->add_option("--phi", t1_phi, "schedule phi");
    v1->add_option("--y-grid", t1.y_grid, "depths y")->delimiter(',');
    v1->add_option("--j-max", t1.j_max, "largest j compared")->check(CLI::PositiveNumber);
    v1->add_option("--replicates", t1.replicates, "number of replicates");
    v1->add_option("--min-accepted", t1.min_accepted, "accepted replicates required");
    v1->add_option("--offset-scale", t1.offset_scale, "time offset t - scale*y*phi(t): 1 or B")
        ->check(CLI::IsMember({"1", "B"}));
    v1->add_option("--cap", t1.cap, "population cap per replicate");

    // verify-theorem2
    auto* v2 = app.add_subcommand("verify-theorem2", "reduced counts under 0<Z(t)<Bat, non-lattice lifetimes");
    add_model(v2, c);
    add_outputs(v2, c);
    add_sampling(v2, c);
    Theorem2Config t2;
    bool t2_no_intermediate = false;
    v2->add_option("--t", t2.t, "observation time")->check(CLI::PositiveNumber);
    v2->add_option("--a", t2.a, "level a")->check(CLI::PositiveNumber);
    v2->add_option("--x-grid", t2.x_grid, "fractions x")->delimiter(',');
    v2->add_option("--j-max", t2.j_max, "largest j compared")->check(CLI::PositiveNumber);
    v2->add_option("--replicates", t2.replicates, "number of replicates");
    v2->add_option("--min-accepted", t2.min_accepted, "accepted replicates required");
    v2->add_option("--intermediate-replicates", t2.intermediate_replicates, "replicates for the survival-conditioned run");
    v2->add_flag("--no-intermediate", t2_no_intermediate, "skip the survival-conditioned comparison");
    v2->add_option("--cap", t2.cap, "population cap per replicate");

    // verify-yaglom
    auto* vy = app.add_subcommand("verify-yaglom", "Exp(1) limit of Z(t)/(Bt) or Y(t)/(Bt) given survival");
    add_model(vy, c);
    add_outputs(vy, c);
    add_sampling(vy, c);
    YaglomConfig ty;
    vy->add_option("--t", ty.t, "observation time")->check(CLI::PositiveNumber);
    vy->add_option("--replicates", ty.replicates, "number of replicates");
    vy->add_option("--min-accepted", ty.min_accepted, "accepted replicates required");
    vy->add_option("--ks-max", ty.ks_max, "largest KS statistic that passes");
    vy->add_flag("--y-process", ty.y_process, "use Y(t)");
    vy->add_option("--cap", ty.cap, "population cap per replicate");

    // check-conditions
    auto* cc = app.add_subcommand("check-conditions", "itemized hypothesis check");
    add_model(cc, c);
    add_outputs(cc, c);
    std::string cc_phi = "pow:0.6";
    std::vector<double> cc_grid{100, 1000, 10000, 100000, 1000000};
    cc->add_option("--phi", cc_phi, "schedule phi");
    cc->add_option("--t-grid", cc_grid, "grid for the tail condition")->delimiter(',');

    // sweep
    auto* sw = app.add_subcommand("sweep", "convergence of a finite-t quantity to its asymptotic prediction");
    add_model(sw, c);
    add_outputs(sw, c);
    add_sampling(sw, c);
    SweepConfig sc;
    std::string sw_event = "H", sw_phi = "pow:0.6";
    double sw_a = 1.0;
    sw->add_option("--quantity", sc.quantity, "quantity to sweep")->check(CLI::IsMember(sweep_quantities()));
    sw->add_option("--t-grid", sc.t_grid, "increasing times")->required()->delimiter(',');
    sw->add_option("--k", sc.k, "derivative order for derivative-ratio")->check(CLI::PositiveNumber);
    sw->add_option("--C", sc.C, "range constant for local-limit");
    sw->add_option("--psi-exponent", sc.psi_exponent, "psi = t^e for difference-ratio");
    sw->add_option("--jet-exponent", sc.jet_exponent, "psi = t^e for derivative-ratio");
    sw->add_option("--event", sw_event, "event for acceptance: survival | H | theorem2")
        ->check(CLI::IsMember({"survival", "H", "theorem2"}));
    sw->add_option("--phi", sw_phi, "schedule for H");
    sw->add_option("--a", sw_a, "level a of the theorem2 event");
    sw->add_option("--replicates", sc.replicates, "replicates per grid point (acceptance)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitPass : kExitUsage;
    }

    auto make_event = [](const std::string& kind, const std::string& phi, double a) {
        if (kind == "H")
            return EventSpec::small_population(Schedule::parse(phi));
        if (kind == "theorem2")
            return EventSpec::theorem2(a);
        return EventSpec::survival();
    };

    try {
        if (*exact) {
            const Model m = load_model(c.model_path);
            const auto s = exact_y ? y_pgf(m, exact_t, exact_order) : pgf_recursion(m, exact_t, exact_order);
            const int kmax = exact_kmax < 0 ? s.order() : exact_kmax;
            emit_text(c.csv_path, series_csv(exact_t, s, kmax));
            if (!c.json_path.empty()) {
                const auto cst = m.constants();
                const double q = exact_y ? y_survival_prob(m, exact_t) : survival_prob(m, exact_t);
                ojson j{{"command", "exact"},
                        {"config", {{"model", model_echo(m)}, {"t", exact_t}, {"order", s.order()},
                                    {"process", exact_y ? "Y" : "Z"}}},
                        {"survival", q},
                        {"survival_predicted", exact_t > 0 ? survival_predictor(cst, exact_t) : 1.0},
                        {"tail_mass", s.tail_mass}};
                emit_text(c.json_path, dump(j));
            }
            return kExitPass;
        }
        if (*simulate) {
            const Model m = load_model(c.model_path);
            SimConfig cfg;
            cfg.model = &m;
            cfg.t = sim_t;
            cfg.s_grid = sim_s;
            cfg.x_grid = sim_x;
            cfg.seed = resolve_seed(c.seed);
            cfg.replicates = sim_reps;
            cfg.cap = sim_cap;
            cfg.event = make_event(sim_event, sim_phi, sim_a);
            cfg.y_process = sim_y;
            cfg.jobs = c.jobs;
            const auto sample = run_conditioned(cfg);
            emit_text(c.json_path, dump(simulation_json(m, cfg, sample)));
            if (!c.csv_path.empty())
                emit_text(c.csv_path, accepted_csv(sample, cfg.s_grid));
            return sample.empty() ? kExitInsufficient : kExitPass;
        }
        if (*limits) {
            auto value = [&](int j, double p) {
                if (lim_theorem == "1")
                    return theorem1_limit(j, p);
                if (lim_theorem == "2")
                    return theorem2_limit(j, p, lim_a);
                if (lim_theorem == "c1")
                    return corollary1_mrca(p);
                if (lim_theorem == "c2")
                    return corollary2_mrca(p, lim_a);
                if (lim_theorem == "intermediate")
                    return intermediate_reduced_limit(j, p);
                return p;
            };
            const bool uses_j = lim_theorem == "1" || lim_theorem == "2" || lim_theorem == "intermediate";
            const double point = lim_theorem == "1" || lim_theorem == "c1" ? lim_y
                                 : lim_theorem == "yaglom"               ? lim_z
                                                                         : lim_x;
            ojson j{{"command", "limits"}, {"theorem", lim_theorem}};
            if (lim_theorem == "yaglom") {
                j["lambda"] = lim_lambda;
                j["laplace"] = yaglom_laplace(lim_lambda);
                j["z"] = lim_z;
                j["cdf"] = yaglom_cdf(lim_z);
            } else {
                j["j"] = uses_j ? lim_j : 0;
                j["parameter"] = point;
                if (lim_theorem == "2" || lim_theorem == "c2")
                    j["a"] = lim_a;
                j["value"] = value(lim_j, point);
            }
            emit_text(c.json_path, dump(j));
            if (!c.csv_path.empty()) {
                const auto grid = lim_grid.empty() ? std::vector<double>{point} : lim_grid;
                const int jmax = uses_j ? std::max(lim_jmax, lim_j) : 0;
                std::string csv = lim_theorem == "yaglom" ? "z,cdf,laplace\n" : "theorem,j,parameter,value\n";
                for (double p : grid) {
                    if (lim_theorem == "yaglom") {
                        csv += csv_number(p) + "," + csv_number(yaglom_cdf(p)) + "," + csv_number(yaglom_laplace(p)) + "\n";
                        continue;
                    }
                    for (int jj = uses_j ? (lim_jmax > 0 ? 1 : lim_j) : 0; jj <= jmax; ++jj)
                        csv += lim_theorem + "," + std::to_string(jj) + "," + csv_number(p) + ","
                               + csv_number(value(std::max(jj, 1), p)) + "\n";
                }
                emit_text(c.csv_path, csv);
            }
            return kExitPass;
        }
        if (*v1) {
            const Model m = load_model(c.model_path);
            t1.phi = parse_schedule(t1_phi);
            t1.seed = resolve_seed(c.seed);
            t1.jobs = c.jobs;
            return finish(verify_theorem1(m, t1), c);
        }
        if (*v2) {
            const Model m = load_model(c.model_path);
            t2.seed = resolve_seed(c.seed);
            t2.jobs = c.jobs;
            t2.intermediate = !t2_no_intermediate;
            return finish(verify_theorem2(m, t2), c);
        }
        if (*vy) {
            const Model m = load_model(c.model_path);
            ty.seed = resolve_seed(c.seed);
            ty.jobs = c.jobs;
            return finish(verify_yaglom(m, ty), c);
        }
        if (*cc) {
            const auto spec = load_model_spec(c.model_path);
            const auto rep = check_conditions(spec, parse_schedule(cc_phi), cc_grid);
            emit_text(c.json_path, dump(to_json(rep)));
            if (!c.csv_path.empty()) {
                std::string csv = "id,pass,detail\n";
                for (const auto& i : rep.items)
                    csv += i.id + "," + (i.pass ? "1" : "0") + ",\"" + i.detail + "\"\n";
                emit_text(c.csv_path, csv);
            }
            return rep.all_pass() ? kExitPass : kExitStatFail;
        }
        if (*sw) {
            const Model m = load_model(c.model_path);
            sc.seed = resolve_seed(c.seed);
            sc.jobs = c.jobs;
            sc.event = make_event(sw_event, sw_phi, sw_a);
            const auto tab = run_sweep(m, sc);
            emit_text(c.json_path, dump(to_json(tab, sc.quantity)));
            if (!c.csv_path.empty())
                emit_text(c.csv_path, sweep_csv(sc.quantity, tab));
            return tab.converged ? kExitPass : kExitStatFail;
        }
    } catch (const EmptySample& e) {
        std::cerr << "bhreduce: insufficient sample: " << e.what() << "\n";
        return kExitInsufficient;
    } catch (const HypothesisError& e) {
        std::cerr << "bhreduce: refused: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "bhreduce: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}

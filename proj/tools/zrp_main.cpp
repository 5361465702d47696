// zrp: inhomogeneous zero range process toolkit.
//
// Subcommands: gap, logsob, ed, sweep, bd, miclo, llt, econd, dominate,
// simulate, decay, colour-check, couple. Every run echoes its resolved
// configuration and seed as JSON for reproducibility. Exit codes: 0 success,
// 2 configuration error, 3 numeric failure.

#include <CLI11.hpp>
#include <iostream>
#include <memory>
#include <nlohmann/json.hpp>

#include "zrp/bdchain.hpp"
#include "zrp/common.hpp"
#include "zrp/dynamics.hpp"
#include "zrp/llt.hpp"
#include "zrp/ordering.hpp"
#include "zrp/report.hpp"
#include "zrp/spectral.hpp"

using namespace zrp;

namespace {

RateFamily resolve_rates(const std::string& spec, int sites) {
    if (!spec.empty() && spec[0] == '@') return cycle_to_sites(load_rate_spec(spec.substr(1)), sites);
    return preset_rates(spec, sites);
}

std::vector<int> parse_sides(const std::string& text) {
    std::vector<int> sides;
    auto dots = text.find("..");
    if (dots != std::string::npos) {
        int lo = std::stoi(text.substr(0, dots));
        int hi = std::stoi(text.substr(dots + 2));
        if (lo < 1 || hi < lo) throw ConfigError("bad side range: " + text);
        for (int n = lo; n <= hi; ++n) sides.push_back(n);
        return sides;
    }
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, ',')) sides.push_back(std::stoi(item));
    if (sides.empty()) throw ConfigError("bad side list: " + text);
    return sides;
}

std::vector<int> parse_split(const std::string& text, int sites) {
    if (text.empty()) {  // default: first half
        std::vector<int> half;
        for (int x = 0; x < sites / 2; ++x) half.push_back(x);
        if (half.empty()) half.push_back(0);
        return half;
    }
    std::vector<int> half;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, ',')) half.push_back(std::stoi(item));
    return half;
}

void echo(const Json& record, const std::string& out_path) {
    std::cout << render_json(record);
    if (!out_path.empty()) emit_json(record, out_path);
}

Json instance_json(const std::string& rates, int dim, int side, long r, const std::string& topology) {
    Json j;
    j["rates"] = rates;
    j["dim"] = dim;
    j["side"] = side;
    j["particles"] = r;
    j["topology"] = topology;
    return j;
}

struct CommonArgs {
    std::string rates = "linear";
    int dim = 1;
    int side = 2;
    long particles = 1;
    std::string out;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool with_particles = true) {
    cmd->add_option("--rates", args.rates,
                    "rate preset or @file (linear, linear-theta:t, alternating:a,b, staircase)");
    cmd->add_option("--dim", args.dim, "lattice dimension")->check(CLI::Range(1, 4));
    cmd->add_option("--side", args.side, "cube side N")->check(CLI::Range(2, 1024));
    if (with_particles) cmd->add_option("--particles", args.particles, "total particle count r");
    cmd->add_option("--out", args.out, "write the JSON report here");
}

GeneratorMatrix build_from(const CommonArgs& args, Topology topo) {
    Lattice lat = Lattice::cube(args.dim, args.side);
    RateFamily rf = resolve_rates(args.rates, lat.size());
    auto ens = std::make_shared<CanonicalEnsemble>(canonical(rf, lat, args.particles));
    return build_generator(std::move(ens), topo);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"inhomogeneous zero range process: spectral constants, birth-death reductions, "
                 "local limit scans, simulation"};
    app.require_subcommand(1);

    // gap ---------------------------------------------------------------
    CommonArgs gap_args;
    std::string gap_topo = "nn";
    auto* cmd_gap = app.add_subcommand("gap", "exact spectral gap of the canonical generator");
    add_common(cmd_gap, gap_args);
    cmd_gap->add_option("--topology", gap_topo, "nn or complete");

    // logsob / ed ---------------------------------------------------------
    CommonArgs ls_args, ed_args;
    EstimateOptions ls_opts, ed_opts;
    bool ls_full = false;
    auto* cmd_ls = app.add_subcommand("logsob", "log-Sobolev constant estimate (certified lower bound)");
    add_common(cmd_ls, ls_args);
    cmd_ls->add_option("--restarts", ls_opts.restarts, "optimizer restarts");
    cmd_ls->add_option("--iters", ls_opts.max_iters, "iterations per restart");
    cmd_ls->add_option("--seed", ls_opts.seed, "optimizer seed");
    cmd_ls->add_flag("--full", ls_full, "also estimate C_ED and emit the complete spectral record");
    auto* cmd_ed = app.add_subcommand("ed", "entropy-dissipation constant estimate");
    add_common(cmd_ed, ed_args);
    cmd_ed->add_option("--restarts", ed_opts.restarts, "optimizer restarts");
    cmd_ed->add_option("--iters", ed_opts.max_iters, "iterations per restart");
    cmd_ed->add_option("--seed", ed_opts.seed, "optimizer seed");

    // sweep ----------------------------------------------------------------
    std::string sweep_kind = "gap", sweep_sides = "2..6", sweep_rates = "linear", sweep_out, sweep_csv;
    long sweep_r_fixed = -1;
    bool sweep_fit = false;
    int sweep_dim = 1;
    auto* cmd_sweep = app.add_subcommand("sweep", "constant vs side sweep with a log-log fit");
    cmd_sweep->add_option("--kind", sweep_kind, "gap or logsob");
    cmd_sweep->add_option("--sides", sweep_sides, "side list: 2..8 or 2,4,6");
    cmd_sweep->add_option("--rates", sweep_rates, "rate preset or @file");
    cmd_sweep->add_option("--dim", sweep_dim, "lattice dimension");
    cmd_sweep->add_option("--particles", sweep_r_fixed, "fixed r (default r = side)");
    cmd_sweep->add_flag("--fit", sweep_fit, "report the fitted slope");
    cmd_sweep->add_option("--out", sweep_out, "JSON report path");
    cmd_sweep->add_option("--csv", sweep_csv, "CSV table path (plus gnuplot .dat)");

    // bd ---------------------------------------------------------------------
    CommonArgs bd_args;
    std::string bd_chain = "metropolis", bd_split;
    auto* cmd_bd = app.add_subcommand("bd", "birth-death reductions of the canonical ensemble");
    add_common(cmd_bd, bd_args);
    cmd_bd->add_option("--chain", bd_chain, "metropolis, single-site:<x>, or two-site");
    cmd_bd->add_option("--split", bd_split, "comma-separated sites of Lambda_1 (default first half)");

    // miclo --------------------------------------------------------------------
    CommonArgs miclo_args;
    std::string miclo_split;
    long miclo_binomial = -1;
    double miclo_eps = 0.0;
    auto* cmd_miclo = app.add_subcommand("miclo", "Miclo conditions for a boundary-count law");
    add_common(cmd_miclo, miclo_args);
    cmd_miclo->add_option("--split", miclo_split, "sites of Lambda_1");
    cmd_miclo->add_option("--binomial", miclo_binomial, "check Binomial(r, 1/2) instead of a model law");
    cmd_miclo->add_option("--epsilon", miclo_eps, "use the modified measure gamma1^eps (0 < eps < 1/4)");

    // llt -------------------------------------------------------------------
    std::string llt_regime = "normal", llt_rates = "staircase", llt_sides = "", llt_out, llt_csv;
    int llt_side = 32, llt_order = 2;
    long llt_r = -1, llt_k = -1;
    double llt_phi = 1.0;
    auto* cmd_llt = app.add_subcommand("llt", "local limit comparisons against the convolution oracle");
    cmd_llt->add_option("--regime", llt_regime, "normal or poisson");
    cmd_llt->add_option("--rates", llt_rates, "rate preset or @file");
    cmd_llt->add_option("--side", llt_side, "number of sites");
    cmd_llt->add_option("--sides", llt_sides, "scan sides (e.g. 16,32,64,128) and emit sup-errors");
    cmd_llt->add_option("--order", llt_order, "expansion order J in {2,3,4}");
    cmd_llt->add_option("--particles", llt_r, "target total r (normal point / poisson regime)");
    cmd_llt->add_option("--phi", llt_phi, "fugacity for sup-error scans");
    cmd_llt->add_option("--k", llt_k, "evaluation point for the poisson regime (default r)");
    cmd_llt->add_option("--out", llt_out, "JSON report path");
    cmd_llt->add_option("--csv", llt_csv, "CSV path for scans (N,J,sup_err)");

    // econd -----------------------------------------------------------------
    std::string econd_rates = "staircase", econd_sides = "2,3,4", econd_out;
    long econd_rmax = 50;
    auto* cmd_econd = app.add_subcommand("econd", "condition (E) statistics sqrt(r) mu(R=r)");
    cmd_econd->add_option("--rates", econd_rates, "rate preset or @file");
    cmd_econd->add_option("--sides", econd_sides, "lattice sizes to sample");
    cmd_econd->add_option("--r-max", econd_rmax, "largest r per size");
    cmd_econd->add_option("--out", econd_out, "JSON report path");

    // dominate ------------------------------------------------------------
    CommonArgs dom_args;
    long dom_hi = -1;
    auto* cmd_dom = app.add_subcommand("dominate", "stochastic domination nu_r <= nu_r_hi");
    add_common(cmd_dom, dom_args);
    cmd_dom->add_option("--particles-hi", dom_hi,
                        "upper ensemble particle count (default r + ceil(B |Lambda|))");

    // simulate -----------------------------------------------------------
    CommonArgs sim_args;
    std::string sim_topo = "nn", sim_colour_counts;
    SimOptions sim_opts;
    std::string sim_csv;
    auto* cmd_sim = app.add_subcommand("simulate", "event-driven trajectory");
    add_common(cmd_sim, sim_args);
    cmd_sim->add_option("--topology", sim_topo, "nn, complete, or two-colour");
    cmd_sim->add_option("--colour-counts", sim_colour_counts, "r1,r2 for two-colour runs");
    cmd_sim->add_option("--horizon", sim_opts.horizon, "time horizon");
    cmd_sim->add_option("--sample-dt", sim_opts.sample_dt, "observable sampling step");
    cmd_sim->add_option("--seed", sim_opts.seed, "simulation seed");
    cmd_sim->add_option("--csv", sim_csv, "time series CSV (t,mean,var,n over sites)");

    // decay ----------------------------------------------------------------
    CommonArgs decay_args;
    DecayOptions decay_opts;
    int decay_site = 0;
    std::string decay_csv;
    auto* cmd_decay = app.add_subcommand("decay", "empirical relaxation rate of Var[P_t f]");
    add_common(cmd_decay, decay_args);
    cmd_decay->add_option("--site", decay_site, "observable f = eta_site");
    cmd_decay->add_option("--replicas", decay_opts.replicas, "outer replicas (>= 100)");
    cmd_decay->add_option("--inner", decay_opts.inner, "inner trajectories per start");
    cmd_decay->add_option("--horizon", decay_opts.horizon, "time horizon");
    cmd_decay->add_option("--sample-dt", decay_opts.sample_dt, "sampling step");
    cmd_decay->add_option("--seed", decay_opts.seed, "master seed");
    cmd_decay->add_option("--csv", decay_csv, "variance time series CSV (t,mean,var,n)");

    // colour-check ----------------------------------------------------------
    CommonArgs colour_args;
    std::string colour_counts = "1,1";
    auto* cmd_colour = app.add_subcommand("colour-check", "two-colour generator projection identity");
    add_common(cmd_colour, colour_args, false);
    cmd_colour->add_option("--colour-counts", colour_counts, "per-colour totals r1,r2");

    // couple -----------------------------------------------------------------
    CommonArgs couple_args;
    long couple_extra = -1, couple_events = 1000;
    int couple_seeds = 50;
    std::uint64_t couple_seed = 2718;
    auto* cmd_couple = app.add_subcommand("couple", "order-preserving coupled complete-graph run");
    add_common(cmd_couple, couple_args);
    cmd_couple->add_option("--extra", couple_extra, "extra particles M (default ceil(B |Lambda|))");
    cmd_couple->add_option("--events", couple_events, "events per seed");
    cmd_couple->add_option("--seeds", couple_seeds, "number of seeds");
    cmd_couple->add_option("--seed", couple_seed, "master seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (cmd_gap->parsed()) {
            auto gen = build_from(gap_args, topology_from_string(gap_topo));
            auto g = spectral_gap(gen);
            Json j;
            j["instance"] =
                instance_json(gap_args.rates, gap_args.dim, gap_args.side, gap_args.particles, gap_topo);
            j["gap"] = g.gap;
            j["C_SG"] = 1.0 / g.gap;
            j["residual"] = g.residual;
            j["solver"] = g.dense ? "dense" : "lanczos";
            echo(j, gap_args.out);
        } else if (cmd_ls->parsed() && ls_full) {
            auto gen = build_from(ls_args, Topology::nearest_neighbour);
            auto rep = spectral_report(gen, ls_opts);
            Json j;
            j["instance"] = instance_json(ls_args.rates, ls_args.dim, ls_args.side, ls_args.particles, "nn");
            j["gap"] = rep.gap;
            j["C_SG"] = rep.c_sg;
            j["C_ED_hat"] = rep.c_ed_hat;
            j["C_LS_hat"] = rep.c_ls_hat;
            j["diagnostics"] = {{"restarts", rep.restarts},
                                {"evaluations", rep.evaluations},
                                {"seed", ls_opts.seed}};
            echo(j, ls_args.out);
        } else if (cmd_ls->parsed() || cmd_ed->parsed()) {
            bool is_ls = cmd_ls->parsed();
            const CommonArgs& args = is_ls ? ls_args : ed_args;
            const EstimateOptions& opts = is_ls ? ls_opts : ed_opts;
            auto gen = build_from(args, Topology::nearest_neighbour);
            auto g = spectral_gap(gen);
            auto est = estimate_constant(
                gen, is_ls ? ConstantKind::log_sobolev : ConstantKind::entropy_dissipation, opts);
            Json j;
            j["instance"] = instance_json(args.rates, args.dim, args.side, args.particles, "nn");
            j["gap"] = g.gap;
            j["C_SG"] = 1.0 / g.gap;
            j[is_ls ? "C_LS_hat" : "C_ED_hat"] = est.value;
            j["diagnostics"] = {{"restarts", opts.restarts},
                                {"best_restart", est.best_restart},
                                {"evaluations", est.evaluations},
                                {"seed", opts.seed}};
            echo(j, args.out);
        } else if (cmd_sweep->parsed()) {
            if (sweep_kind != "gap" && sweep_kind != "logsob")
                throw ConfigError("sweep kind must be gap or logsob");
            SweepKind kind = sweep_kind == "gap" ? SweepKind::gap : SweepKind::log_sobolev;
            auto sides = parse_sides(sweep_sides);
            std::string rates = sweep_rates;
            auto sweep = scaling_sweep(
                [&](int sites) { return resolve_rates(rates, sites); }, sweep_dim, sides,
                [&](int side) { return sweep_r_fixed > 0 ? sweep_r_fixed : static_cast<long>(side); },
                kind);
            Json j;
            j["kind"] = sweep_kind;
            j["rates"] = rates;
            j["dim"] = sweep_dim;
            Json rows = Json::array();
            std::vector<std::vector<double>> csv_rows;
            for (const auto& row : sweep.rows) {
                rows.push_back({{"N", row.side}, {"r", row.r}, {"constant", row.constant}});
                csv_rows.push_back({static_cast<double>(row.side), static_cast<double>(row.r),
                                    row.constant, std::log(row.constant)});
            }
            j["rows"] = rows;
            if (sweep_fit) j["slope"] = sweep.slope;
            echo(j, sweep_out);
            if (!sweep_csv.empty()) {
                std::pair<int, int> gnuplot{0, 3};
                emit_csv({"N", "r", "constant", "log_constant"}, csv_rows, sweep_csv, &gnuplot);
            }
        } else if (cmd_bd->parsed()) {
            Lattice lat = Lattice::cube(bd_args.dim, bd_args.side);
            RateFamily rf = resolve_rates(bd_args.rates, lat.size());
            auto ens = canonical(rf, lat, bd_args.particles);
            BirthDeathChain chain;
            if (bd_chain == "metropolis") {
                auto law = boundary_count_law(ens, parse_split(bd_split, lat.size()));
                chain = metropolis_chain(law.gamma1);
            } else if (bd_chain.rfind("single-site:", 0) == 0) {
                chain = single_site_chain(ens, std::stoi(bd_chain.substr(12)));
            } else if (bd_chain == "two-site") {
                chain = two_site_chain(ens);
            } else {
                throw ConfigError("unknown chain kind: " + bd_chain);
            }
            auto gen = chain.generator();
            auto cond = check_bdspecgap_conditions(chain);
            Json j;
            j["kind"] = bd_chain;
            j["r"] = bd_args.particles;
            j["rates_summary"] = {{"preset", bd_args.rates},
                                  {"birth_max", *std::max_element(chain.birth.begin(), chain.birth.end())},
                                  {"death_max", *std::max_element(chain.death.begin(), chain.death.end())}};
            j["gap"] = spectral_gap(gen).gap;
            j["logsob"] = estimate_constant(gen, ConstantKind::log_sobolev).value;
            j["conditions"] = {{"J0", cond.J0},
                               {"J1", cond.J1},
                               {"J2", cond.J2},
                               {"d_star", cond.d_star},
                               {"admissible", cond.admissible},
                               {"boundary", cond.boundary}};
            echo(j, bd_args.out);
        } else if (cmd_miclo->parsed()) {
            std::vector<double> gamma;
            Json source;
            if (miclo_binomial > 0) {
                gamma.resize(static_cast<std::size_t>(miclo_binomial) + 1);
                for (long k = 0; k <= miclo_binomial; ++k)
                    gamma[static_cast<std::size_t>(k)] =
                        binomial(miclo_binomial, k) * std::pow(0.5, miclo_binomial);
                source = {{"law", "binomial"}, {"r", miclo_binomial}};
            } else {
                Lattice lat = Lattice::cube(miclo_args.dim, miclo_args.side);
                RateFamily rf = resolve_rates(miclo_args.rates, lat.size());
                auto ens = canonical(rf, lat, miclo_args.particles);
                auto half1 = parse_split(miclo_split, lat.size());
                auto law = boundary_count_law(ens, half1);
                gamma = law.gamma1;
                source = {{"law", "gamma1"}, {"r", miclo_args.particles}, {"rates", miclo_args.rates}};
                if (miclo_eps > 0.0) {
                    auto mod = modified_measure(rf, half1, law, miclo_eps);
                    gamma = mod.gamma1_eps;
                    source["modified_epsilon"] = miclo_eps;
                    source["ratio_sup"] = mod.ratio_sup;
                    source["ratio_inf"] = mod.ratio_inf;
                }
            }
            auto res = miclo_check(gamma, default_a0_grid());
            Json j;
            j["source"] = source;
            j["satisfied"] = res.satisfied;
            j["A0_min"] = res.a0_min;
            j["rbar"] = res.rbar;
            j["margins"] = {{"ratio_above", res.margin_ratio_above},
                            {"ratio_below", res.margin_ratio_below},
                            {"gauss_upper", res.margin_gauss_upper},
                            {"gauss_lower", res.margin_gauss_lower}};
            echo(j, miclo_args.out);
        } else if (cmd_llt->parsed()) {
            RateFamily rf = resolve_rates(llt_rates, 1);
            Json j;
            j["regime"] = llt_regime;
            j["rates"] = llt_rates;
            if (!llt_sides.empty()) {
                auto sides = parse_sides(llt_sides);
                Json rows = Json::array();
                std::vector<std::vector<double>> csv_rows;
                for (int n : sides) {
                    double err = llt_regime == "poisson"
                                     ? llt_poisson_sup_error(rf, n, llt_r > 0 ? llt_r : 3)
                                     : llt_normal_sup_error(rf, n, llt_phi, llt_order);
                    rows.push_back({{"N", n}, {"J", llt_order}, {"sup_err", err}});
                    csv_rows.push_back({static_cast<double>(n), static_cast<double>(llt_order), err});
                }
                j["rows"] = rows;
                echo(j, llt_out);
                if (!llt_csv.empty()) emit_csv({"N", "J", "sup_err"}, csv_rows, llt_csv);
            } else if (llt_regime == "poisson") {
                long r = llt_r > 0 ? llt_r : 3;
                auto res = llt_poisson(rf, llt_side, r, llt_k >= 0 ? llt_k : r);
                j["approx"] = res.approx;
                j["exact"] = res.exact;
                j["abs_err"] = res.abs_err;
                echo(j, llt_out);
            } else {
                long r = llt_r > 0 ? llt_r : llt_side;
                auto res = llt_normal(rf, llt_side, r, llt_order);
                j["approx"] = res.approx;
                j["exact"] = res.exact;
                j["abs_err"] = res.abs_err;
                j["z"] = res.z;
                echo(j, llt_out);
            }
        } else if (cmd_econd->parsed()) {
            RateFamily rf = resolve_rates(econd_rates, 1);
            auto scan = condition_e_scan(rf, parse_sides(econd_sides), econd_rmax);
            Json j;
            j["rates"] = econd_rates;
            j["inf"] = scan.inf;
            j["sup"] = scan.sup;
            j["samples"] = scan.samples.size();
            echo(j, econd_out);
        } else if (cmd_dom->parsed()) {
            Lattice lat = Lattice::cube(dom_args.dim, dom_args.side);
            RateFamily rf = resolve_rates(dom_args.rates, lat.size());
            long hi = dom_hi;
            double b_const = 0.0;
            if (hi < 0) {
                auto rep = verify_conditions(rf, 8);
                b_const = rep.B;
                hi = dom_args.particles + static_cast<long>(std::ceil(rep.B * lat.size()));
            }
            auto lo_ens = canonical(rf, lat, dom_args.particles);
            auto hi_ens = canonical(rf, lat, hi);
            auto res = check_stochastic_domination(lo_ens, hi_ens);
            Json j;
            j["instance"] =
                instance_json(dom_args.rates, dom_args.dim, dom_args.side, dom_args.particles, "order");
            j["particles_hi"] = hi;
            if (b_const > 0.0) j["B"] = b_const;
            j["dominated"] = res.dominated;
            if (res.dominated) {
                j["coupling_support"] = res.coupling.size();
            } else {
                j["violating_event"] = {{"nu_lo", res.nu_lo_event}, {"nu_hi", res.nu_hi_event}};
            }
            echo(j, dom_args.out);
        } else if (cmd_sim->parsed()) {
            Lattice lat = Lattice::cube(sim_args.dim, sim_args.side);
            RateFamily rf = resolve_rates(sim_args.rates, lat.size());
            Json j;
            j["instance"] =
                instance_json(sim_args.rates, sim_args.dim, sim_args.side, sim_args.particles, sim_topo);
            j["seed"] = sim_opts.seed;
            j["horizon"] = sim_opts.horizon;
            Trajectory traj;
            if (sim_topo == "two-colour") {
                auto comma = sim_colour_counts.find(',');
                if (comma == std::string::npos)
                    throw ConfigError("two-colour runs need --colour-counts r1,r2");
                long r1 = std::stol(sim_colour_counts.substr(0, comma));
                long r2 = std::stol(sim_colour_counts.substr(comma + 1));
                ColourState init{random_initial(lat.size(), r1, derive_seed(sim_opts.seed, 1)),
                                 random_initial(lat.size(), r2, derive_seed(sim_opts.seed, 2))};
                traj = simulate_two_colour(rf, lat, init, sim_opts);
                j["colour_counts"] = {r1, r2};
            } else {
                SimTopology topo =
                    sim_topo == "complete" ? SimTopology::complete : SimTopology::nearest_neighbour;
                Configuration init =
                    random_initial(lat.size(), sim_args.particles, derive_seed(sim_opts.seed, 1));
                traj = simulate(rf, lat, init, topo, sim_opts);
            }
            j["events"] = traj.events;
            j["samples"] = traj.sample_times.size();
            j["final"] = traj.samples.empty() ? Json::array() : Json(traj.samples.back());
            echo(j, sim_args.out);
            if (!sim_csv.empty()) {
                std::vector<std::vector<double>> rows;
                for (std::size_t k = 0; k < traj.sample_times.size(); ++k) {
                    double mean = 0.0, var = 0.0;
                    const auto& eta = traj.samples[k];
                    for (int v : eta) mean += v;
                    mean /= static_cast<double>(eta.size());
                    for (int v : eta) var += sq(v - mean);
                    var /= static_cast<double>(eta.size());
                    rows.push_back({traj.sample_times[k], mean, var, static_cast<double>(eta.size())});
                }
                emit_csv({"t", "mean", "var", "n"}, rows, sim_csv);
            }
        } else if (cmd_decay->parsed()) {
            Lattice lat = Lattice::cube(decay_args.dim, decay_args.side);
            RateFamily rf = resolve_rates(decay_args.rates, lat.size());
            auto ens = canonical(rf, lat, decay_args.particles);
            int site = decay_site;
            auto est = estimate_decay(
                ens,
                [site](const Configuration& eta) {
                    return static_cast<double>(eta[static_cast<std::size_t>(site)]);
                },
                decay_opts);
            Json j;
            j["instance"] =
                instance_json(decay_args.rates, decay_args.dim, decay_args.side, decay_args.particles, "nn");
            j["observable"] = "eta_" + std::to_string(site);
            j["seed"] = decay_opts.seed;
            j["replicas"] = decay_opts.replicas;
            j["lambda_hat"] = est.lambda_hat;
            j["stderr"] = est.stderr_hat;
            echo(j, decay_args.out);
            if (!decay_csv.empty()) {
                std::vector<std::vector<double>> rows;
                for (std::size_t k = 0; k < est.times.size(); ++k)
                    rows.push_back(
                        {est.times[k], 0.0, est.variances[k], static_cast<double>(decay_opts.replicas)});
                emit_csv({"t", "mean", "var", "n"}, rows, decay_csv);
            }
        } else if (cmd_colour->parsed()) {
            Lattice lat = Lattice::cube(colour_args.dim, colour_args.side);
            RateFamily rf = resolve_rates(colour_args.rates, lat.size());
            auto comma = colour_counts.find(',');
            if (comma == std::string::npos) throw ConfigError("--colour-counts needs r1,r2");
            long r1 = std::stol(colour_counts.substr(0, comma));
            long r2 = std::stol(colour_counts.substr(comma + 1));
            auto check = colour_projection_check(rf, lat, r1, r2);
            Json j;
            j["instance"] =
                instance_json(colour_args.rates, colour_args.dim, colour_args.side, r1 + r2, "two-colour");
            j["colour_counts"] = {r1, r2};
            j["colour_states"] = check.colour_states;
            j["max_entry_error"] = check.max_entry_error;
            j["pass"] = check.max_entry_error <= 1e-12;
            echo(j, colour_args.out);
        } else if (cmd_couple->parsed()) {
            Lattice lat = Lattice::cube(couple_args.dim, couple_args.side);
            RateFamily rf = resolve_rates(couple_args.rates, lat.size());
            long m = couple_extra;
            double b_const = 0.0;
            if (m < 0) {
                auto rep = verify_conditions(rf, 8);
                b_const = rep.B;
                m = static_cast<long>(std::ceil(rep.B * lat.size()));
            }
            Configuration eta0 =
                random_initial(lat.size(), couple_args.particles, derive_seed(couple_seed, 1));
            Configuration xi0 = eta0;
            for (long extra = 0; extra < m; ++extra) xi0[static_cast<std::size_t>(extra % lat.size())] += 1;
            int violations = 0;
            for (int s = 0; s < couple_seeds; ++s) {
                auto res = coupled_order_sim(rf, lat, eta0, xi0, couple_events,
                                             derive_seed(couple_seed, 100 + static_cast<std::uint64_t>(s)));
                if (!res.order_preserved) ++violations;
            }
            Json j;
            j["instance"] = instance_json(couple_args.rates, couple_args.dim, couple_args.side,
                                          couple_args.particles, "complete");
            j["extra_particles"] = m;
            if (b_const > 0.0) j["B"] = b_const;
            j["seeds"] = couple_seeds;
            j["events_per_seed"] = couple_events;
            j["order_violations"] = violations;
            j["order_preserved"] = violations == 0;
            j["seed"] = couple_seed;
            echo(j, couple_args.out);
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}

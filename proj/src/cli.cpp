#include "jumpctl/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <sstream>

#include "jumpctl/bsde.hpp"
#include "jumpctl/errors.hpp"
#include "jumpctl/hjb.hpp"
#include "jumpctl/io.hpp"
#include "jumpctl/penalized.hpp"
#include "jumpctl/randomized.hpp"
#include "jumpctl/rng.hpp"
#include "jumpctl/simulate.hpp"

namespace jumpctl {

using json = nlohmann::ordered_json;

SolverConfig resolve_config(const CommandOptions& opts) {
    SolverConfig cfg;
    if (opts.config_file) cfg = parse_config(read_file(*opts.config_file), cfg);
    if (opts.n_steps) cfg.n_steps = *opts.n_steps;
    if (opts.paths) cfg.mc_paths = *opts.paths;
    if (opts.seed) cfg.master_seed = *opts.seed;
    if (opts.levels) cfg.penalization_levels = *opts.levels;
    if (opts.tol) cfg.picard_tol = *opts.tol;
    if (opts.workers) cfg.workers = *opts.workers;
    const ValidationReport report = validate_config(cfg);
    if (!report.ok()) throw ValidationError("invalid configuration:\n" + report.to_string());
    return cfg;
}

namespace {

std::size_t find_label(const std::vector<std::string>& labels, const std::string& label,
                       const char* what) {
    if (label.empty()) return 0;
    const auto it = std::find(labels.begin(), labels.end(), label);
    if (it == labels.end()) throw ValidationError(std::string("unknown ") + what + " '" + label + "'");
    return static_cast<std::size_t>(it - labels.begin());
}

Problem load_checked(const CommandOptions& opts) {
    Problem p = load_problem(opts.model);
    const ValidationReport report = validate_problem(p);
    if (!report.ok()) throw ValidationError("model failed validation:\n" + report.to_string());
    return p;
}

template <class Fn>
std::string render(Fn&& fn) {
    std::ostringstream os;
    fn(os);
    return os.str();
}

void write_out(const CommandOptions& opts, const char* name, const std::string& text) {
    std::filesystem::create_directories(opts.out_dir);
    write_file_atomic(opts.out_dir / name, text);
}

json config_json(const SolverConfig& cfg) {
    json j;
    j["n_steps"] = cfg.n_steps;
    j["picard_tol"] = cfg.picard_tol;
    j["picard_max_iter"] = cfg.picard_max_iter;
    j["paths"] = cfg.mc_paths;
    j["seed"] = cfg.master_seed;
    j["levels"] = cfg.penalization_levels;
    return j;
}

json values_at_start(const Problem& p, const ValueGrid& v) {
    json j = json::object();
    for (std::size_t x = 0; x < p.num_states(); ++x) j[p.states[x]] = v.at(0, x);
    return j;
}

std::string policy_csv(const Problem& p, const HJBSolution& sol) {
    const FeedbackPolicy policy = extract_feedback(sol);
    std::ostringstream os;
    os << "k,t,state,action\n" << std::setprecision(17);
    for (std::size_t k = 0; k < policy.grid.n_steps; ++k)
        for (std::size_t x = 0; x < policy.states; ++x)
            os << k << ',' << policy.grid.time(k) << ',' << p.states[x] << ','
               << p.actions[policy.at(k, x)] << '\n';
    return os.str();
}

/// Runs `body`, mapping library errors to exit codes.
int guarded(std::ostream& log, const std::function<int()>& body) {
    try {
        return body();
    } catch (const ParseError& e) {
        log << "parse error";
        if (e.line() > 0) log << " (line " << e.line() << ", column " << e.column() << ")";
        log << ": " << e.what() << '\n';
        return exit_code::parse;
    } catch (const ValidationError& e) {
        log << "validation error: " << e.what() << '\n';
        return exit_code::validation;
    } catch (const NonConvergenceError& e) {
        log << "did not converge after " << e.iterations() << " iterations (residual " << e.residual()
            << "): " << e.what() << '\n';
        return exit_code::nonconvergence;
    } catch (const std::exception& e) {
        log << "error: " << e.what() << '\n';
        return exit_code::usage;
    }
}

}  // namespace

int cmd_solve(const CommandOptions& opts, std::ostream& log) {
    return guarded(log, [&] {
        const Problem p = load_checked(opts);
        const SolverConfig cfg = resolve_config(opts);
        const HJBSolution sol = solve_hjb_picard(p, cfg);

        write_out(opts, "values.csv", render([&](std::ostream& os) { write_value_csv(os, sol.value, p); }));
        write_out(opts, "policy.csv", policy_csv(p, sol));

        json summary;
        summary["command"] = "solve";
        summary["config"] = config_json(cfg);
        summary["v0"] = values_at_start(p, sol.value);
        summary["iterations"] = sol.iterations;
        summary["residual"] = sol.residual;
        summary["value_bound"] = value_bound(p);
        write_out(opts, "summary.json", summary.dump(2) + "\n");

        log << "solved in " << sol.iterations << " Picard iterations, residual " << sol.residual << '\n';
        return exit_code::ok;
    });
}

int cmd_diagnose(const CommandOptions& opts, std::ostream& log) {
    return guarded(log, [&] {
        const Problem p = load_checked(opts);
        const SolverConfig cfg = resolve_config(opts);
        const std::size_t x = find_label(p.states, opts.state, "state");
        const std::size_t na = p.num_actions();
        const HJBSolution primal = solve_hjb_picard(p, cfg);

        const auto levels = solve_penalized_levels(p, cfg.penalization_levels, cfg.n_steps);
        const ConvergenceReport conv = convergence_report(p, levels);
        bool conv_pass = true;
        for (const auto& row : conv.rows)
            if (row.monotonicity_violations > 0 || row.cap_violations > 0) conv_pass = false;
        if (!conv.rows.empty() && conv.rows.back().sigma > conv.rows.front().sigma + kOrderTolerance)
            conv_pass = false;

        McOptions mc{cfg.mc_paths, cfg.master_seed, cfg.workers};
        std::vector<NamedControl> controls;
        for (double level : {0.5, 1.0, 2.0}) {
            std::ostringstream id;
            id << "constant_" << level;
            controls.push_back({id.str(), constant_control(primal.value.grid(), p.num_states(), na, level)});
        }
        const DualCheckReport dual = dual_value_check(p, primal, levels, 0.0, x, controls, mc);

        std::vector<BSDERow> bsde_rows;
        const double k_cap = 2.0 * value_bound(p) * (1.0 + p.horizon * p.lambda0_total());
        bool bsde_pass = true;
        std::vector<std::string> bsde_failures;
        for (std::size_t a = 0; a < na; ++a) {
            McOptions bmc = mc;
            bmc.seed = derive_seed(derive_seed(mc.seed, 4), a);
            Estimate prev{};
            bool have_prev = false;
            for (const auto& vn : levels) {
                BSDERow row{vn.level, a, vn.value.value(0.0, x, a),
                            constraint_violation(p, vn, 0.0, x, a, bmc)};
                const Estimate& v = row.constraint.violation;
                if (have_prev && v.mean > prev.mean + kSeMultiplier * combined_se(v, prev)) {
                    bsde_pass = false;
                    bsde_failures.push_back("constraint violation grows at n=" + std::to_string(vn.level) +
                                            " from a=" + p.actions[a]);
                }
                // |Z| <= 2C gives E[K_T] <= 2C (1 + T λ₀(A)) at every level.
                const Estimate& k = row.constraint.k_terminal;
                if (k.mean > k_cap + kSeMultiplier * k.std_error) {
                    bsde_pass = false;
                    bsde_failures.push_back("K_T mean exceeds the uniform bound at n=" + std::to_string(vn.level) +
                                            " from a=" + p.actions[a]);
                }
                prev = v;
                have_prev = true;
                bsde_rows.push_back(row);
            }
        }

        const MinimalYReport miny = minimal_y_report(p, conv.primal, levels, 0.0, x, dual.best_gain);

        write_out(opts, "values.csv", render([&](std::ostream& os) { write_value_csv(os, primal.value, p); }));
        write_out(opts, "policy.csv", policy_csv(p, primal));
        write_out(opts, "penalized.csv", render([&](std::ostream& os) { write_convergence_csv(os, conv); }));
        write_out(opts, "dual.csv", render([&](std::ostream& os) { write_dual_csv(os, dual, p); }));
        write_out(opts, "bsde.csv", render([&](std::ostream& os) { write_bsde_csv(os, bsde_rows, p); }));

        json summary;
        summary["command"] = "diagnose";
        summary["config"] = config_json(cfg);
        summary["state"] = p.states[x];
        summary["v0"] = values_at_start(p, primal.value);
        summary["iterations"] = primal.iterations;
        summary["residual"] = primal.residual;

        json suites;
        json jc;
        jc["pass"] = conv_pass;
        jc["sigma"] = json::array();
        jc["delta"] = json::array();
        for (const auto& row : conv.rows) {
            jc["sigma"].push_back(row.sigma);
            jc["delta"].push_back(row.delta);
        }
        suites["penalized"] = jc;

        json jd;
        jd["pass"] = dual.pass();
        jd["estimators_agree"] = dual.estimators_agree;
        jd["weak_duality"] = dual.weak_duality;
        jd["greedy_attains"] = dual.greedy_attains;
        jd["action_independent"] = dual.action_independent;
        jd["best_gain"] = dual.best_gain;
        jd["failures"] = dual.failures;
        suites["dual"] = jd;

        json jb;
        jb["pass"] = bsde_pass;
        jb["failures"] = bsde_failures;
        suites["bsde"] = jb;

        json jm;
        jm["pass"] = miny.pass();
        jm["monotone"] = miny.monotone;
        jm["capped"] = miny.capped;
        jm["converged"] = miny.converged;
        jm["limit"] = miny.limit;
        jm["gap_to_primal"] = miny.gap_to_primal;
        jm["gap_to_dual"] = miny.gap_to_dual;
        suites["minimal_y"] = jm;
        summary["suites"] = suites;

        const bool pass = conv_pass && dual.pass() && bsde_pass && miny.pass();
        summary["pass"] = pass;
        write_out(opts, "summary.json", summary.dump(2) + "\n");

        for (const auto& [name, suite] : suites.items())
            log << name << ": " << (suite["pass"].get<bool>() ? "pass" : "FAIL") << '\n';
        for (const auto& f : dual.failures) log << "  " << f << '\n';
        for (const auto& f : bsde_failures) log << "  " << f << '\n';
        return pass ? exit_code::ok : exit_code::suite_failure;
    });
}

int cmd_simulate(const CommandOptions& opts, const SimulateOptions& sim, std::ostream& log) {
    return guarded(log, [&] {
        const Problem p = load_checked(opts);
        const SolverConfig cfg = resolve_config(opts);
        const std::size_t x = find_label(p.states, opts.state, "state");
        const std::size_t count = sim.count.value_or(cfg.mc_paths);
        const TimeGrid grid{p.horizon, cfg.n_steps};

        std::function<Path(std::uint64_t)> draw;
        FeedbackPolicy policy;
        std::size_t start_action = 0;
        if (sim.mode == "controlled") {
            if (sim.action == "optimal")
                policy = extract_feedback(solve_hjb_picard(p, cfg));
            else
                policy = constant_policy(grid, p.num_states(), find_label(p.actions, sim.action, "action"));
            draw = [&](std::uint64_t seed) { return simulate_controlled_path(p, policy, 0.0, x, seed); };
        } else if (sim.mode == "pair") {
            if (sim.action != "optimal") start_action = find_label(p.actions, sim.action, "action");
            draw = [&](std::uint64_t seed) { return simulate_pair_path(p, 0.0, x, start_action, seed); };
        } else {
            throw std::invalid_argument("mode must be 'controlled' or 'pair'");
        }

        std::vector<Path> paths(count);
        parallel_for(count, cfg.workers, [&](std::size_t i) { paths[i] = draw(derive_seed(cfg.master_seed, i)); });
        write_out(opts, "paths.csv", render([&](std::ostream& os) { write_paths_csv(os, paths, p); }));
        log << "wrote " << count << " paths\n";
        return exit_code::ok;
    });
}

namespace {

void add_common(CLI::App& cmd, CommandOptions& o) {
    cmd.add_option("--model", o.model, "Model JSON file")->required();
    cmd.add_option("--out-dir", o.out_dir, "Directory for reports");
    cmd.add_option("--config", o.config_file, "Config JSON (flags take precedence)");
    cmd.add_option("--n-steps", o.n_steps, "Time steps");
    cmd.add_option("--paths", o.paths, "Monte Carlo paths");
    cmd.add_option("--seed", o.seed, "Master seed");
    cmd.add_option("--levels", o.levels, "Penalization levels, comma separated")->delimiter(',');
    cmd.add_option("--tol", o.tol, "Picard tolerance");
    cmd.add_option("--workers", o.workers, "Worker threads");
    cmd.add_option("--state", o.state, "Start state label");
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Finite-horizon optimal control of pure-jump Markov processes"};
    app.require_subcommand(1);

    CommandOptions solve_opts, diag_opts, sim_opts;
    SimulateOptions sim;
    auto* solve = app.add_subcommand("solve", "Solve the HJB equation and export value and policy");
    add_common(*solve, solve_opts);
    auto* diagnose = app.add_subcommand("diagnose", "Run the penalization, dual and BSDE diagnostics");
    add_common(*diagnose, diag_opts);
    auto* simulate = app.add_subcommand("simulate", "Dump simulated paths");
    add_common(*simulate, sim_opts);
    simulate->add_option("--mode", sim.mode, "controlled or pair")->check(CLI::IsMember({"controlled", "pair"}));
    simulate->add_option("--action", sim.action, "Constant action label, or 'optimal'");
    simulate->add_option("--count", sim.count, "Number of paths");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? exit_code::ok : exit_code::usage;
    }
    if (solve->parsed()) return cmd_solve(solve_opts, err);
    if (diagnose->parsed()) return cmd_diagnose(diag_opts, err);
    return cmd_simulate(sim_opts, sim, err);
}

}  // namespace jumpctl

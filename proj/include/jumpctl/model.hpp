#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace jumpctl {

/// Finite-horizon control problem for a pure jump process on finite E with
/// finite action set A.
///
/// Tables are stored flat in row-major order:
///   rates         [x][a][y]   controlled rate kernel, 1/time
///   running_cost  [k][x][a]   cost/time on K+1 uniform knots over [0, T];
///                             a single layer means constant in time
///   terminal_cost [x]
///
/// Self-jumps (rates[x][a][x] > 0) are allowed.
struct Problem {
    std::vector<std::string> states;
    std::vector<std::string> actions;
    std::vector<double> rates;
    std::vector<double> lambda0;
    std::vector<double> running_cost;
    std::vector<double> terminal_cost;
    double horizon = 1.0;

    std::size_t num_states() const noexcept { return states.size(); }
    std::size_t num_actions() const noexcept { return actions.size(); }
    std::size_t cost_layers() const noexcept;

    double rate(std::size_t x, std::size_t a, std::size_t y) const {
        return rates[(x * num_actions() + a) * num_states() + y];
    }
    std::span<const double> rate_row(std::size_t x, std::size_t a) const {
        return {rates.data() + (x * num_actions() + a) * num_states(), num_states()};
    }
    /// λ(x, a, E)
    double exit_rate(std::size_t x, std::size_t a) const;
    /// λ₀(A)
    double lambda0_total() const;
};

struct Violation {
    std::string kind;
    std::string detail;
};

struct ValidationReport {
    std::vector<Violation> violations;

    bool ok() const noexcept { return violations.empty(); }
    bool has(const std::string& kind) const;
    std::string to_string() const;
};

/// Lists every admissibility violation; empty iff the problem is admissible.
ValidationReport validate_problem(const Problem& p);

/// Throws ValidationError when validate_problem reports anything.
void require_valid(const Problem& p);

/// Λ_E = max_{x,a} λ(x,a,E).
double rate_bound(const Problem& p);

/// Λ_pair = Λ_E + λ₀(A), the jump-rate bound of the pair (X, I).
double pair_rate_bound(const Problem& p);

/// Running cost at time t, piecewise linear between table knots.
/// Throws std::domain_error for t outside [0, T].
double cost_at(const Problem& p, double t, std::size_t x, std::size_t a);

/// ∫_{s0}^{s1} f(r, x, a) dr, exact for the piecewise-linear cost.
double integrate_cost(const Problem& p, std::size_t x, std::size_t a, double s0, double s1);

double terminal_sup_norm(const Problem& p);
double running_sup_norm(const Problem& p);

/// C = ‖g‖∞ + T‖f‖∞, the a-priori bound on every value function of the problem.
double value_bound(const Problem& p);

struct SolverConfig {
    std::size_t n_steps = 2000;
    double picard_tol = 1e-10;
    std::size_t picard_max_iter = 500;
    std::size_t mc_paths = 10000;
    std::uint64_t master_seed = 20240601;
    std::vector<int> penalization_levels = {1, 2, 4, 8, 16, 32, 64, 128, 256};
    std::size_t workers = 1;
};

ValidationReport validate_config(const SolverConfig& cfg);

}  // namespace jumpctl

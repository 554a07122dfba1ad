#pragma once

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <span>
#include <vector>

#include "jumpctl/grid.hpp"
#include "jumpctl/model.hpp"

namespace jumpctl {

/// Lower bound imposed on every intensity control value.
inline constexpr double kNuMin = 1e-6;

/// One point (T_n, E_n, A_n) of the marked point process. For controlled
/// paths `action` is the feedback action that produced the jump.
struct Jump {
    double time = 0.0;
    std::size_t state = 0;
    std::size_t action = 0;
};

/// A realized trajectory on [start_time, horizon]. The state is left-continuous
/// between jumps: X_s = E_n for s in (T_n, T_{n+1}].
struct Path {
    double start_time = 0.0;
    double horizon = 0.0;
    std::size_t initial_state = 0;
    std::size_t initial_action = 0;
    bool pair = false;
    std::uint64_t seed = 0;
    std::vector<Jump> jumps;

    std::size_t state_at(double s) const;
    std::size_t action_at(double s) const;
    std::size_t terminal_state() const { return jumps.empty() ? initial_state : jumps.back().state; }
    std::size_t terminal_action() const { return jumps.empty() ? initial_action : jumps.back().action; }

    /// Strictly increasing times inside (start, horizon], marks in range.
    bool well_formed(std::size_t states, std::size_t actions) const;
};

/// Feedback law α[k][x], piecewise constant on [t_k, t_{k+1}).
struct FeedbackPolicy {
    TimeGrid grid;
    std::size_t states = 0;
    std::vector<std::size_t> table;
    /// Declared suboptimality rate: J(t,x,α) >= v(t,x) − epsilon (T − t).
    double epsilon = 0.0;

    std::size_t at(std::size_t k, std::size_t x) const { return table[k * states + x]; }
    std::size_t action(double t, std::size_t x) const { return at(grid.cell(t), x); }
};

FeedbackPolicy constant_policy(TimeGrid grid, std::size_t states, std::size_t action);

/// Markovian intensity field ν[k][x][a][b] in [kNuMin, bound], piecewise constant
/// on [t_k, t_{k+1}).
struct IntensityControl {
    TimeGrid grid;
    std::size_t states = 0;
    std::size_t actions = 0;
    double bound = 1.0;
    std::vector<double> values;

    double at(std::size_t k, std::size_t x, std::size_t a, std::size_t b) const {
        return values[((k * states + x) * actions + a) * actions + b];
    }
    double& at(std::size_t k, std::size_t x, std::size_t a, std::size_t b) {
        return values[((k * states + x) * actions + a) * actions + b];
    }
    double value(double t, std::size_t x, std::size_t a, std::size_t b) const {
        return at(grid.cell(t), x, a, b);
    }
};

IntensityControl constant_control(TimeGrid grid, std::size_t states, std::size_t actions,
                                  double level);

/// Throws std::invalid_argument unless ν lies in [kNuMin, bound] with a shape
/// matching the problem.
void validate_control(const Problem& p, const IntensityControl& nu);

/// Controlled path under α on [t, T], thinned against the constant bound Λ_E.
Path simulate_controlled_path(const Problem& p, const FeedbackPolicy& alpha, double t,
                              std::size_t x, std::uint64_t seed);

/// Uncontrolled pair (X, I) from (t, x, a) by competing exponentials.
Path simulate_pair_path(const Problem& p, double t, std::size_t x, std::size_t a,
                        std::uint64_t seed);

/// Pair under the tilted measure: I-jumps to b at intensity ν(s, X, I, b) λ₀[b],
/// thinned against ν.bound * λ₀(A).
Path simulate_tilted_path(const Problem& p, const IntensityControl& nu, double t, std::size_t x,
                          std::size_t a, std::uint64_t seed);

/// CSV with columns path_id,jump_index,time,X_mark,I_mark. Row jump_index 0
/// holds the initial marks; I_mark is empty for controlled paths.
void write_paths_csv(std::ostream& os, std::span<const Path> paths, const Problem& p);

}  // namespace jumpctl

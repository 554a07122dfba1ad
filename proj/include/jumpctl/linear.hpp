#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>

#include "jumpctl/grid.hpp"
#include "jumpctl/model.hpp"
#include "jumpctl/simulate.hpp"
#include "jumpctl/stats.hpp"

namespace jumpctl {

/// Running cost f(t, x, a) fed to the linear solvers. For the primal equation
/// `a` is the feedback action in force; for the pair equation it is the I-mark.
using RunningCostFn = std::function<double(double t, std::size_t x, std::size_t a)>;

RunningCostFn problem_cost(const Problem& p);
RunningCostFn zero_cost();

/// Backward Kolmogorov / Feynman-Kac equation under a feedback law,
///
///   ∂v/∂s + Σ_y (v(y) − v(x)) λ(x, α(s,x), {y}) + f(s, x, α(s,x)) = 0,  v(T) = terminal,
///
/// marched by classical RK4 on the policy's grid from T down to t (a grid node).
/// Within a cell the policy is the cell's action; f is sampled at stage times.
/// Cells with Δt Λ_E > 0.5 are sub-stepped.
ValueGrid solve_kolmogorov(const Problem& p, const FeedbackPolicy& alpha,
                           std::span<const double> terminal, const RunningCostFn& running,
                           double t = 0.0);

/// Gain J(·, ·, α) with the problem's own f and g.
ValueGrid evaluate_policy(const Problem& p, const FeedbackPolicy& alpha, double t = 0.0);

/// Same scheme for the pair generator on E x A; terminal_pair is indexed x * |A| + a.
ValueGrid solve_kolmogorov_pair(const Problem& p, TimeGrid grid,
                                std::span<const double> terminal_pair,
                                const RunningCostFn& running, double t = 0.0);

/// Two-stage estimate E[P_sT g(X_s)] against the direct estimate E[g(X_T)].
struct MarkovCheck {
    Estimate two_stage;
    Estimate direct;
    Estimate difference;   ///< paired per-path difference two_stage − direct
    double deterministic;  ///< P_tT g(x) from the solver
};

MarkovCheck mc_check_markov(const Problem& p, const FeedbackPolicy& alpha, double t,
                            std::size_t x, double s, std::span<const double> terminal,
                            std::size_t paths, std::uint64_t seed, std::size_t workers = 1);

}  // namespace jumpctl

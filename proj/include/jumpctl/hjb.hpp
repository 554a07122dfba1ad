#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "jumpctl/grid.hpp"
#include "jumpctl/model.hpp"
#include "jumpctl/simulate.hpp"

namespace jumpctl {

/// Value function of the primal problem on [0, T] x E.
struct HJBSolution {
    ValueGrid value;
    std::size_t iterations = 0;
    /// Last sup-norm update of v (the convergence test).
    double residual = 0.0;
    /// Same update weighted by e^{−Λt}, the norm in which the time-continuous map contracts.
    double residual_scaled = 0.0;
    std::vector<double> residual_history;
    /// Maximizing action per node, [k][x].
    std::vector<std::size_t> argmax;
};

struct Hamiltonian {
    std::vector<double> values;
    std::vector<std::size_t> argmax;
};

/// max_a [ Σ_y (v(y) − v(x)) λ(x,a,{y}) + f(t,x,a) ] per state, ties to the lowest index.
Hamiltonian hamiltonian(const Problem& p, double t, std::span<const double> v_layer);

/// Fixed point of v ↦ e^{−Λ(T−t)} g + ∫_t^T e^{−Λ(s−t)} max_a γ_v(s,·,a) ds with
/// γ_v(t,x,a) = Σ_y v(t,y) λ(x,a,{y}) + (Λ − λ(x,a,E)) v(t,x) + f(t,x,a)
/// and Λ = Λ_E. On each of cfg.n_steps cells the integrand is taken linear
/// between nodes and integrated against the exponential exactly, so constants and
/// ‖g‖ + (T − t)‖f‖ are reproduced to rounding. Starts from v = g.
/// Throws NonConvergenceError after cfg.picard_max_iter sweeps.
HJBSolution solve_hjb_picard(const Problem& p, const SolverConfig& cfg);

/// Explicit backward Euler v_k = v_{k+1} + Δt H(t_k, v_{k+1}). With substeps == 0 the
/// cell is split just enough to keep Δt Λ_E <= 0.5.
HJBSolution solve_hjb_marching(const Problem& p, std::size_t n_steps, std::size_t substeps = 0);

/// Per-node maximizer as a feedback law. Over a finite action set the maximizer
/// is exact; `epsilon` is carried on the policy as its declared suboptimality rate.
FeedbackPolicy extract_feedback(const HJBSolution& sol, double epsilon = 0.0);

}  // namespace jumpctl

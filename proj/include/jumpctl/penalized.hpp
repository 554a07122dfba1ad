#pragma once

#include <cstddef>
#include <ostream>
#include <span>
#include <vector>

#include "jumpctl/grid.hpp"
#include "jumpctl/hjb.hpp"
#include "jumpctl/model.hpp"

namespace jumpctl {

/// Solution v^n of the penalized equation on [0, T] x E x A.
///
/// The stored grid is the solver's internal grid: `base_steps` requested cells,
/// each split into `substeps` explicit Euler steps.
struct PenalizedSolution {
    int level = 0;
    std::size_t base_steps = 0;
    std::size_t substeps = 1;
    ValueGrid value;
};

/// Σ_b { n [ψ(b)]⁺ − ψ(b) } λ₀[b] with ψ(b) = v(x,b) − v(x,a); the layer is
/// indexed x * |A| + b.
double penalty_term(std::span<const double> v_layer, std::size_t actions, std::size_t x,
                    std::size_t a, std::span<const double> lambda0, double n);

/// Smallest split of a cell of `n_steps` such that Δt (Λ_pair + (n+1) λ₀(A)) <= 0.5.
std::size_t required_substeps(const Problem& p, int n, std::size_t n_steps);

/// Explicit Euler backward march of
///   ∂v/∂t + L v + f + penalty = 0,  v(T, x, a) = g(x),
/// with L the pair generator and f sampled at the left end of each step.
/// `substeps` below the stability requirement is raised to it.
PenalizedSolution solve_penalized(const Problem& p, int n, std::size_t n_steps,
                                  std::size_t substeps = 0);

/// Solves every level on one common internal grid (the finest any level needs),
/// so pointwise comparisons across levels are comparisons of the same scheme.
std::vector<PenalizedSolution> solve_penalized_levels(const Problem& p, std::span<const int> levels,
                                                      std::size_t n_steps);

/// σ = max_{t,x} [max_a v − min_a v] over a pair-space grid.
double action_spread(const ValueGrid& v);

struct ConvergenceRow {
    int level = 0;
    double sigma = 0.0;  ///< max_{t,x} [max_a v^n − min_a v^n]
    double delta = 0.0;  ///< max_{t,x,a} (v − v^n)
    std::size_t monotonicity_violations = 0;  ///< nodes with v^n > v^{next level} + 1e-9
    std::size_t cap_violations = 0;           ///< nodes with v^n > v + 1e-9
};

struct ConvergenceReport {
    std::vector<ConvergenceRow> rows;
    /// Primal reference solved by the same explicit scheme on the same internal grid.
    HJBSolution primal;

    std::size_t total_monotonicity_violations() const;
    std::size_t total_cap_violations() const;
};

inline constexpr double kOrderTolerance = 1e-9;

ConvergenceReport convergence_report(const Problem& p, std::span<const PenalizedSolution> levels);
ConvergenceReport convergence_report(const Problem& p, std::span<const int> levels,
                                     std::size_t n_steps);

/// CSV with columns n,sigma_n,delta_n,monotonicity_violations,cap_violations.
void write_convergence_csv(std::ostream& os, const ConvergenceReport& report);

}  // namespace jumpctl

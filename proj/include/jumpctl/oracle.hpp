#pragma once

#include <cstddef>

#include "jumpctl/grid.hpp"
#include "jumpctl/hjb.hpp"
#include "jumpctl/model.hpp"

namespace jumpctl {

/// Brute-force first-order value iteration for the primal HJB equation,
///   V_k(x) = V_{k+1}(x) + Δt max_a [Σ_y (V_{k+1}(y) − V_{k+1}(x)) λ(x,a,{y}) + f(t_k,x,a)],
/// kept free of any code shared with the hjb/penalized solvers.
/// Throws std::domain_error unless Δt Λ_E <= 0.1.
ValueGrid oracle_value(const Problem& p, std::size_t n_steps_fine);

struct OracleComparison {
    double gap_t0 = 0.0;    ///< max_x |v(0,x) − V(0,x)|
    double gap_grid = 0.0;  ///< sup over the solver's grid nodes
    double tol = 0.0;
    bool pass = false;
};

/// Compares a solver grid against the oracle on the solver's nodes (the oracle
/// is interpolated linearly when its grid does not contain them).
OracleComparison oracle_compare(const ValueGrid& oracle, const HJBSolution& sol, double tol);

}  // namespace jumpctl

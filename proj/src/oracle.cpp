#include "jumpctl/oracle.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace jumpctl {

ValueGrid oracle_value(const Problem& p, std::size_t n_steps_fine) {
    require_valid(p);
    const std::size_t E = p.num_states();
    const std::size_t A = p.num_actions();
    const double T = p.horizon;
    const double dt = T / static_cast<double>(n_steps_fine);

    double big = 0.0;
    for (std::size_t x = 0; x < E; ++x)
        for (std::size_t a = 0; a < A; ++a) {
            double row = 0.0;
            for (std::size_t y = 0; y < E; ++y) row = row + p.rates[(x * A + a) * E + y];
            if (row > big) big = row;
        }
    if (dt * big > 0.1) throw std::domain_error("oracle needs dt * rate bound <= 0.1");

    ValueGrid V(TimeGrid{T, n_steps_fine}, 0, E);
    for (std::size_t x = 0; x < E; ++x) V.at(n_steps_fine, x) = p.terminal_cost[x];

    std::vector<double> next(E);
    for (std::size_t step = 0; step < n_steps_fine; ++step) {
        const std::size_t k = n_steps_fine - 1 - step;
        const double t = T * static_cast<double>(k) / static_cast<double>(n_steps_fine);
        for (std::size_t x = 0; x < E; ++x) {
            double best = -INFINITY;
            for (std::size_t a = 0; a < A; ++a) {
                double sum = cost_at(p, t, x, a);
                for (std::size_t y = 0; y < E; ++y)
                    sum = sum + (V.at(k + 1, y) - V.at(k + 1, x)) * p.rates[(x * A + a) * E + y];
                if (sum > best) best = sum;
            }
            next[x] = V.at(k + 1, x) + dt * best;
        }
        for (std::size_t x = 0; x < E; ++x) V.at(k, x) = next[x];
    }
    return V;
}

OracleComparison oracle_compare(const ValueGrid& oracle, const HJBSolution& sol, double tol) {
    const ValueGrid& v = sol.value;
    if (oracle.states() != v.states()) throw std::invalid_argument("oracle and solver disagree on |E|");
    OracleComparison cmp;
    cmp.tol = tol;
    for (std::size_t k = v.start_index(); k <= v.grid().n_steps; ++k) {
        const double t = v.grid().time(k);
        for (std::size_t x = 0; x < v.states(); ++x) {
            const double gap = std::abs(v.at(k, x) - oracle.value(t, x));
            if (gap > cmp.gap_grid) cmp.gap_grid = gap;
            if (k == 0 && gap > cmp.gap_t0) cmp.gap_t0 = gap;
        }
    }
    cmp.pass = cmp.gap_grid <= tol;
    return cmp;
}

}  // namespace jumpctl

#include "jumpctl/penalized.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <stdexcept>

#include "jumpctl/errors.hpp"

namespace jumpctl {

double penalty_term(std::span<const double> v_layer, std::size_t actions, std::size_t x,
                    std::size_t a, std::span<const double> lambda0, double n) {
    const double here = v_layer[x * actions + a];
    double acc = 0.0;
    for (std::size_t b = 0; b < actions; ++b) {
        const double psi = v_layer[x * actions + b] - here;
        acc += (n * std::max(psi, 0.0) - psi) * lambda0[b];
    }
    return acc;
}

std::size_t required_substeps(const Problem& p, int n, std::size_t n_steps) {
    const double dt = p.horizon / static_cast<double>(n_steps);
    const double stiffness = pair_rate_bound(p) + (static_cast<double>(n) + 1.0) * p.lambda0_total();
    const double ratio = dt * stiffness / 0.5;
    return ratio <= 1.0 ? 1 : static_cast<std::size_t>(std::ceil(ratio));
}

PenalizedSolution solve_penalized(const Problem& p, int n, std::size_t n_steps,
                                  std::size_t substeps) {
    require_valid(p);
    if (n < 0) throw std::invalid_argument("penalization level must be nonnegative");
    if (n_steps < 1) throw std::invalid_argument("n_steps must be positive");
    const std::size_t ns = p.num_states();
    const std::size_t na = p.num_actions();
    substeps = std::max(substeps, required_substeps(p, n, n_steps));

    const TimeGrid grid{p.horizon, n_steps * substeps};
    const double h = grid.dt();
    const double level = static_cast<double>(n);

    PenalizedSolution sol{n, n_steps, substeps, ValueGrid(grid, 0, ns, na)};
    sol.value.mark_pair();
    for (std::size_t x = 0; x < ns; ++x)
        for (std::size_t a = 0; a < na; ++a) sol.value.at(grid.n_steps, x, a) = p.terminal_cost[x];

    for (std::size_t k = grid.n_steps; k-- > 0;) {
        const auto above = sol.value.layer(k + 1);
        const double t = grid.time(k);
        for (std::size_t x = 0; x < ns; ++x)
            for (std::size_t a = 0; a < na; ++a) {
                const double here = above[x * na + a];
                double drift = cost_at(p, t, x, a);
                const auto row = p.rate_row(x, a);
                for (std::size_t y = 0; y < ns; ++y) drift += (above[y * na + a] - here) * row[y];
                for (std::size_t b = 0; b < na; ++b) drift += (above[x * na + b] - here) * p.lambda0[b];
                drift += penalty_term(above, na, x, a, p.lambda0, level);
                sol.value.at(k, x, a) = here + h * drift;
            }
    }
    return sol;
}

std::vector<PenalizedSolution> solve_penalized_levels(const Problem& p, std::span<const int> levels,
                                                      std::size_t n_steps) {
    if (levels.empty()) return {};
    const int top = *std::max_element(levels.begin(), levels.end());
    const std::size_t m = required_substeps(p, top, n_steps);
    std::vector<PenalizedSolution> out;
    out.reserve(levels.size());
    for (int n : levels) out.push_back(solve_penalized(p, n, n_steps, m));
    return out;
}

double action_spread(const ValueGrid& v) {
    const std::size_t na = v.actions();
    double sigma = 0.0;
    for (std::size_t k = v.start_index(); k <= v.grid().n_steps; ++k)
        for (std::size_t x = 0; x < v.states(); ++x) {
            const auto cell = v.layer(k).subspan(x * na, na);
            const auto [lo, hi] = std::minmax_element(cell.begin(), cell.end());
            sigma = std::max(sigma, *hi - *lo);
        }
    return sigma;
}

std::size_t ConvergenceReport::total_monotonicity_violations() const {
    std::size_t total = 0;
    for (const auto& r : rows) total += r.monotonicity_violations;
    return total;
}

std::size_t ConvergenceReport::total_cap_violations() const {
    std::size_t total = 0;
    for (const auto& r : rows) total += r.cap_violations;
    return total;
}

ConvergenceReport convergence_report(const Problem& p, std::span<const PenalizedSolution> levels) {
    ConvergenceReport report;
    if (levels.empty()) return report;
    const TimeGrid grid = levels.front().value.grid();
    for (const auto& s : levels)
        if (!(s.value.grid() == grid))
            throw GridMismatchError("convergence_report needs all levels on one grid");

    report.primal = solve_hjb_marching(p, grid.n_steps, 1);
    const ValueGrid& v = report.primal.value;
    const std::size_t ns = p.num_states();
    const std::size_t na = p.num_actions();

    for (std::size_t i = 0; i < levels.size(); ++i) {
        const ValueGrid& vn = levels[i].value;
        ConvergenceRow row;
        row.level = levels[i].level;
        row.delta = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k <= grid.n_steps; ++k)
            for (std::size_t x = 0; x < ns; ++x) {
                double lo = vn.at(k, x, 0), hi = lo;
                for (std::size_t a = 0; a < na; ++a) {
                    const double val = vn.at(k, x, a);
                    lo = std::min(lo, val);
                    hi = std::max(hi, val);
                    row.delta = std::max(row.delta, v.at(k, x) - val);
                    if (val > v.at(k, x) + kOrderTolerance) ++row.cap_violations;
                    if (i + 1 < levels.size() && val > levels[i + 1].value.at(k, x, a) + kOrderTolerance)
                        ++row.monotonicity_violations;
                }
                row.sigma = std::max(row.sigma, hi - lo);
            }
        report.rows.push_back(row);
    }
    return report;
}

ConvergenceReport convergence_report(const Problem& p, std::span<const int> levels,
                                     std::size_t n_steps) {
    for (std::size_t i = 1; i < levels.size(); ++i)
        if (levels[i] <= levels[i - 1]) throw std::invalid_argument("levels must be strictly increasing");
    const auto solutions = solve_penalized_levels(p, levels, n_steps);
    return convergence_report(p, solutions);
}

void write_convergence_csv(std::ostream& os, const ConvergenceReport& report) {
    os << "n,sigma_n,delta_n,monotonicity_violations,cap_violations\n";
    os << std::setprecision(17);
    for (const auto& r : report.rows)
        os << r.level << ',' << r.sigma << ',' << r.delta << ',' << r.monotonicity_violations << ','
           << r.cap_violations << '\n';
}

}  // namespace jumpctl

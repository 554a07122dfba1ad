#include "jumpctl/hjb.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "jumpctl/errors.hpp"

namespace jumpctl {

Hamiltonian hamiltonian(const Problem& p, double t, std::span<const double> v_layer) {
    const std::size_t ns = p.num_states();
    const std::size_t na = p.num_actions();
    Hamiltonian h{std::vector<double>(ns), std::vector<std::size_t>(ns, 0)};
    for (std::size_t x = 0; x < ns; ++x) {
        double best = 0.0;
        for (std::size_t a = 0; a < na; ++a) {
            double acc = cost_at(p, t, x, a);
            const auto row = p.rate_row(x, a);
            for (std::size_t y = 0; y < ns; ++y) acc += (v_layer[y] - v_layer[x]) * row[y];
            if (a == 0 || acc > best) {
                best = acc;
                h.argmax[x] = a;
            }
        }
        h.values[x] = best;
    }
    return h;
}

namespace {

void fill_argmax(const Problem& p, HJBSolution& sol) {
    const auto& grid = sol.value.grid();
    const std::size_t ns = p.num_states();
    sol.argmax.assign((grid.n_steps + 1) * ns, 0);
    for (std::size_t k = 0; k <= grid.n_steps; ++k) {
        const auto h = hamiltonian(p, grid.time(k), sol.value.layer(k));
        std::copy(h.argmax.begin(), h.argmax.end(), sol.argmax.begin() + static_cast<std::ptrdiff_t>(k * ns));
    }
}

/// ∫_0^Δt e^{−Λr} h(r) dr = left·h(0) + right·h(Δt) for h linear on the cell,
/// and decay = e^{−ΛΔt}.
struct CellWeights {
    double decay = 1.0;
    double left = 0.0;
    double right = 0.0;
};

CellWeights cell_weights(double lambda, double dt) {
    const double z = lambda * dt;
    if (z == 0.0) return {1.0, 0.5 * dt, 0.5 * dt};
    const double total = -std::expm1(-z) / lambda;
    // (1 − (1 + z) e^{−z}) / z², by its series when z is small.
    double first_moment = 0.0;
    if (z < 0.1) {
        double term = 1.0;
        for (int n = 2; n < 20; ++n) {
            term = n == 2 ? 0.5 : term * (-z) / n;
            first_moment += term * (n - 1);
        }
    } else {
        first_moment = (1.0 - (1.0 + z) * std::exp(-z)) / (z * z);
    }
    const double right = first_moment * dt;
    return {std::exp(-z), total - right, right};
}

}  // namespace

HJBSolution solve_hjb_picard(const Problem& p, const SolverConfig& cfg) {
    require_valid(p);
    const std::size_t ns = p.num_states();
    const std::size_t na = p.num_actions();
    const TimeGrid grid{p.horizon, cfg.n_steps};
    const std::size_t N = grid.n_steps;
    const double lambda = rate_bound(p);
    const CellWeights w = cell_weights(lambda, grid.dt());

    std::vector<double> cost((N + 1) * ns * na);
    for (std::size_t k = 0; k <= N; ++k)
        for (std::size_t x = 0; x < ns; ++x)
            for (std::size_t a = 0; a < na; ++a) cost[(k * ns + x) * na + a] = cost_at(p, grid.time(k), x, a);

    std::vector<double> cur((N + 1) * ns), next((N + 1) * ns), h((N + 1) * ns);
    for (std::size_t k = 0; k <= N; ++k)
        std::copy(p.terminal_cost.begin(), p.terminal_cost.end(), cur.begin() + static_cast<std::ptrdiff_t>(k * ns));

    HJBSolution sol;
    for (std::size_t iter = 1;; ++iter) {
        for (std::size_t k = 0; k <= N; ++k) {
            const double* layer = cur.data() + k * ns;
            for (std::size_t x = 0; x < ns; ++x) {
                double best = 0.0;
                for (std::size_t a = 0; a < na; ++a) {
                    const auto row = p.rate_row(x, a);
                    double gamma = cost[(k * ns + x) * na + a];
                    double exit = 0.0;
                    for (std::size_t y = 0; y < ns; ++y) {
                        gamma += layer[y] * row[y];
                        exit += row[y];
                    }
                    gamma += (lambda - exit) * layer[x];
                    if (a == 0 || gamma > best) best = gamma;
                }
                h[k * ns + x] = best;
            }
        }

        std::copy(p.terminal_cost.begin(), p.terminal_cost.end(), next.begin() + static_cast<std::ptrdiff_t>(N * ns));
        for (std::size_t k = N; k-- > 0;)
            for (std::size_t x = 0; x < ns; ++x)
                next[k * ns + x] = w.decay * next[(k + 1) * ns + x] + w.left * h[k * ns + x] +
                                   w.right * h[(k + 1) * ns + x];

        double residual = 0.0, residual_scaled = 0.0;
        for (std::size_t k = 0; k <= N; ++k) {
            const double scale = std::exp(-lambda * grid.time(k));
            for (std::size_t x = 0; x < ns; ++x) {
                const double d = std::abs(next[k * ns + x] - cur[k * ns + x]);
                residual = std::max(residual, d);
                residual_scaled = std::max(residual_scaled, d * scale);
            }
        }
        cur.swap(next);
        sol.residual_history.push_back(residual);
        sol.iterations = iter;
        sol.residual = residual;
        sol.residual_scaled = residual_scaled;

        if (residual < cfg.picard_tol) break;
        if (iter >= cfg.picard_max_iter) {
            std::ostringstream os;
            os << "Picard iteration did not converge in " << iter << " sweeps (residual " << residual << ")";
            throw NonConvergenceError(os.str(), iter, residual);
        }
    }

    sol.value = ValueGrid(grid, 0, ns);
    std::copy(cur.begin(), cur.end(), sol.value.layer(0).begin());
    fill_argmax(p, sol);
    return sol;
}

HJBSolution solve_hjb_marching(const Problem& p, std::size_t n_steps, std::size_t substeps) {
    require_valid(p);
    const std::size_t ns = p.num_states();
    const TimeGrid grid{p.horizon, n_steps};
    const double dt = grid.dt();
    if (substeps == 0) {
        const double ratio = dt * rate_bound(p) / 0.5;
        substeps = ratio <= 1.0 ? 1 : static_cast<std::size_t>(std::ceil(ratio));
    }
    const double h = dt / static_cast<double>(substeps);

    HJBSolution sol;
    sol.value = ValueGrid(grid, 0, ns);
    std::vector<double> u(p.terminal_cost);
    std::copy(u.begin(), u.end(), sol.value.layer(n_steps).begin());
    for (std::size_t k = n_steps; k-- > 0;) {
        for (std::size_t j = substeps; j-- > 0;) {
            const double s = j == 0 ? grid.time(k) : grid.time(k) + static_cast<double>(j) * h;
            const auto ham = hamiltonian(p, s, u);
            for (std::size_t x = 0; x < ns; ++x) u[x] += h * ham.values[x];
        }
        std::copy(u.begin(), u.end(), sol.value.layer(k).begin());
    }
    fill_argmax(p, sol);
    return sol;
}

FeedbackPolicy extract_feedback(const HJBSolution& sol, double epsilon) {
    const auto& grid = sol.value.grid();
    const std::size_t ns = sol.value.states();
    FeedbackPolicy policy{grid, ns, {}, epsilon};
    policy.table.assign(sol.argmax.begin(),
                        sol.argmax.begin() + static_cast<std::ptrdiff_t>(grid.n_steps * ns));
    return policy;
}

}  // namespace jumpctl

#include "jumpctl/linear.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "jumpctl/errors.hpp"
#include "jumpctl/rng.hpp"

namespace jumpctl {

RunningCostFn problem_cost(const Problem& p) {
    return [&p](double t, std::size_t x, std::size_t a) { return cost_at(p, t, x, a); };
}

RunningCostFn zero_cost() {
    return [](double, std::size_t, std::size_t) { return 0.0; };
}

namespace {

std::size_t substeps_for(double dt, double rate) {
    const double ratio = dt * rate / 0.5;
    return ratio <= 1.0 ? 1 : static_cast<std::size_t>(std::ceil(ratio));
}

/// Marches `v` from its terminal layer down to its start index. rhs(s, k, u, out)
/// writes G(s, u) for cell k where du/ds = −G.
template <typename Rhs>
void rk4_backward(ValueGrid& v, double rate, Rhs&& rhs) {
    const TimeGrid& grid = v.grid();
    const std::size_t m = substeps_for(grid.dt(), rate);
    const double h = grid.dt() / static_cast<double>(m);
    const std::size_t n = v.states() * v.actions();

    std::vector<double> u(n), tmp(n), k1(n), k2(n), k3(n), k4(n);
    auto layer_end = v.layer(grid.n_steps);
    u.assign(layer_end.begin(), layer_end.end());

    for (std::size_t k = grid.n_steps; k-- > v.start_index();) {
        const double t_hi = grid.time(k + 1);
        for (std::size_t j = 0; j < m; ++j) {
            const double s = t_hi - static_cast<double>(j) * h;
            const double s_mid = s - 0.5 * h;
            const double s_lo = j + 1 == m ? grid.time(k) : s - h;
            rhs(s, k, u, k1);
            for (std::size_t i = 0; i < n; ++i) tmp[i] = u[i] + 0.5 * h * k1[i];
            rhs(s_mid, k, tmp, k2);
            for (std::size_t i = 0; i < n; ++i) tmp[i] = u[i] + 0.5 * h * k2[i];
            rhs(s_mid, k, tmp, k3);
            for (std::size_t i = 0; i < n; ++i) tmp[i] = u[i] + h * k3[i];
            rhs(s_lo, k, tmp, k4);
            for (std::size_t i = 0; i < n; ++i)
                u[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        auto layer = v.layer(k);
        std::copy(u.begin(), u.end(), layer.begin());
    }
}

}  // namespace

ValueGrid solve_kolmogorov(const Problem& p, const FeedbackPolicy& alpha,
                           std::span<const double> terminal, const RunningCostFn& running,
                           double t) {
    const std::size_t ns = p.num_states();
    if (terminal.size() != ns) throw GridMismatchError("terminal vector must have |E| entries");
    if (alpha.states != ns || alpha.table.size() != alpha.grid.n_steps * ns)
        throw GridMismatchError("policy shape does not match the problem");
    if (std::abs(alpha.grid.horizon - p.horizon) > 1e-12 * p.horizon)
        throw GridMismatchError("policy horizon does not match the problem");

    ValueGrid v(alpha.grid, alpha.grid.node(t), ns);
    for (std::size_t x = 0; x < ns; ++x) v.at(alpha.grid.n_steps, x) = terminal[x];

    rk4_backward(v, rate_bound(p), [&](double s, std::size_t k, const std::vector<double>& u,
                                       std::vector<double>& out) {
        for (std::size_t x = 0; x < ns; ++x) {
            const std::size_t a = alpha.at(k, x);
            double acc = running(s, x, a);
            const auto row = p.rate_row(x, a);
            for (std::size_t y = 0; y < ns; ++y) acc += (u[y] - u[x]) * row[y];
            out[x] = acc;
        }
    });
    return v;
}

ValueGrid evaluate_policy(const Problem& p, const FeedbackPolicy& alpha, double t) {
    return solve_kolmogorov(p, alpha, p.terminal_cost, problem_cost(p), t);
}

ValueGrid solve_kolmogorov_pair(const Problem& p, TimeGrid grid,
                                std::span<const double> terminal_pair,
                                const RunningCostFn& running, double t) {
    const std::size_t ns = p.num_states();
    const std::size_t na = p.num_actions();
    if (terminal_pair.size() != ns * na)
        throw GridMismatchError("pair terminal vector must have |E|*|A| entries");

    ValueGrid v(grid, grid.node(t), ns, na);
    v.mark_pair();
    std::copy(terminal_pair.begin(), terminal_pair.end(), v.layer(grid.n_steps).begin());

    rk4_backward(v, pair_rate_bound(p), [&](double s, std::size_t, const std::vector<double>& u,
                                            std::vector<double>& out) {
        for (std::size_t x = 0; x < ns; ++x)
            for (std::size_t a = 0; a < na; ++a) {
                const double here = u[x * na + a];
                double acc = running(s, x, a);
                const auto row = p.rate_row(x, a);
                for (std::size_t y = 0; y < ns; ++y) acc += (u[y * na + a] - here) * row[y];
                for (std::size_t b = 0; b < na; ++b) acc += (u[x * na + b] - here) * p.lambda0[b];
                out[x * na + a] = acc;
            }
    });
    return v;
}

MarkovCheck mc_check_markov(const Problem& p, const FeedbackPolicy& alpha, double t,
                            std::size_t x, double s, std::span<const double> terminal,
                            std::size_t paths, std::uint64_t seed, std::size_t workers) {
    if (!(t <= s && s <= p.horizon)) throw std::domain_error("mc_check_markov requires t <= s <= T");
    const ValueGrid transition = solve_kolmogorov(p, alpha, terminal, zero_cost(), 0.0);

    std::vector<double> two_stage(paths), direct(paths), diff(paths);
    parallel_for(paths, workers, [&](std::size_t i) {
        const Path path = simulate_controlled_path(p, alpha, t, x, derive_seed(seed, i));
        const std::size_t x_s = s >= p.horizon ? path.terminal_state() : path.state_at(s);
        two_stage[i] = transition.value(s, x_s);
        direct[i] = terminal[path.terminal_state()];
        diff[i] = two_stage[i] - direct[i];
    });
    return {summarize(two_stage), summarize(direct), summarize(diff), transition.value(t, x)};
}

}  // namespace jumpctl

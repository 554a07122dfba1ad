#include "jumpctl/simulate.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "jumpctl/errors.hpp"
#include "jumpctl/rng.hpp"

namespace jumpctl {

std::size_t Path::state_at(double s) const {
    std::size_t state = initial_state;
    for (const auto& j : jumps) {
        if (j.time >= s) break;
        state = j.state;
    }
    return state;
}

std::size_t Path::action_at(double s) const {
    std::size_t action = initial_action;
    for (const auto& j : jumps) {
        if (j.time >= s) break;
        action = j.action;
    }
    return action;
}

bool Path::well_formed(std::size_t states, std::size_t actions) const {
    if (initial_state >= states || (pair && initial_action >= actions)) return false;
    double prev = start_time;
    for (const auto& j : jumps) {
        if (!(j.time > prev) || j.time > horizon) return false;
        if (j.state >= states || j.action >= actions) return false;
        prev = j.time;
    }
    return true;
}

FeedbackPolicy constant_policy(TimeGrid grid, std::size_t states, std::size_t action) {
    return {grid, states, std::vector<std::size_t>(grid.n_steps * states, action)};
}

IntensityControl constant_control(TimeGrid grid, std::size_t states, std::size_t actions,
                                  double level) {
    IntensityControl nu{grid, states, actions, level, {}};
    nu.values.assign(grid.n_steps * states * actions * actions, level);
    return nu;
}

void validate_control(const Problem& p, const IntensityControl& nu) {
    if (nu.states != p.num_states() || nu.actions != p.num_actions() ||
        nu.values.size() != nu.grid.n_steps * nu.states * nu.actions * nu.actions)
        throw std::invalid_argument("intensity control shape does not match the problem");
    if (std::abs(nu.grid.horizon - p.horizon) > 1e-12 * p.horizon)
        throw std::invalid_argument("intensity control horizon does not match the problem");
    for (double v : nu.values)
        if (!(v >= kNuMin && v <= nu.bound))
            throw std::invalid_argument("intensity control value outside [nu_min, bound]");
}

namespace {

std::size_t jump_cap(double rate, double duration) {
    return static_cast<std::size_t>(std::ceil(100.0 * rate * duration)) + 1000;
}

void push_checked(Path& path, Jump jump, std::size_t cap) {
    if (path.jumps.size() >= cap) {
        std::ostringstream os;
        os << "path exceeded the jump cap of " << cap << " (seed " << path.seed << ", time "
           << jump.time << ")";
        throw ExplosionError(os.str());
    }
    path.jumps.push_back(jump);
}

Path start_path(const Problem& p, double t, std::size_t x, std::size_t a, bool pair,
                std::uint64_t seed) {
    if (!(t >= 0.0 && t <= p.horizon)) throw std::domain_error("start time outside [0, T]");
    if (x >= p.num_states() || a >= p.num_actions()) throw std::out_of_range("initial mark out of range");
    Path path;
    path.start_time = t;
    path.horizon = p.horizon;
    path.initial_state = x;
    path.initial_action = a;
    path.pair = pair;
    path.seed = seed;
    return path;
}

}  // namespace

Path simulate_controlled_path(const Problem& p, const FeedbackPolicy& alpha, double t,
                              std::size_t x, std::uint64_t seed) {
    Path path = start_path(p, t, x, alpha.action(t, x), false, seed);
    const double bound = rate_bound(p);
    if (bound <= 0.0) return path;

    Rng rng(seed);
    const std::size_t cap = jump_cap(bound, p.horizon - t);
    double s = t;
    std::size_t state = x;
    for (;;) {
        s += rng.exponential(bound);
        if (s > p.horizon) break;
        const std::size_t a = alpha.action(s, state);
        const double exit = p.exit_rate(state, a);
        if (rng.uniform() * bound >= exit) continue;
        state = rng.categorical(p.rate_row(state, a), exit);
        push_checked(path, {s, state, a}, cap);
    }
    return path;
}

Path simulate_pair_path(const Problem& p, double t, std::size_t x, std::size_t a,
                        std::uint64_t seed) {
    Path path = start_path(p, t, x, a, true, seed);
    Rng rng(seed);
    const double l0 = p.lambda0_total();
    const std::size_t cap = jump_cap(pair_rate_bound(p), p.horizon - t);
    double s = t;
    std::size_t state = x;
    std::size_t action = a;
    for (;;) {
        const double exit = p.exit_rate(state, action);
        const double total = exit + l0;
        s += rng.exponential(total);
        if (s > p.horizon) break;
        if (rng.uniform() * total < exit)
            state = rng.categorical(p.rate_row(state, action), exit);
        else
            action = rng.categorical(p.lambda0, l0);
        push_checked(path, {s, state, action}, cap);
    }
    return path;
}

Path simulate_tilted_path(const Problem& p, const IntensityControl& nu, double t, std::size_t x,
                          std::size_t a, std::uint64_t seed) {
    Path path = start_path(p, t, x, a, true, seed);
    Rng rng(seed);
    const double l0 = p.lambda0_total();
    const double i_bound = nu.bound * l0;
    const std::size_t cap = jump_cap(rate_bound(p) + i_bound, p.horizon - t);
    double s = t;
    std::size_t state = x;
    std::size_t action = a;
    for (;;) {
        const double exit = p.exit_rate(state, action);
        const double total = exit + i_bound;
        s += rng.exponential(total);
        if (s > p.horizon) break;
        if (rng.uniform() * total < exit) {
            state = rng.categorical(p.rate_row(state, action), exit);
        } else {
            const std::size_t b = rng.categorical(p.lambda0, l0);
            if (rng.uniform() * nu.bound >= nu.value(s, state, action, b)) continue;
            action = b;
        }
        push_checked(path, {s, state, action}, cap);
    }
    return path;
}

void write_paths_csv(std::ostream& os, std::span<const Path> paths, const Problem& p) {
    os << "path_id,jump_index,time,X_mark,I_mark\n";
    os << std::setprecision(17);
    for (std::size_t id = 0; id < paths.size(); ++id) {
        const Path& path = paths[id];
        os << id << ",0," << path.start_time << ',' << p.states[path.initial_state] << ',';
        if (path.pair) os << p.actions[path.initial_action];
        os << '\n';
        for (std::size_t n = 0; n < path.jumps.size(); ++n) {
            const Jump& j = path.jumps[n];
            os << id << ',' << n + 1 << ',' << j.time << ',' << p.states[j.state] << ',';
            if (path.pair) os << p.actions[j.action];
            os << '\n';
        }
    }
}

}  // namespace jumpctl

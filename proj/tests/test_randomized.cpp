#include <doctest.h>

#include <cmath>
#include <sstream>

#include "jumpctl/errors.hpp"
#include "jumpctl/hjb.hpp"
#include "jumpctl/linear.hpp"
#include "jumpctl/randomized.hpp"
#include "jumpctl/rng.hpp"
#include "support.hpp"

using namespace jumpctl;

namespace {

const TimeGrid kGrid{1.0, 50};

/// ν(t,x,a,b) = 1 + 0.5 1{b = 0}.
IntensityControl favour_first(const Problem& p, TimeGrid grid = kGrid) {
    IntensityControl nu = constant_control(grid, p.num_states(), p.num_actions(), 1.0);
    nu.bound = 1.5;
    for (std::size_t k = 0; k < grid.n_steps; ++k)
        for (std::size_t x = 0; x < p.num_states(); ++x)
            for (std::size_t a = 0; a < p.num_actions(); ++a) nu.at(k, x, a, 0) = 1.5;
    return nu;
}

/// A time-constant field that depends on (x, a, b).
IntensityControl patterned(const Problem& p, TimeGrid grid = kGrid) {
    const std::size_t ns = p.num_states(), na = p.num_actions();
    IntensityControl nu = constant_control(grid, ns, na, 1.0);
    nu.bound = 3.0;
    for (std::size_t k = 0; k < grid.n_steps; ++k)
        for (std::size_t x = 0; x < ns; ++x)
            for (std::size_t a = 0; a < na; ++a)
                for (std::size_t b = 0; b < na; ++b) nu.at(k, x, a, b) = 0.25 + static_cast<double>((x + 2 * a + 3 * b) % 4) * 0.9;
    return nu;
}

/// Exact J(0,x,a,ν) for a time-constant ν and running cost: exponential of the
/// tilted pair generator on E x A, augmented with the cost accumulator.
double tilted_pair_value(const Problem& p, const IntensityControl& nu, std::size_t x0, std::size_t a0) {
    const std::size_t ns = p.num_states(), na = p.num_actions(), n = ns * na;
    testing::Matrix m(n + 1, std::vector<double>(n + 1, 0.0));
    for (std::size_t x = 0; x < ns; ++x)
        for (std::size_t a = 0; a < na; ++a) {
            const std::size_t i = x * na + a;
            for (std::size_t y = 0; y < ns; ++y) {
                m[i][y * na + a] += p.rate(x, a, y);
                m[i][i] -= p.rate(x, a, y);
            }
            for (std::size_t b = 0; b < na; ++b) {
                const double r = nu.at(0, x, a, b) * p.lambda0[b];
                m[i][x * na + b] += r;
                m[i][i] -= r;
            }
            m[i][n] = p.running_cost[x * na + a];
        }
    for (auto& row : m)
        for (double& v : row) v *= p.horizon;
    const testing::Matrix e = testing::expm(m);
    const std::size_t i0 = x0 * na + a0;
    double value = e[i0][n];
    for (std::size_t x = 0; x < ns; ++x)
        for (std::size_t a = 0; a < na; ++a) value += e[i0][x * na + a] * p.terminal_cost[x];
    return value;
}

McOptions mc(std::size_t paths, std::uint64_t seed) { return {paths, seed, 8}; }

}  // namespace

TEST_SUITE("randomized") {

TEST_CASE("mark split cases") {
    Problem p = testing::m2();
    DSplit d = d_split(p, 0, 1, 1, 1);  // X-jump 0 → 1 under action "2"
    CHECK(d.d1 == 0.0);
    CHECK(d.d2 == 1.0);
    d = d_split(p, 0, 1, 0, 0);  // I-jump to action "1"
    CHECK(d.d1 == 1.0);
    CHECK(d.d2 == 0.0);

    Problem q = testing::uniform(2, 2, 0.0);
    q.lambda0 = {1.0, 1.0};
    q.rates[0] = 3.0;  // λ(0, 0, {0})
    d = d_split(q, 0, 0, 0, 0);
    CHECK(d.d1 == doctest::Approx(0.25));
    CHECK(d.d2 == doctest::Approx(0.75));

    CHECK_THROWS_AS(d_split(p, 0, 1, 1, 0), ImpossibleMarkError);  // X and I jumping together
    CHECK_THROWS_AS(d_split(p, 1, 0, 0, 0), ImpossibleMarkError);  // no rate out of the absorbing state
}

TEST_CASE("split sums to one at every simulated mark") {
    const Problem p = testing::fixture("random3.json");
    bool ok = true;
    for (std::uint64_t s = 0; s < 500; ++s) {
        const Path path = simulate_pair_path(p, 0.0, s % 3, s % 2, s);
        std::size_t x = path.initial_state, a = path.initial_action;
        for (const Jump& j : path.jumps) {
            const DSplit d = d_split(p, x, a, j.state, j.action);
            ok = ok && d.d1 >= 0.0 && d.d2 >= 0.0 && std::abs(d.d1 + d.d2 - 1.0) <= 1e-15;
            x = j.state;
            a = j.action;
        }
    }
    CHECK(ok);
}

TEST_CASE("no tilt gives weight one on every path") {
    const Problem p = testing::fixture("random3.json");
    const IntensityControl one = constant_control(kGrid, 3, 2, 1.0);
    for (std::uint64_t s = 0; s < 300; ++s) {
        const GirsanovWeight w = girsanov_weight(p, one, simulate_pair_path(p, 0.1, 0, 1, s));
        CHECK(w.weight == 1.0);
        CHECK(w.log_weight == 0.0);
    }
}

TEST_CASE("jump-free path carries only the exponential factor") {
    const Problem p = testing::m2();
    Path path;
    path.pair = true;
    path.start_time = 0.2;
    path.horizon = 1.0;
    path.initial_state = 1;
    path.initial_action = 0;
    const double c = 2.5;
    const IntensityControl nu = constant_control(kGrid, 2, 2, c);
    const GirsanovWeight w = girsanov_weight(p, nu, path);
    CHECK(w.weight == doctest::Approx(std::exp((1.0 - c) * 1.0 * 0.8)).epsilon(1e-14));
}

TEST_CASE("weight grows by the tilt at an I-jump") {
    const Problem p = testing::m2();
    Path path;
    path.pair = true;
    path.horizon = 1.0;
    path.initial_state = 1;
    path.initial_action = 0;
    path.jumps = {{0.5, 1, 1}};
    const IntensityControl nu = patterned(p);
    // Before the jump (x=1, a=0): Σ_b ν λ₀; after (x=1, a=1).
    auto rate = [&](std::size_t x, std::size_t a) { return nu.at(0, x, a, 0) * 0.7 + nu.at(0, x, a, 1) * 0.3; };
    const double expect = 0.5 * (1.0 - rate(1, 0)) + 0.5 * (1.0 - rate(1, 1)) + std::log(nu.at(0, 1, 0, 1));
    CHECK(girsanov_weight(p, nu, path).log_weight == doctest::Approx(expect).epsilon(1e-13));
}

TEST_CASE("control on another grid horizon is rejected") {
    const Problem p = testing::m2();
    const IntensityControl nu = constant_control(TimeGrid{2.0, 10}, 2, 2, 1.0);
    CHECK_THROWS_AS(girsanov_weight(p, nu, simulate_pair_path(p, 0.0, 0, 0, 1)), GridMismatchError);
}

TEST_CASE("density has mean one") {
    const Problem p = testing::m2();
    const Estimate e = girsanov_mean(p, favour_first(p), 0.0, 0, 0, mc(100000, 31));
    CHECK(std::abs(e.mean - 1.0) <= 3.0 * e.std_error);
    const Estimate f = girsanov_mean(p, patterned(p), 0.0, 0, 1, mc(100000, 32));
    CHECK(std::abs(f.mean - 1.0) <= 3.0 * f.std_error);
}

TEST_CASE("estimates do not depend on the worker count") {
    const Problem p = testing::fixture("random3.json");
    McOptions one{3000, 5, 1}, many{3000, 5, 7};
    const Estimate a = dual_gain_importance(p, patterned(p), 0.0, 2, 0, one);
    const Estimate b = dual_gain_importance(p, patterned(p), 0.0, 2, 0, many);
    CHECK(a.mean == b.mean);
    CHECK(a.std_error == b.std_error);
}

TEST_CASE("untilted gain equals the pair Feynman-Kac value") {
    const Problem p = testing::fixture("random3.json");
    const IntensityControl one = constant_control(kGrid, 3, 2, 1.0);
    std::vector<double> g_pair;
    for (double g : p.terminal_cost) g_pair.insert(g_pair.end(), {g, g});
    const ValueGrid v = solve_kolmogorov_pair(p, TimeGrid{1.0, 200}, g_pair, problem_cost(p));
    const Estimate w = dual_gain_importance(p, one, 0.0, 1, 0, mc(50000, 41));
    const Estimate d = dual_gain_direct(p, one, 0.0, 1, 0, mc(50000, 42));
    CHECK(std::abs(w.mean - v.at(0, 1, 0)) <= 3.0 * w.std_error);
    CHECK(std::abs(d.mean - v.at(0, 1, 0)) <= 3.0 * d.std_error);
}

TEST_CASE("both estimators agree with the exact tilted value") {
    const Problem p = testing::fixture("random3.json");
    const IntensityControl nu = patterned(p);
    for (std::size_t a = 0; a < 2; ++a) {
        const double exact = tilted_pair_value(p, nu, 0, a);
        const Estimate w = dual_gain_importance(p, nu, 0.0, 0, a, mc(50000, 50 + a));
        const Estimate d = dual_gain_direct(p, nu, 0.0, 0, a, mc(50000, 60 + a));
        CHECK(std::abs(w.mean - exact) <= 3.0 * w.std_error);
        CHECK(std::abs(d.mean - exact) <= 3.0 * d.std_error);
        CHECK(std::abs(w.mean - d.mean) <= 3.0 * combined_se(w, d));
    }
}

TEST_CASE("importance and direct estimators agree on M2 with a non-constant control") {
    const Problem p = testing::m2();
    const IntensityControl nu = patterned(p);
    const Estimate w = dual_gain_importance(p, nu, 0.0, 0, 0, mc(100000, 71));
    const Estimate d = dual_gain_direct(p, nu, 0.0, 0, 0, mc(100000, 72));
    CHECK(std::abs(w.mean - d.mean) <= 3.0 * combined_se(w, d));
}

TEST_CASE("constant payoff") {
    Problem p = testing::m2();
    p.terminal_cost = {2.0, 2.0};
    const IntensityControl nu = favour_first(p);
    const Estimate w = dual_gain_importance(p, nu, 0.0, 0, 1, mc(50000, 81));
    CHECK(std::abs(w.mean - 2.0) <= 3.0 * w.std_error);
    const Estimate d = dual_gain_direct(p, nu, 0.0, 0, 1, mc(1000, 82));
    CHECK(d.mean == 2.0);
    CHECK(d.std_error == 0.0);
}

TEST_CASE("greedy control raises the intensity toward better actions") {
    const Problem p = testing::m2();
    const PenalizedSolution vn = solve_penalized(p, 8, 100);
    const IntensityControl nu = greedy_control(p, vn);
    CHECK(nu.bound == 8.0);
    CHECK_NOTHROW(validate_control(p, nu));
    // The last cell reads the terminal layer, where every action ties.
    CHECK(nu.at(99, 0, 0, 1) == kNuMin);
    for (std::size_t k = 0; k < 99; ++k) {
        CHECK(nu.at(k, 0, 0, 1) == 8.0);     // from action "1" toward the faster action
        CHECK(nu.at(k, 0, 1, 0) == kNuMin);  // never toward the slower one
        CHECK(nu.at(k, 0, 0, 0) == kNuMin);
        CHECK(nu.at(k, 1, 0, 1) == kNuMin);  // absorbing state: no preference
    }
}

TEST_CASE("greedy control at level 64 attains the penalized value on M2") {
    const Problem p = testing::m2();
    const PenalizedSolution vn = solve_penalized(p, 64, 2000);
    const IntensityControl nu = greedy_control(p, vn);
    for (std::size_t a = 0; a < 2; ++a) {
        const Estimate e = dual_gain_direct(p, nu, 0.0, 0, a, mc(20000, 90 + a));
        MESSAGE("greedy from a=" << a << ": " << e.mean << " +- " << e.std_error << " vs v^n " << vn.value.at(0, 0, a));
        CHECK(e.mean >= vn.value.at(0, 0, a) - 3.0 * e.std_error - 1e-2);
    }
}

TEST_CASE("dual value check on M2") {
    const Problem p = testing::m2();
    SolverConfig cfg;
    const HJBSolution primal = solve_hjb_picard(p, cfg);
    const auto levels = solve_penalized_levels(p, std::vector<int>{64, 256}, 2000);
    const std::vector<NamedControl> controls{{"unit", constant_control(kGrid, 2, 2, 1.0)},
                                             {"patterned", patterned(p)}};
    const DualCheckReport r = dual_value_check(p, primal, levels, 0.0, 0, controls, mc(10000, 100));
    for (const auto& f : r.failures) MESSAGE(f);
    CHECK(r.pass());
    CHECK(r.estimators_agree);
    CHECK(r.weak_duality);
    CHECK(r.greedy_attains);
    CHECK(r.action_independent);
    CHECK(r.rows.size() == 2 * 2 * 2 + 2 * 2);
    for (double g : r.best_gain) CHECK(g <= r.primal_value + 0.02);

    std::ostringstream os;
    write_dual_csv(os, r, p);
    CHECK(os.str().rfind("control_id,start_a,estimator,mean,std_error,n_paths\nunit,1,direct,", 0) == 0);
    CHECK(os.str().find("greedy_n256,2,direct,") != std::string::npos);
}

}  // TEST_SUITE

#include <doctest.h>

#include <cmath>
#include <sstream>

#include "jumpctl/errors.hpp"
#include "jumpctl/hjb.hpp"
#include "jumpctl/penalized.hpp"
#include "support.hpp"

using namespace jumpctl;

namespace {

const std::vector<int> kLevels{1, 2, 4, 8, 16, 32, 64, 128, 256};

}  // namespace

TEST_SUITE("penalized") {

TEST_CASE("penalty vanishes on action-independent layers") {
    const std::vector<double> layer{1.0, 1.0, -2.0, -2.0};
    const std::vector<double> l0{0.3, 0.9};
    for (std::size_t x = 0; x < 2; ++x)
        for (std::size_t a = 0; a < 2; ++a) CHECK(penalty_term(layer, 2, x, a, l0, 17.0) == 0.0);
}

TEST_CASE("penalty hand value and linearity in the base intensity") {
    const std::vector<double> layer{0.0, 1.0};
    const std::vector<double> l0{1.0, 1.0};
    CHECK(penalty_term(layer, 2, 0, 0, l0, 3.0) == doctest::Approx(2.0));
    // From the better action only the −ψ part survives.
    CHECK(penalty_term(layer, 2, 0, 1, l0, 3.0) == doctest::Approx(1.0));
    const std::vector<double> scaled{2.5, 2.5};
    CHECK(penalty_term(layer, 2, 0, 0, scaled, 3.0) == doctest::Approx(2.5 * 2.0));
}

TEST_CASE("sub-stepping follows the stability rule") {
    const Problem p = testing::m2();  // Λ_pair = 3, λ₀(A) = 1
    CHECK(required_substeps(p, 1, 2000) == 1);
    CHECK(required_substeps(p, 256, 100) == static_cast<std::size_t>(std::ceil(0.01 * (3.0 + 257.0) / 0.5)));
    const PenalizedSolution s = solve_penalized(p, 256, 100);
    CHECK(s.substeps == required_substeps(p, 256, 100));
    CHECK(s.value.grid().n_steps == 100 * s.substeps);
    CHECK(solve_penalized(p, 1, 100, 7).substeps == 7);
}

TEST_CASE("a-flat model: penalized values equal the single-action value") {
    const Problem p = testing::flat();
    const PenalizedSolution vn = solve_penalized(p, 16, 2000);
    const HJBSolution same_grid = solve_hjb_marching(p, vn.value.grid().n_steps, 1);
    for (std::size_t k = 0; k <= vn.value.grid().n_steps; ++k)
        for (std::size_t x = 0; x < 3; ++x)
            for (std::size_t a = 0; a < 2; ++a) CHECK(std::abs(vn.value.at(k, x, a) - same_grid.value.at(k, x)) <= 1e-12);

    // Against the exact single-action value, after removing the first-order Euler error.
    const PenalizedSolution fine = solve_penalized(p, 16, 4000);
    const auto exact = testing::constant_action_value(p, 0, 1.0);
    for (std::size_t x = 0; x < 3; ++x)
        for (std::size_t a = 0; a < 2; ++a) {
            const double extrapolated = 2.0 * fine.value.at(0, x, a) - vn.value.at(0, x, a);
            CHECK(std::abs(extrapolated - exact[x]) <= 1e-6);
        }
}

TEST_CASE("M2 at level 64") {
    const Problem p = testing::m2();
    SolverConfig cfg;
    cfg.n_steps = 4000;
    const HJBSolution v = solve_hjb_picard(p, cfg);
    const PenalizedSolution vn = solve_penalized(p, 64, 4000);
    REQUIRE(vn.substeps == 1);
    for (std::size_t x = 0; x < 2; ++x) {
        const double top = std::max(vn.value.at(0, x, 0), vn.value.at(0, x, 1));
        CHECK(std::abs(top - v.value.at(0, x)) <= 0.05);
    }
    // Pointwise cap against the primal marched by the same scheme on the same grid.
    const HJBSolution march = solve_hjb_marching(p, 4000, 1);
    double euler_bias = 0.0;
    for (std::size_t i = 0; i < v.value.data().size(); ++i)
        euler_bias = std::max(euler_bias, march.value.data()[i] - v.value.data()[i]);
    double cap_excess = 0.0, picard_excess = 0.0;
    for (std::size_t k = 0; k <= 4000; ++k)
        for (std::size_t x = 0; x < 2; ++x)
            for (std::size_t a = 0; a < 2; ++a) {
                cap_excess = std::max(cap_excess, vn.value.at(k, x, a) - march.value.at(k, x));
                picard_excess = std::max(picard_excess, vn.value.at(k, x, a) - v.value.at(k, x));
            }
    MESSAGE("excess over Picard " << picard_excess << ", Euler bias of the primal " << euler_bias);
    CHECK(cap_excess <= 1e-6);
    CHECK(picard_excess <= euler_bias + 1e-9);
}

TEST_CASE("without penalty each action is evaluated as a constant law") {
    const Problem p = testing::fixture("random3.json");
    const PenalizedSolution coarse = solve_penalized(p, 0, 2000);
    const PenalizedSolution fine = solve_penalized(p, 0, 4000);
    REQUIRE(coarse.substeps == fine.substeps);
    for (std::size_t a = 0; a < 2; ++a) {
        const auto exact = testing::constant_action_value(p, a, 1.0);
        for (std::size_t x = 0; x < 3; ++x) {
            const double extrapolated = 2.0 * fine.value.at(0, x, a) - coarse.value.at(0, x, a);
            CHECK(std::abs(extrapolated - exact[x]) <= 1e-6);
        }
    }
}

TEST_CASE("terminal layer and bound") {
    for (const char* name : {"m2.json", "random3.json", "flat.json"}) {
        const Problem p = testing::fixture(name);
        for (int n : {1, 32, 256}) {
            const PenalizedSolution vn = solve_penalized(p, n, 500);
            const std::size_t last = vn.value.grid().n_steps;
            for (std::size_t x = 0; x < p.num_states(); ++x)
                for (std::size_t a = 0; a < p.num_actions(); ++a) CHECK(vn.value.at(last, x, a) == p.terminal_cost[x]);
            CHECK(vn.value.sup_norm() <= value_bound(p) + 1e-8);
        }
    }
}

TEST_CASE("flat model report: no spread, no gap") {
    const ConvergenceReport r = convergence_report(testing::flat(), kLevels, 1000);
    for (const auto& row : r.rows) {
        CHECK(row.sigma == 0.0);
        CHECK(row.delta <= 1e-6);
    }
}

TEST_CASE("M2 and the random model converge monotonically from below") {
    for (const char* name : {"m2.json", "random3.json"}) {
        const ConvergenceReport r = convergence_report(testing::fixture(name), kLevels, 2000);
        REQUIRE(r.rows.size() == kLevels.size());
        CHECK(r.total_monotonicity_violations() == 0);
        CHECK(r.total_cap_violations() == 0);
        std::ostringstream trace;
        for (std::size_t i = 0; i < r.rows.size(); ++i) {
            trace << r.rows[i].level << ":" << r.rows[i].sigma << "/" << r.rows[i].delta << " ";
            if (i > 0) {
                CHECK(r.rows[i].sigma < r.rows[i - 1].sigma);
                CHECK(r.rows[i].delta < r.rows[i - 1].delta);
            }
        }
        MESSAGE(std::string(name) << " sigma/delta " << trace.str());
        CHECK(r.rows.back().sigma <= 0.1 * r.rows.front().sigma);
    }
}

TEST_CASE("report refuses solutions on different grids") {
    const Problem p = testing::m2();
    const std::vector<PenalizedSolution> mixed{solve_penalized(p, 1, 100), solve_penalized(p, 256, 100)};
    REQUIRE(mixed[0].substeps != mixed[1].substeps);
    CHECK_THROWS_AS(convergence_report(p, mixed), GridMismatchError);
    const auto levels = solve_penalized_levels(p, std::vector<int>{1, 256}, 100);
    CHECK(levels[0].substeps == levels[1].substeps);
    CHECK_NOTHROW(convergence_report(p, levels));
}

TEST_CASE("convergence CSV") {
    const ConvergenceReport r = convergence_report(testing::m2(), std::vector<int>{1, 2}, 100);
    std::ostringstream os;
    write_convergence_csv(os, r);
    const std::string text = os.str();
    CHECK(text.rfind("n,sigma_n,delta_n,monotonicity_violations,cap_violations\n", 0) == 0);
    CHECK(text.find("\n1,") != std::string::npos);
    CHECK(text.find("\n2,") != std::string::npos);
}

}  // TEST_SUITE

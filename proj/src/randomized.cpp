#include "jumpctl/randomized.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include "jumpctl/errors.hpp"
#include "jumpctl/rng.hpp"

namespace jumpctl {

DSplit d_split(const Problem& p, std::size_t x_pre, std::size_t i_pre, std::size_t y, std::size_t b) {
    const double m1 = y == x_pre ? p.lambda0[b] : 0.0;
    const double m2 = b == i_pre ? p.rate(x_pre, i_pre, y) : 0.0;
    const double total = m1 + m2;
    if (!(total > 0.0)) {
        std::ostringstream os;
        os << "mark (y=" << y << ", b=" << b << ") has zero compensator mass from (x=" << x_pre
           << ", a=" << i_pre << ")";
        throw ImpossibleMarkError(os.str());
    }
    return {m1 / total, m2 / total};
}

namespace {

/// ∫_{s0}^{s1} Σ_b (1 − ν(r, x, a, b)) λ₀[b] dr.
double tilt_exponent(const Problem& p, const IntensityControl& nu, std::size_t x, std::size_t a,
                   double s0, double s1) {
    if (s1 <= s0) return 0.0;
    const TimeGrid& grid = nu.grid;
    const std::size_t na = p.num_actions();
    double total = 0.0;
    std::size_t k = grid.cell(s0);
    double lo = s0;
    while (lo < s1) {
        const double hi = k + 1 >= grid.n_steps ? s1 : std::min(grid.time(k + 1), s1);
        double rate = 0.0;
        for (std::size_t b = 0; b < na; ++b) rate += (1.0 - nu.at(k, x, a, b)) * p.lambda0[b];
        total += rate * (hi - lo);
        lo = hi;
        ++k;
    }
    return total;
}

void check_control_grid(const Problem& p, const IntensityControl& nu) {
    if (std::abs(nu.grid.horizon - p.horizon) > 1e-12 * p.horizon || nu.states != p.num_states() ||
        nu.actions != p.num_actions())
        throw GridMismatchError("intensity control does not match the problem");
}

std::uint64_t stream_tag(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    return derive_seed(derive_seed(derive_seed(seed, a), b), c);
}

}  // namespace

GirsanovWeight girsanov_weight(const Problem& p, const IntensityControl& nu, const Path& path) {
    check_control_grid(p, nu);
    if (!path.pair) throw GridMismatchError("girsanov_weight needs a pair path");
    double log_w = 0.0;
    double s = path.start_time;
    std::size_t x = path.initial_state;
    std::size_t a = path.initial_action;
    for (const Jump& j : path.jumps) {
        log_w += tilt_exponent(p, nu, x, a, s, j.time);
        const DSplit d = d_split(p, x, a, j.state, j.action);
        log_w += std::log1p((nu.value(j.time, x, a, j.action) - 1.0) * d.d1);  // ν d1 + d2 with d1 + d2 = 1
        s = j.time;
        x = j.state;
        a = j.action;
    }
    log_w += tilt_exponent(p, nu, x, a, s, path.horizon);
    return {log_w, std::exp(log_w)};
}

double pair_payoff(const Problem& p, const Path& path) {
    double total = 0.0;
    double s = path.start_time;
    std::size_t x = path.initial_state;
    std::size_t a = path.initial_action;
    for (const Jump& j : path.jumps) {
        total += integrate_cost(p, x, a, s, j.time);
        s = j.time;
        x = j.state;
        a = j.action;
    }
    total += integrate_cost(p, x, a, s, path.horizon);
    return total + p.terminal_cost[x];
}

Estimate girsanov_mean(const Problem& p, const IntensityControl& nu, double t, std::size_t x,
                       std::size_t a, const McOptions& mc) {
    validate_control(p, nu);
    const auto samples = parallel_collect(mc.paths, mc.workers, [&](std::size_t i) {
        return girsanov_weight(p, nu, simulate_pair_path(p, t, x, a, derive_seed(mc.seed, i))).weight;
    });
    return summarize(samples);
}

Estimate dual_gain_importance(const Problem& p, const IntensityControl& nu, double t, std::size_t x,
                              std::size_t a, const McOptions& mc) {
    validate_control(p, nu);
    const auto samples = parallel_collect(mc.paths, mc.workers, [&](std::size_t i) {
        const Path path = simulate_pair_path(p, t, x, a, derive_seed(mc.seed, i));
        return girsanov_weight(p, nu, path).weight * pair_payoff(p, path);
    });
    return summarize(samples);
}

Estimate dual_gain_direct(const Problem& p, const IntensityControl& nu, double t, std::size_t x,
                          std::size_t a, const McOptions& mc) {
    validate_control(p, nu);
    const auto samples = parallel_collect(mc.paths, mc.workers, [&](std::size_t i) {
        return pair_payoff(p, simulate_tilted_path(p, nu, t, x, a, derive_seed(mc.seed, i)));
    });
    return summarize(samples);
}

IntensityControl greedy_control(const Problem& p, const PenalizedSolution& vn) {
    const ValueGrid& v = vn.value;
    const std::size_t ns = p.num_states();
    const std::size_t na = p.num_actions();
    const double top = std::max(static_cast<double>(vn.level), kNuMin);
    IntensityControl nu = constant_control(v.grid(), ns, na, kNuMin);
    nu.bound = top;
    for (std::size_t k = 0; k < v.grid().n_steps; ++k)
        for (std::size_t x = 0; x < ns; ++x)
            for (std::size_t a = 0; a < na; ++a)
                for (std::size_t b = 0; b < na; ++b)
                    if (v.at(k + 1, x, b) > v.at(k + 1, x, a)) nu.at(k, x, a, b) = top;
    return nu;
}

DualCheckReport dual_value_check(const Problem& p, const HJBSolution& primal,
                                 std::span<const PenalizedSolution> levels, double t, std::size_t x,
                                 std::span<const NamedControl> controls, const McOptions& mc) {
    const std::size_t na = p.num_actions();
    DualCheckReport report;
    report.primal_value = primal.value.value(t, x);
    report.best_gain.assign(na, -std::numeric_limits<double>::infinity());

    auto fail = [&](bool& flag, std::string message) {
        flag = false;
        report.failures.push_back(std::move(message));
    };
    auto options = [&](std::uint64_t tag_a, std::uint64_t tag_b, std::uint64_t tag_c) {
        McOptions o = mc;
        o.seed = stream_tag(mc.seed, tag_a, tag_b, tag_c);
        return o;
    };

    for (std::size_t c = 0; c < controls.size(); ++c) {
        const NamedControl& nc = controls[c];
        for (std::size_t a = 0; a < na; ++a) {
            const Estimate direct = dual_gain_direct(p, nc.control, t, x, a, options(1, c, a));
            const Estimate weighted = dual_gain_importance(p, nc.control, t, x, a, options(2, c, a));
            report.rows.push_back({nc.id, a, "direct", direct});
            report.rows.push_back({nc.id, a, "importance", weighted});
            report.best_gain[a] = std::max(report.best_gain[a], direct.mean);

            std::ostringstream where;
            where << nc.id << " from a=" << p.actions[a];
            if (std::abs(direct.mean - weighted.mean) > kSeMultiplier * combined_se(direct, weighted))
                fail(report.estimators_agree, "estimators disagree for " + where.str());
            for (const Estimate* e : {&direct, &weighted})
                if (e->mean > report.primal_value + kSeMultiplier * e->std_error + kWeakDualitySlack)
                    fail(report.weak_duality, "gain above the primal value for " + where.str());
        }
    }

    for (std::size_t l = 0; l < levels.size(); ++l) {
        const PenalizedSolution& vn = levels[l];
        const IntensityControl nu = greedy_control(p, vn);
        const std::string id = "greedy_n" + std::to_string(vn.level);
        std::vector<double> gains;
        double worst_se = 0.0;
        for (std::size_t a = 0; a < na; ++a) {
            const Estimate e = dual_gain_direct(p, nu, t, x, a, options(3, l, a));
            report.rows.push_back({id, a, "direct", e});
            report.best_gain[a] = std::max(report.best_gain[a], e.mean);
            gains.push_back(e.mean);
            worst_se = std::max(worst_se, e.std_error);

            std::ostringstream where;
            where << id << " from a=" << p.actions[a];
            if (e.mean < vn.value.value(t, x, a) - kSeMultiplier * e.std_error - kGreedySlack)
                fail(report.greedy_attains, "greedy control falls short of v^n for " + where.str());
            if (e.mean > report.primal_value + kSeMultiplier * e.std_error + kWeakDualitySlack)
                fail(report.weak_duality, "gain above the primal value for " + where.str());
        }
        if (l + 1 == levels.size()) {
            const double sigma = action_spread(vn.value);
            const auto [lo, hi] = std::minmax_element(gains.begin(), gains.end());
            if (*hi - *lo > sigma + 2.0 * kSeMultiplier * worst_se)
                fail(report.action_independent, "greedy gains depend on the start action for " + id);
        }
    }
    return report;
}

void write_dual_csv(std::ostream& os, const DualCheckReport& report, const Problem& p) {
    os << "control_id,start_a,estimator,mean,std_error,n_paths\n";
    os << std::setprecision(17);
    for (const auto& r : report.rows)
        os << r.control_id << ',' << p.actions[r.start_action] << ',' << r.estimator << ','
           << r.estimate.mean << ',' << r.estimate.std_error << ',' << r.estimate.n << '\n';
}

}  // namespace jumpctl

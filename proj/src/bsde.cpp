#include "jumpctl/bsde.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>

#include "jumpctl/errors.hpp"
#include "jumpctl/rng.hpp"

namespace jumpctl {

std::vector<double> BSDESample::y_checkpoints() const {
    std::vector<double> out;
    out.reserve(2 * jumps.size() + 2);
    out.push_back(y_start);
    for (const auto& j : jumps) {
        out.push_back(j.y_before);
        out.push_back(j.y_after);
    }
    out.push_back(y_terminal);
    return out;
}

double z_value(const PenalizedSolution& vn, double s, std::size_t x_pre, std::size_t a_pre,
               std::size_t y, std::size_t b) {
    return vn.value.value(s, y, b) - vn.value.value(s, x_pre, a_pre);
}

namespace {

/// Integrand pieces for a fixed position (x, a) evaluated on one layer.
struct Pieces {
    double compensator = 0.0;
    double lambda0_part = 0.0;
    double positive = 0.0;
};

Pieces pieces(const Problem& p, std::span<const double> layer, std::size_t x, std::size_t a) {
    const std::size_t ns = p.num_states();
    const std::size_t na = p.num_actions();
    const double here = layer[x * na + a];
    Pieces out;
    const auto row = p.rate_row(x, a);
    for (std::size_t y = 0; y < ns; ++y) out.compensator += (layer[y * na + a] - here) * row[y];
    for (std::size_t b = 0; b < na; ++b) {
        const double z = layer[x * na + b] - here;
        out.lambda0_part += z * p.lambda0[b];
        out.positive += std::max(z, 0.0) * p.lambda0[b];
    }
    out.compensator += out.lambda0_part;
    return out;
}

/// ∫_0^len max(0, z0 + (z1 − z0) r / len) dr.
double positive_part_integral(double z0, double z1, double len) {
    if (z0 >= 0.0 && z1 >= 0.0) return 0.5 * (z0 + z1) * len;
    if (z0 <= 0.0 && z1 <= 0.0) return 0.0;
    const double root = z0 / (z0 - z1) * len;
    return z0 > 0.0 ? 0.5 * z0 * root : 0.5 * z1 * (len - root);
}

struct Accumulator {
    double cost = 0.0;
    double compensator = 0.0;
    double lambda0_part = 0.0;
    double positive = 0.0;
};

void integrate_segment(const Problem& p, const ValueGrid& v, Quadrature q, std::size_t x,
                       std::size_t a, double s0, double s1, Accumulator& acc) {
    if (s1 <= s0) return;
    const TimeGrid& grid = v.grid();
    const std::size_t na = p.num_actions();

    if (q == Quadrature::interpolated) acc.cost += integrate_cost(p, x, a, s0, s1);

    std::size_t k = grid.cell(s0);
    double lo = s0;
    std::vector<double> layer_lo(v.states() * na), layer_hi(v.states() * na);
    while (lo < s1) {
        const double hi = k + 1 >= grid.n_steps ? s1 : std::min(grid.time(k + 1), s1);
        const double len = hi - lo;
        if (q == Quadrature::scheme) {
            const Pieces pc = pieces(p, v.layer(k + 1), x, a);
            acc.cost += cost_at(p, grid.time(k), x, a) * len;
            acc.compensator += pc.compensator * len;
            acc.lambda0_part += pc.lambda0_part * len;
            acc.positive += pc.positive * len;
        } else {
            for (std::size_t i = 0; i < layer_lo.size(); ++i) {
                layer_lo[i] = v.value(lo, i / na, i % na);
                layer_hi[i] = v.value(hi, i / na, i % na);
            }
            const Pieces p0 = pieces(p, layer_lo, x, a);
            const Pieces p1 = pieces(p, layer_hi, x, a);
            acc.compensator += 0.5 * (p0.compensator + p1.compensator) * len;
            acc.lambda0_part += 0.5 * (p0.lambda0_part + p1.lambda0_part) * len;
            const double here0 = layer_lo[x * na + a];
            const double here1 = layer_hi[x * na + a];
            for (std::size_t b = 0; b < na; ++b)
                acc.positive += p.lambda0[b] *
                    positive_part_integral(layer_lo[x * na + b] - here0, layer_hi[x * na + b] - here1, len);
        }
        lo = hi;
        ++k;
    }
}

}  // namespace

BSDESample build_sample(const Problem& p, const PenalizedSolution& vn, const Path& path,
                        Quadrature quadrature) {
    const ValueGrid& v = vn.value;
    if (!path.pair) throw GridMismatchError("build_sample needs a pair path");
    if (std::abs(path.horizon - v.grid().horizon) > 1e-12 * v.grid().horizon ||
        v.states() != p.num_states() || v.actions() != p.num_actions())
        throw GridMismatchError("path and penalized solution live on different grids");

    BSDESample sample;
    sample.path = path;
    sample.level = vn.level;
    const double n = static_cast<double>(vn.level);

    Accumulator acc;
    double s = path.start_time;
    std::size_t x = path.initial_state;
    std::size_t a = path.initial_action;
    sample.y_start = v.value(s, x, a);
    for (const Jump& j : path.jumps) {
        integrate_segment(p, v, quadrature, x, a, s, j.time, acc);
        BSDESample::JumpValues jv;
        jv.time = j.time;
        jv.y_before = v.value(j.time, x, a);
        jv.y_after = v.value(j.time, j.state, j.action);
        jv.z_mark = jv.y_after - jv.y_before;
        jv.k = n * acc.positive;
        sample.jumps.push_back(jv);
        s = j.time;
        x = j.state;
        a = j.action;
    }
    integrate_segment(p, v, quadrature, x, a, s, path.horizon, acc);

    sample.y_terminal = v.value(path.horizon, x, a);
    sample.g_terminal = p.terminal_cost[x];
    sample.cost_integral = acc.cost;
    sample.compensator_integral = acc.compensator;
    sample.lambda0_integral = acc.lambda0_part;
    sample.positive_integral = acc.positive;
    sample.k_terminal = n * acc.positive;
    return sample;
}

double bsde_residual(const BSDESample& sample) {
    double jump_sum = 0.0;
    for (const auto& j : sample.jumps) jump_sum += j.z_mark;
    return sample.y_start - (sample.g_terminal + sample.cost_integral + sample.k_terminal - jump_sum +
                             sample.compensator_integral - sample.lambda0_integral);
}

ConstraintEstimate constraint_violation(const Problem& p, const PenalizedSolution& vn, double t,
                                        std::size_t x, std::size_t a, const McOptions& mc) {
    std::vector<double> violation(mc.paths), k_terminal(mc.paths), k_squared(mc.paths);
    parallel_for(mc.paths, mc.workers, [&](std::size_t i) {
        const Path path = simulate_pair_path(p, t, x, a, derive_seed(mc.seed, i));
        const BSDESample s = build_sample(p, vn, path);
        violation[i] = s.positive_integral;
        k_terminal[i] = s.k_terminal;
        k_squared[i] = s.k_terminal * s.k_terminal;
    });
    return {summarize(violation), summarize(k_terminal), summarize(k_squared)};
}

MinimalYReport minimal_y_report(const Problem& p, const HJBSolution& primal,
                                std::span<const PenalizedSolution> levels, double t, std::size_t x,
                                std::optional<std::vector<double>> best_dual_gain) {
    const std::size_t na = p.num_actions();
    MinimalYReport report;
    report.primal_value = primal.value.value(t, x);
    if (levels.empty()) return report;

    for (std::size_t a = 0; a < na; ++a) {
        double prev = -std::numeric_limits<double>::infinity();
        for (const auto& vn : levels) {
            const double y = vn.value.value(t, x, a);
            report.rows.push_back({vn.level, a, y});
            if (y < prev - kOrderTolerance) report.monotone = false;
            if (y > report.primal_value + kOrderTolerance) report.capped = false;
            prev = y;
        }
    }

    const PenalizedSolution& top = levels.back();
    for (std::size_t a = 0; a < na; ++a) {
        const double y = top.value.value(t, x, a);
        report.limit.push_back(y);
        report.gap_to_primal.push_back(report.primal_value - y);
        if (best_dual_gain && a < best_dual_gain->size())
            report.gap_to_dual.push_back(y - (*best_dual_gain)[a]);
    }
    report.sigma_top = action_spread(top.value);
    const double allowance = std::max(report.sigma_top, kMinimalYFloor);
    for (double gap : report.gap_to_primal)
        if (std::abs(gap) > allowance) report.converged = false;
    return report;
}

void write_bsde_csv(std::ostream& os, std::span<const BSDERow> rows, const Problem& p) {
    os << "n,start_a,Y_t,constraint_violation,violation_SE,K_T_mean\n";
    os << std::setprecision(17);
    for (const auto& r : rows)
        os << r.level << ',' << p.actions[r.start_action] << ',' << r.y_start << ','
           << r.constraint.violation.mean << ',' << r.constraint.violation.std_error << ','
           << r.constraint.k_terminal.mean << '\n';
}

}  // namespace jumpctl

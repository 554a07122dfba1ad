#include "jumpctl/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "jumpctl/errors.hpp"

namespace jumpctl {

std::size_t Problem::cost_layers() const noexcept {
    const std::size_t cells = num_states() * num_actions();
    return cells == 0 ? 0 : running_cost.size() / cells;
}

double Problem::exit_rate(std::size_t x, std::size_t a) const {
    double total = 0.0;
    for (double r : rate_row(x, a)) total += r;
    return total;
}

double Problem::lambda0_total() const {
    double total = 0.0;
    for (double l : lambda0) total += l;
    return total;
}

bool ValidationReport::has(const std::string& kind) const {
    return std::any_of(violations.begin(), violations.end(),
                       [&](const Violation& v) { return v.kind == kind; });
}

std::string ValidationReport::to_string() const {
    std::ostringstream os;
    for (const auto& v : violations) os << v.kind << ": " << v.detail << '\n';
    return os.str();
}

namespace {

void add(ValidationReport& r, std::string kind, std::string detail) {
    r.violations.push_back({std::move(kind), std::move(detail)});
}

}  // namespace

ValidationReport validate_problem(const Problem& p) {
    ValidationReport report;
    const std::size_t ns = p.num_states();
    const std::size_t na = p.num_actions();

    if (ns == 0) add(report, "shape", "state space is empty");
    if (na == 0) add(report, "shape", "action space is empty");
    if (!(std::isfinite(p.horizon) && p.horizon > 0.0))
        add(report, "horizon", "T must be finite and positive");
    if (ns == 0 || na == 0) return report;

    if (p.rates.size() != ns * na * ns) {
        add(report, "shape", "rates must have |E|*|A|*|E| entries");
    } else {
        for (std::size_t x = 0; x < ns; ++x)
            for (std::size_t a = 0; a < na; ++a)
                for (std::size_t y = 0; y < ns; ++y) {
                    const double r = p.rate(x, a, y);
                    std::ostringstream at;
                    at << "at x=" << x << " a=" << a << " y=" << y;
                    if (!std::isfinite(r))
                        add(report, "non-finite rate", at.str());
                    else if (r < 0.0)
                        add(report, "negative rate", at.str());
                }
    }

    if (p.lambda0.size() != na) {
        add(report, "shape", "lambda0 must have |A| entries");
    } else {
        for (std::size_t b = 0; b < na; ++b) {
            const double l = p.lambda0[b];
            std::ostringstream at;
            at << "at b=" << b;
            if (!std::isfinite(l))
                add(report, "non-finite lambda0", at.str());
            else if (!(l > 0.0))
                add(report, "lambda0 support", at.str());
        }
    }

    if (p.running_cost.empty() || p.running_cost.size() % (ns * na) != 0) {
        add(report, "shape", "running cost must have a whole number of |E|*|A| layers");
    } else if (std::any_of(p.running_cost.begin(), p.running_cost.end(),
                           [](double v) { return !std::isfinite(v); })) {
        add(report, "non-finite cost", "running cost f");
    }

    if (p.terminal_cost.size() != ns) {
        add(report, "shape", "terminal cost must have |E| entries");
    } else if (std::any_of(p.terminal_cost.begin(), p.terminal_cost.end(),
                           [](double v) { return !std::isfinite(v); })) {
        add(report, "non-finite cost", "terminal cost g");
    }
    return report;
}

void require_valid(const Problem& p) {
    const auto report = validate_problem(p);
    if (!report.ok()) throw ValidationError("inadmissible problem:\n" + report.to_string());
}

double rate_bound(const Problem& p) {
    double bound = 0.0;
    for (std::size_t x = 0; x < p.num_states(); ++x)
        for (std::size_t a = 0; a < p.num_actions(); ++a)
            bound = std::max(bound, p.exit_rate(x, a));
    return bound;
}

double pair_rate_bound(const Problem& p) { return rate_bound(p) + p.lambda0_total(); }

namespace {

double knot_value(const Problem& p, std::size_t k, std::size_t x, std::size_t a) {
    return p.running_cost[(k * p.num_states() + x) * p.num_actions() + a];
}

// Values within this relative distance of [0, T] are snapped onto it.
constexpr double kTimeSlack = 1e-12;

}  // namespace

double cost_at(const Problem& p, double t, std::size_t x, std::size_t a) {
    const double T = p.horizon;
    if (!(t >= -kTimeSlack * T && t <= T * (1.0 + kTimeSlack)))
        throw std::domain_error("cost_at: time outside [0, T]");
    const std::size_t layers = p.cost_layers();
    if (layers == 1) return knot_value(p, 0, x, a);

    const std::size_t cells = layers - 1;
    const double u = std::clamp(t / T, 0.0, 1.0) * static_cast<double>(cells);
    const std::size_t k = std::min(static_cast<std::size_t>(u), cells - 1);
    const double w = u - static_cast<double>(k);
    if (w == 0.0) return knot_value(p, k, x, a);
    if (w == 1.0) return knot_value(p, k + 1, x, a);
    return (1.0 - w) * knot_value(p, k, x, a) + w * knot_value(p, k + 1, x, a);
}

double integrate_cost(const Problem& p, std::size_t x, std::size_t a, double s0, double s1) {
    if (s1 <= s0) return 0.0;
    const std::size_t layers = p.cost_layers();
    if (layers == 1) return knot_value(p, 0, x, a) * (s1 - s0);

    // Trapezoid between consecutive break points is exact for linear pieces.
    const double h = p.horizon / static_cast<double>(layers - 1);
    double total = 0.0;
    double lo = s0;
    double f_lo = cost_at(p, lo, x, a);
    while (lo < s1) {
        double next_knot = (std::floor(lo / h + 1e-12) + 1.0) * h;
        if (next_knot <= lo) next_knot = lo + h;
        const double hi = std::min(next_knot, s1);
        const double f_hi = cost_at(p, hi, x, a);
        total += 0.5 * (f_lo + f_hi) * (hi - lo);
        lo = hi;
        f_lo = f_hi;
    }
    return total;
}

double terminal_sup_norm(const Problem& p) {
    double m = 0.0;
    for (double v : p.terminal_cost) m = std::max(m, std::abs(v));
    return m;
}

double running_sup_norm(const Problem& p) {
    double m = 0.0;
    for (double v : p.running_cost) m = std::max(m, std::abs(v));
    return m;
}

double value_bound(const Problem& p) {
    return terminal_sup_norm(p) + p.horizon * running_sup_norm(p);
}

ValidationReport validate_config(const SolverConfig& cfg) {
    ValidationReport report;
    if (cfg.n_steps < 2) add(report, "config", "n_steps must be at least 2");
    if (!(cfg.picard_tol > 0.0)) add(report, "config", "picard_tol must be positive");
    if (cfg.picard_max_iter == 0) add(report, "config", "picard_max_iter must be positive");
    if (cfg.penalization_levels.empty()) add(report, "config", "penalization_levels is empty");
    for (std::size_t i = 0; i < cfg.penalization_levels.size(); ++i) {
        if (cfg.penalization_levels[i] < 1)
            add(report, "config", "penalization levels must be positive");
        if (i > 0 && cfg.penalization_levels[i] <= cfg.penalization_levels[i - 1])
            add(report, "config", "penalization levels must be strictly increasing");
    }
    return report;
}

}  // namespace jumpctl

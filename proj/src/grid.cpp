#include "jumpctl/grid.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <stdexcept>

namespace jumpctl {

std::size_t TimeGrid::cell(double t) const noexcept {
    if (!(t > 0.0)) return 0;
    const double u = t / horizon * static_cast<double>(n_steps);
    const auto k = static_cast<std::size_t>(u);
    return std::min(k, n_steps - 1);
}

std::size_t TimeGrid::node(double t) const {
    const double u = t / horizon * static_cast<double>(n_steps);
    const double k = std::round(u);
    if (k < 0.0 || k > static_cast<double>(n_steps) || std::abs(u - k) > 1e-9)
        throw std::domain_error("time is not a grid node");
    return static_cast<std::size_t>(k);
}

ValueGrid::ValueGrid(TimeGrid grid, std::size_t start_index, std::size_t states, std::size_t actions)
    : grid_(grid), start_(start_index), states_(states), actions_(actions) {
    if (start_index > grid.n_steps) throw std::domain_error("start index beyond the grid");
    data_.assign((grid.n_steps - start_index + 1) * states * actions, 0.0);
}

double ValueGrid::value(double t, std::size_t x, std::size_t a) const {
    if (t >= grid_.horizon) return at(grid_.n_steps, x, a);
    const std::size_t k = std::max(grid_.cell(t), start_);
    const double t0 = grid_.time(k);
    const double w = std::clamp((t - t0) / grid_.dt(), 0.0, 1.0);
    if (w == 0.0) return at(k, x, a);
    return (1.0 - w) * at(k, x, a) + w * at(k + 1, x, a);
}

double ValueGrid::sup_norm() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
}

void write_value_csv(std::ostream& os, const ValueGrid& v, const Problem& p) {
    const bool pair = v.is_pair();
    os << (pair ? "k,t,state,action,value\n" : "k,t,state,value\n");
    os << std::setprecision(17);
    for (std::size_t k = v.start_index(); k <= v.grid().n_steps; ++k)
        for (std::size_t x = 0; x < v.states(); ++x)
            for (std::size_t a = 0; a < v.actions(); ++a) {
                os << k << ',' << v.grid().time(k) << ',' << p.states[x] << ',';
                if (pair) os << p.actions[a] << ',';
                os << v.at(k, x, a) << '\n';
            }
}

}  // namespace jumpctl

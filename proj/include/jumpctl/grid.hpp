#pragma once

#include <cstddef>
#include <ostream>
#include <span>
#include <vector>

#include "jumpctl/model.hpp"

namespace jumpctl {

/// Uniform grid t_k = k T / N, k = 0..N.
struct TimeGrid {
    double horizon = 1.0;
    std::size_t n_steps = 1;

    double dt() const noexcept { return horizon / static_cast<double>(n_steps); }
    double time(std::size_t k) const noexcept {
        return k == n_steps ? horizon : horizon * static_cast<double>(k) / static_cast<double>(n_steps);
    }
    /// Cell index k with t in [t_k, t_{k+1}); t = T maps to the last cell.
    std::size_t cell(double t) const noexcept;
    /// Index of the node equal to t, or throws std::domain_error.
    std::size_t node(double t) const;

    bool operator==(const TimeGrid&) const = default;
};

/// A value function tabulated on nodes start..N of a TimeGrid, over E (actions == 1)
/// or over E x A.
class ValueGrid {
public:
    ValueGrid() = default;
    ValueGrid(TimeGrid grid, std::size_t start_index, std::size_t states, std::size_t actions = 1);

    const TimeGrid& grid() const noexcept { return grid_; }
    std::size_t start_index() const noexcept { return start_; }
    std::size_t states() const noexcept { return states_; }
    std::size_t actions() const noexcept { return actions_; }
    bool is_pair() const noexcept { return actions_ > 1 || pair_; }
    void mark_pair() noexcept { pair_ = true; }

    double& at(std::size_t k, std::size_t x, std::size_t a = 0) { return data_[offset(k) + x * actions_ + a]; }
    double at(std::size_t k, std::size_t x, std::size_t a = 0) const { return data_[offset(k) + x * actions_ + a]; }

    std::span<double> layer(std::size_t k) { return {data_.data() + offset(k), states_ * actions_}; }
    std::span<const double> layer(std::size_t k) const { return {data_.data() + offset(k), states_ * actions_}; }

    /// Linear interpolation in time; exact at nodes.
    double value(double t, std::size_t x, std::size_t a = 0) const;

    double sup_norm() const;
    std::span<const double> data() const noexcept { return data_; }

private:
    std::size_t offset(std::size_t k) const noexcept { return (k - start_) * states_ * actions_; }

    TimeGrid grid_;
    std::size_t start_ = 0;
    std::size_t states_ = 0;
    std::size_t actions_ = 1;
    bool pair_ = false;
    std::vector<double> data_;
};

/// CSV with columns k,t,state[,action],value.
void write_value_csv(std::ostream& os, const ValueGrid& v, const Problem& p);

}  // namespace jumpctl

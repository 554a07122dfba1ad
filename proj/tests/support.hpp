#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "jumpctl/io.hpp"
#include "jumpctl/model.hpp"

namespace testing {

inline jumpctl::Problem fixture(const std::string& name) {
    return jumpctl::load_problem(std::string(JUMPCTL_FIXTURES) + "/" + name);
}

/// Two states, state 1 absorbing, actions {1,2} with λ(0,a,{1}) = a, f = 0,
/// g = (0,1), λ₀ = (0.7, 0.3).
inline jumpctl::Problem m2(double horizon = 1.0) {
    jumpctl::Problem p;
    p.states = {"0", "1"};
    p.actions = {"1", "2"};
    p.rates = {0, 1, 0, 2, 0, 0, 0, 0};
    p.lambda0 = {0.7, 0.3};
    p.running_cost = {0, 0, 0, 0};
    p.terminal_cost = {0, 1};
    p.horizon = horizon;
    return p;
}

/// 1 − e^{−rate (T − t)}: probability that the M₂ chain has been absorbed.
inline double absorbed(double rate, double remaining) { return 1.0 - std::exp(-rate * remaining); }

/// A model whose rates, running cost and terminal cost ignore the action.
inline jumpctl::Problem flat(std::size_t actions = 2) {
    jumpctl::Problem p;
    p.states = {"low", "mid", "high"};
    for (std::size_t a = 0; a < actions; ++a) p.actions.push_back("a" + std::to_string(a));
    const double base[3][3] = {{0, 1.0, 0.5}, {0.4, 0, 0.8}, {0.3, 0.6, 0}};
    const double cost[3] = {0.2, 0.1, 0.4};
    for (std::size_t x = 0; x < 3; ++x)
        for (std::size_t a = 0; a < actions; ++a)
            for (std::size_t y = 0; y < 3; ++y) p.rates.push_back(base[x][y]);
    for (std::size_t x = 0; x < 3; ++x)
        for (std::size_t a = 0; a < actions; ++a) p.running_cost.push_back(cost[x]);
    p.lambda0.assign(actions, 1.0 / static_cast<double>(actions));
    p.terminal_cost = {0.0, 0.5, 1.0};
    p.horizon = 1.0;
    return p;
}

/// Uniform-rate model: every λ(x,a,{y}) = rate.
inline jumpctl::Problem uniform(std::size_t states, std::size_t actions, double rate) {
    jumpctl::Problem p;
    for (std::size_t x = 0; x < states; ++x) p.states.push_back(std::to_string(x));
    for (std::size_t a = 0; a < actions; ++a) p.actions.push_back(std::to_string(a));
    p.rates.assign(states * actions * states, rate);
    p.lambda0.assign(actions, 1.0);
    p.running_cost.assign(states * actions, 0.0);
    p.terminal_cost.assign(states, 0.0);
    return p;
}

using Matrix = std::vector<std::vector<double>>;

inline Matrix multiply(const Matrix& a, const Matrix& b) {
    const std::size_t n = a.size();
    Matrix c(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t j = 0; j < n; ++j) c[i][j] += a[i][k] * b[k][j];
    return c;
}

/// exp(M) by scaling and squaring with a 20-term Taylor series.
inline Matrix expm(Matrix m) {
    const std::size_t n = m.size();
    double norm = 0.0;
    for (const auto& row : m) {
        double s = 0.0;
        for (double v : row) s += std::abs(v);
        norm = std::max(norm, s);
    }
    int squarings = 0;
    while (norm > 0.5) {
        norm /= 2.0;
        ++squarings;
    }
    const double scale = std::ldexp(1.0, -squarings);
    for (auto& row : m)
        for (double& v : row) v *= scale;
    Matrix result(n, std::vector<double>(n, 0.0)), term(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) result[i][i] = term[i][i] = 1.0;
    for (int k = 1; k <= 20; ++k) {
        term = multiply(term, m);
        for (auto& row : term)
            for (double& v : row) v /= k;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) result[i][j] += term[i][j];
    }
    for (int s = 0; s < squarings; ++s) result = multiply(result, result);
    return result;
}

/// Generator matrix of X under the constant action a.
inline Matrix generator(const jumpctl::Problem& p, std::size_t a) {
    const std::size_t n = p.num_states();
    Matrix q(n, std::vector<double>(n, 0.0));
    for (std::size_t x = 0; x < n; ++x)
        for (std::size_t y = 0; y < n; ++y) {
            const double r = p.rates[(x * p.num_actions() + a) * n + y];
            q[x][y] += r;
            q[x][x] -= r;
        }
    return q;
}

/// E[g(X_T) + ∫_t^T f(X_s, a) ds | X_t = x] under the constant action a with a
/// time-constant running cost, by exponentiating the generator augmented with
/// a cost-accumulator coordinate.
inline std::vector<double> constant_action_value(const jumpctl::Problem& p, std::size_t a, double remaining) {
    const std::size_t n = p.num_states();
    const Matrix q = generator(p, a);
    Matrix aug(n + 1, std::vector<double>(n + 1, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) aug[i][j] = q[i][j] * remaining;
        aug[i][n] = p.running_cost[i * p.num_actions() + a] * remaining;
    }
    const Matrix e = expm(aug);
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) out[i] += e[i][j] * p.terminal_cost[j];
        out[i] += e[i][n];
    }
    return out;
}

}  // namespace testing

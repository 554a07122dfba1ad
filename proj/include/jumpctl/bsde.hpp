#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "jumpctl/hjb.hpp"
#include "jumpctl/model.hpp"
#include "jumpctl/penalized.hpp"
#include "jumpctl/randomized.hpp"
#include "jumpctl/simulate.hpp"

namespace jumpctl {

/// How dr-integrals along a path are evaluated.
enum class Quadrature {
    /// Integrands frozen per cell at the values the explicit scheme used
    /// (layer k+1, cost at t_k). The penalized identity then holds to rounding.
    scheme,
    /// Exact integrals of the piecewise-linear interpolant of v^n and of f.
    /// The identity holds up to the scheme's time-discretization error.
    interpolated,
};

/// Y, Z, K of the penalized BSDE read off v^n along one pair path:
///   Y_s = v^n(s, X_s, I_s),  Z_s(y, b) = v^n(s, y, b) − v^n(s, X_{s−}, I_{s−}),
///   K_s = n ∫_t^s Σ_b [Z_r(X_r, b)]⁺ λ₀[b] dr.
struct BSDESample {
    struct JumpValues {
        double time = 0.0;
        double y_before = 0.0;  ///< Y_{T_n−}
        double y_after = 0.0;   ///< Y_{T_n}
        double z_mark = 0.0;    ///< Z_{T_n}(E_n, A_n)
        double k = 0.0;         ///< K_{T_n}
    };

    Path path;
    int level = 0;
    double y_start = 0.0;
    double y_terminal = 0.0;
    double g_terminal = 0.0;
    std::vector<JumpValues> jumps;
    double k_terminal = 0.0;
    double cost_integral = 0.0;         ///< ∫ f(r, X_r, I_r) dr
    double compensator_integral = 0.0;  ///< ∫ Σ_y Z(y, I) λ(X, I, {y}) + Σ_b Z(X, b) λ₀[b] dr
    double lambda0_integral = 0.0;      ///< ∫ Σ_b Z(X, b) λ₀[b] dr
    double positive_integral = 0.0;     ///< ∫ Σ_b [Z(X, b)]⁺ λ₀[b] dr, so K_T = n · this

    /// Y at start, before and after each jump, and at T, in path order.
    std::vector<double> y_checkpoints() const;
};

/// Z_s(y, b) for a pre-jump position (x_pre, a_pre).
double z_value(const PenalizedSolution& vn, double s, std::size_t x_pre, std::size_t a_pre,
               std::size_t y, std::size_t b);

/// Throws GridMismatchError when path and solution disagree on horizon or marks.
BSDESample build_sample(const Problem& p, const PenalizedSolution& vn, const Path& path,
                        Quadrature quadrature = Quadrature::scheme);

/// R = Y_t − [g(X_T) + ∫f + K_T − Σ_n Z_{T_n}(E_n, A_n)
///            + ∫(Σ_y Z(y,I) λ + Σ_b Z(X,b) λ₀) dr − ∫ Σ_b Z(X,b) λ₀ dr].
double bsde_residual(const BSDESample& sample);

struct ConstraintEstimate {
    Estimate violation;  ///< E ∫ Σ_b [Z(X_s, b)]⁺ λ₀[b] ds
    Estimate k_terminal;
    Estimate k_squared;
};

ConstraintEstimate constraint_violation(const Problem& p, const PenalizedSolution& vn, double t,
                                        std::size_t x, std::size_t a, const McOptions& mc);

struct MinimalYRow {
    int level = 0;
    std::size_t start_action = 0;
    double y = 0.0;  ///< Y_t^{n,t,x,a} = v^n(t, x, a)
};

struct MinimalYReport {
    std::vector<MinimalYRow> rows;
    double primal_value = 0.0;
    double sigma_top = 0.0;            ///< σ_n of the highest level
    std::vector<double> limit;         ///< per start action, highest-level value
    std::vector<double> gap_to_primal; ///< v(t,x) − limit
    std::vector<double> gap_to_dual;   ///< limit − best dual gain, when supplied
    bool monotone = true;
    bool capped = true;
    bool converged = true;

    bool pass() const { return monotone && capped && converged; }
};

inline constexpr double kMinimalYFloor = 1e-2;

/// Tabulates v^n(t, x, a) over levels and start actions and checks that each
/// column increases with n, stays below v(t, x) + 1e-9, and that the highest
/// level is within max(σ_n, 1e-2) of v(t, x).
MinimalYReport minimal_y_report(const Problem& p, const HJBSolution& primal,
                                std::span<const PenalizedSolution> levels, double t, std::size_t x,
                                std::optional<std::vector<double>> best_dual_gain = std::nullopt);

struct BSDERow {
    int level = 0;
    std::size_t start_action = 0;
    double y_start = 0.0;
    ConstraintEstimate constraint;
};

/// CSV with columns n,start_a,Y_t,constraint_violation,violation_SE,K_T_mean.
void write_bsde_csv(std::ostream& os, std::span<const BSDERow> rows, const Problem& p);

}  // namespace jumpctl

#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "jumpctl/model.hpp"

namespace jumpctl {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int usage = 1;
inline constexpr int parse = 2;
inline constexpr int validation = 3;
inline constexpr int nonconvergence = 4;
inline constexpr int suite_failure = 5;
}  // namespace exit_code

/// Settings shared by all subcommands. Flags override the config file, which
/// overrides the defaults.
struct CommandOptions {
    std::filesystem::path model;
    std::filesystem::path out_dir = ".";
    std::optional<std::filesystem::path> config_file;
    std::optional<std::size_t> n_steps;
    std::optional<std::size_t> paths;
    std::optional<std::uint64_t> seed;
    std::optional<std::vector<int>> levels;
    std::optional<double> tol;
    std::optional<std::size_t> workers;
    /// Start state label for diagnose and simulate; first state when empty.
    std::string state;
};

struct SimulateOptions {
    std::string mode = "controlled";  ///< "controlled" or "pair"
    /// Action label for a constant policy (controlled) or the start action
    /// (pair). "optimal" follows the HJB feedback policy.
    std::string action = "optimal";
    std::optional<std::size_t> count;
};

/// Defaults, then the config file, then explicit flags.
SolverConfig resolve_config(const CommandOptions& opts);

int cmd_solve(const CommandOptions& opts, std::ostream& log);
int cmd_diagnose(const CommandOptions& opts, std::ostream& log);
int cmd_simulate(const CommandOptions& opts, const SimulateOptions& sim, std::ostream& log);

/// Parses argv with subcommands solve, diagnose, simulate and dispatches.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace jumpctl

#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "jumpctl/model.hpp"

namespace jumpctl {

/// Parses a model document:
///
///   { "states": [...], "actions": [...], "rates": [[[...]]], "lambda0": [...],
///     "f": scalar | [x][a] | [k][x][a], "g": [...], "T": number }
///
/// Scalar and 2-D `f` broadcast over the missing axes. Throws ParseError on
/// malformed JSON (with line/column) or on shape mismatches. The result is
/// not validated; call validate_problem.
Problem parse_problem(std::string_view text);
Problem load_problem(const std::filesystem::path& path);

std::string problem_to_json(const Problem& p);

/// Reads the config keys n_steps, picard_tol, picard_max_iter, paths, seed,
/// levels, workers from a JSON object on top of `base`.
SolverConfig parse_config(std::string_view text, SolverConfig base = {});

/// Writes via a sibling temporary file and rename, so readers never see a partial file.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

std::string read_file(const std::filesystem::path& path);

}  // namespace jumpctl

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "rdsgls/experiment.hpp"
#include "rdsgls/rng.hpp"

namespace rdsgls {

/// Seed from the command line, else RDSGLS_SEED, else kDefaultSeed.
/// Throws kInvalidArgument when RDSGLS_SEED is not an unsigned integer.
std::uint64_t resolve_seed(std::optional<std::uint64_t> cli_seed);

/// INI text with sections [network], [outcomes], [walk], [estimators],
/// [run]; see README for the keys. Unknown keys are errors. Parse errors
/// carry the line number.
ExperimentConfig parse_experiment_config(std::istream& in, const std::string& source);
ExperimentConfig load_experiment_config(const std::string& path);

WalkMode walk_mode_from_string(const std::string& text);

}  // namespace rdsgls

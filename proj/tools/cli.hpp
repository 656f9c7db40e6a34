#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "cpsband/simulation.hpp"

namespace cpsband::cli {

/// Parses argv and runs the selected subcommand. Returns the process exit
/// status; diagnostics go to err as a single line.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Expands a JSON config (N and alpha may be arrays) into one SimConfig per
/// table row. Unknown keys are rejected.
std::vector<SimConfig> parse_sim_config(const std::string& json_text);

/// Randomised exact-oracle property suite. Prints one PASS/FAIL line per
/// check and returns the number of failures.
int run_oracle_suite(std::uint64_t seed, int instances, std::ostream& out);

}  // namespace cpsband::cli

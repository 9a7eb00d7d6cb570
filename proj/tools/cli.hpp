#pragma once

#include <cstdint>

#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

namespace catsim::cli {

/// Executes one fully merged configuration. Artifacts go to config["out"];
/// errors are written to `err` as a JSON object. Returns the process exit
/// status: 0 on success, 1 for invalid input, 2 for numerical failure.
int run(const nlohmann::json& config, std::ostream& out, std::ostream& err);

/// Parses flags, loads --config, lets flags override file values and calls run.
int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Hash recorded in artifact headers: FNV-1a of the canonical dump with the
/// output location and worker count removed.
std::uint64_t config_hash(const nlohmann::json& config);

}  // namespace catsim::cli

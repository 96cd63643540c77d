#pragma once

#include <map>

#include "pdgsem/cfg.hpp"

namespace pdgsem {

// Small catalog of reference programs used across the tests and the CLI
// examples. Sources are in the textual IR; each parses and validates.
const std::map<std::string, std::string>& fixture_sources();

// Throws std::out_of_range for unknown names.
Cfg fixture(const std::string& name);

}  // namespace pdgsem

#pragma once

#include <filesystem>
#include <string_view>

#include "slicearena/scenario.hpp"

namespace slicearena {

/// Parses the `key = value` scenario format:
///
///   # comment
///   kappa = 1000
///   [datacenter]
///   cpu = 32
///   ...
///   [slice]
///   priority = 1
///   ...
///
/// Top-level keys precede the first section. Each `[datacenter]` / `[slice]`
/// header opens a new entry. Unknown keys and malformed lines raise ParseError
/// carrying the line number; semantic checks raise ValidationError. A slice
/// without `chain_capacity` is dimensioned from its traffic profile.
ScenarioConfig parse_config(std::string_view text);

ScenarioConfig load_config(const std::filesystem::path& path);

} // namespace slicearena

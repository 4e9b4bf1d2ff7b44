#pragma once

#include <string>

#include "mimoee/efficiency.hpp"

namespace mimoee {

/// Parses a flat key = value config file. Keys match SystemConfig field names;
/// SI units (watts, seconds), with _mW and _dBm suffixes accepted for power
/// fields. Unknown keys are errors. Missing keys take the documented defaults.
/// The returned config is validated.
SystemConfig load_config(const std::string& path);

/// Same parser over an in-memory string (used by load_config and tests).
SystemConfig parse_config(const std::string& text);

/// Serializes in SI units with full precision; load(save(cfg)) is bit-identical.
std::string save_config(const SystemConfig& cfg);
void save_config(const SystemConfig& cfg, const std::string& path);

} // namespace mimoee

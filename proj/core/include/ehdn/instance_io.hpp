#pragma once

#include <filesystem>
#include <string>

#include "ehdn/ambiguity.hpp"
#include "ehdn/fragility.hpp"
#include "ehdn/network.hpp"

namespace ehdn {

/// Parse a .instance document (sections grid_nodes, grid_lines, h2_nodes,
/// pipelines, stations, zones, costs, horizon; see docs/file-formats.md).
/// Throws DataError naming the offending section/field on schema violations,
/// dangling references or non-radial topology.
Network parse_instance(const std::filesystem::path& path);
Network parse_instance_text(const std::string& text, const std::string& origin = "<memory>");

/// Inverse of parse_instance; parse(serialize(net)) == net field-wise.
std::string serialize_instance(const Network& net);

/// Per-component fragility parameter file (.fragility), both hardening states.
FragilityParams parse_fragility(const std::filesystem::path& path, const Network& net);
FragilityParams parse_fragility_text(const std::string& text, const Network& net,
                                     const std::string& origin = "<memory>");

/// Intensity forecast file (.forecast): per-zone expected peaks, the shared
/// ramp profile, variances, correlation structure and ambiguity ratios.
Forecast parse_forecast(const std::filesystem::path& path, const Network& net);
Forecast parse_forecast_text(const std::string& text, const Network& net,
                             const std::string& origin = "<memory>");

}  // namespace ehdn

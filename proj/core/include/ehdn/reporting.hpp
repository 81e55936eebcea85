#pragma once

#include <filesystem>
#include <string>

#include "ehdn/ccg.hpp"
#include "ehdn/hlcc.hpp"
#include "ehdn/network.hpp"
#include "ehdn/validation.hpp"

namespace ehdn {

/// Serialization of run outputs: one directory per run holding manifest.json,
/// plan.json, trace.json and friends, plus plot-ready TSV tables.
namespace reporting {

std::string plan_json(const Network& net, const CcgResult& res);
std::string trace_json(const CcgTrace& trace);
std::string validation_json(const ValidationReport& rep);
std::string min_budget_json(const Network& net, const HlccSpec& spec, const MinBudgetResult& res);

void write_file(const std::filesystem::path& path, const std::string& content);

/// Aggregate run directories under `results` (or the single run directory
/// itself) into plot-ready tables in `out`: hardening edge list per run,
/// welsc/var-vs-label tables and the convergence traces.
void write_report_tables(const std::filesystem::path& results, const std::filesystem::path& out);

}  // namespace reporting
}  // namespace ehdn

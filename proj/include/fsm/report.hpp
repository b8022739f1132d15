#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "fsm/mc.hpp"

namespace fsm::report {

using nlohmann::json;

// MC results are emitted as {mean_re, mean_im, stderr, n, seed}.
json mc_to_json(const McEstimate& e, std::uint64_t seed);

// Assemble a full report.  Volatile fields (wall time, worker count) live
// under "meta"; everything else is a pure function of (params, seed).
json make_report(const std::string& subcommand, std::uint64_t seed, const json& params,
                 const json& results, double wall_time_s, int workers);

// Report with the volatile "meta" section removed, for byte comparisons.
json stable_view(const json& report);

// Minimal JSON-schema interpreter covering the subset used by
// schema/report.schema.json: type, required, properties, items,
// additionalProperties, enum.  Returns an empty string when valid,
// otherwise a description of the first violation.
std::string validate_against_schema(const json& doc, const json& schema);

}  // namespace fsm::report

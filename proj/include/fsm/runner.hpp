#pragma once

#include <string>

#include <nlohmann/json.hpp>

// Batch harness behind the CLI: config validation, dispatch, reports.
// Config shape: {"subcommand": ..., "seed": u64, "workers": int,
// "params": {...}, "output": path?}.  Unknown parameter keys are rejected;
// every numeric parameter is range-checked.

namespace fsm::runner {

using nlohmann::json;

// Runs one experiment and returns the full report.  Throws ConfigError /
// NumericalError; the CLI maps those to exit codes 2 / 3.
json run(const json& config);

// Repeated run over `axis` taking each value in `values`; returns CSV text
// with one row per value (axis, value, then the numeric leaves of the
// results object in sorted dot-path order).
std::string sweep(const json& base_config, const std::string& axis, const json& values);

// Parameter whitelists, exposed for tests.
json default_config(const std::string& subcommand);

}  // namespace fsm::runner

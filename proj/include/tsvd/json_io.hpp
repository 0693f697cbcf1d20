#pragma once

// JSON configuration schema shared by the command-line tool and the Python
// bindings, and JSON encodings of the result types.

#include <json.hpp>
#include <string>

#include "tsvd/lowerbound_lab.hpp"
#include "tsvd/mc_harness.hpp"
#include "tsvd/oracles.hpp"
#include "tsvd/stopping.hpp"

namespace tsvd {

using Json = nlohmann::ordered_json;

/// Every recognized key with its default value; see docs/config.md.
Json default_config();

/// Recursively overlays patch onto base. Throws ConfigError for keys that
/// are not in base.
void merge_config(Json& base, const Json& patch);

/// Applies "dotted.path=value". The value is read as JSON when it parses,
/// as a plain string otherwise.
void apply_override(Json& config, const std::string& assignment);

/// Reads a JSON document from disk; ConfigError on I/O or syntax errors.
Json load_json_file(const std::string& path);

/// Typed views of a full (defaults-merged) configuration. Type mismatches
/// throw ConfigError.
ExperimentConfig experiment_from_json(const Json& config);
StoppingConfig stopping_from_json(const Json& config, bool two_step);
NoiseModel noise_from_json(const Json& config);

/// Non-finite reals are written as the strings "inf", "-inf" and "nan".
Json real(double value);

Json to_json(const OracleSet& oracles);
Json to_json(const TheoryBounds& bounds);
Json to_json(const StopOutcome& outcome);
Json to_json(const EfficiencyReport& report);
Json to_json(const AdversaryResult& result, bool with_signal = true);
Json to_json(const CounterexampleReport& report);

}  // namespace tsvd

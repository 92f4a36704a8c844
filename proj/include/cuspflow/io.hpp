#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

#include <json.hpp>

#include "cuspflow/flow.hpp"

namespace cuspflow {

inline constexpr const char* kToolVersion = "1.0.0";

/// 17 significant digits, "%.17g".
std::string format_double(double x);

/// Comma-separated reals ("0.5,-1,2e-3"); whitespace around values is ignored.
EdgeLengths parse_lengths_csv(const std::string& text);

/// Header `t,knorm_inf,knorm_2,energy,volume,degenerate_tets`, followed by
/// l0..l{N-1} when full is set (requires rows recorded with lengths).
void write_trace_csv(std::ostream& out, const FlowTrace& trace, bool full = false);

struct RunManifest {
  std::string input_path;
  FlowConfig config;
  std::optional<std::uint64_t> seed;
  std::optional<double> init_range;
  std::string tool_version = kToolVersion;
  std::string start_timestamp;
};

nlohmann::json to_json(const FlowConfig& cfg);
nlohmann::json to_json(const RunManifest& manifest);
nlohmann::json to_json(const FlowResult& result, bool include_trace = true);

/// Serializes with every floating point number printed at 17 significant
/// digits and object keys in insertion-independent (sorted) order.
std::string dump_json(const nlohmann::json& doc, int indent = 2);

}  // namespace cuspflow

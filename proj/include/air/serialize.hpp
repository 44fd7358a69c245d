#pragma once

#include <string>
#include <string_view>

#include "air/graph.hpp"

namespace air {

/// One line per group (graph order), "FORMULA GROUP: (name range)" or
/// "RAW GROUP: (name range)"; every formula group is followed by one
/// tab-indented line per dependency. Empty graph → empty text.
std::string to_listing(const DataFlowGraph& graph);

/// AIR JSON, schema version 1.
std::string to_json(const DataFlowGraph& graph, int indent = 2);
/// Throws SchemaError (with a JSON-pointer location) on malformed input or
/// an unsupported version.
DataFlowGraph from_json(std::string_view text);

/// DOT digraph: boxes for raw groups, ellipses for formula groups.
std::string to_dot(const DataFlowGraph& graph);

}  // namespace air

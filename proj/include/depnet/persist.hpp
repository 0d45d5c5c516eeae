#pragma once

#include <iosfwd>
#include <string>

#include "depnet/graph.hpp"

namespace depnet {

/// Write the graph as newline-delimited JSON records, one object per line,
/// kind in {"library","version","dep","vuln","match"}. Output is canonical:
/// identical graphs serialize byte-identically.
void save_graph(const Graph& graph, std::ostream& sink);
std::string save_graph_to_string(const Graph& graph);

/// Load a graph persisted by save_graph. Record order is irrelevant. Throws
/// Error{malformed_record} with the offending line number and
/// Error{version_conflict} on duplicate version keys.
Graph load_graph(std::istream& source);
Graph load_graph_from_string(const std::string& text);

void save_graph_to_file(const Graph& graph, const std::string& path);
Graph load_graph_from_file(const std::string& path);

}  // namespace depnet

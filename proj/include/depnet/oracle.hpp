#pragma once

#include <optional>

#include "depnet/graph.hpp"
#include "depnet/upgrade.hpp"

namespace depnet {

// Brute-force re-implementations of the propagation and fixability checks,
// written against exhaustive simple-path enumeration with no code shared
// with the analyzers. They exist to cross-check the fast paths and refuse
// graphs above 50 libraries (Error{graph_too_large}).

std::optional<int> oracle_shortest(const Graph& graph, const LibraryId& library,
                                   const Version& version);

bool oracle_fixable(const Graph& graph, const DependencyChain& chain, FixMode mode);

}  // namespace depnet

#pragma once

#include <map>
#include <string>
#include <vector>

#include "depnet/graph.hpp"
#include "depnet/ingest.hpp"

namespace depnet {

struct MatchResult {
    Graph graph;  ///< input graph plus the new vulnerabilities and matches
    std::map<std::string, int> per_vuln_matches;
    /// (vuln id, library) pairs whose affected library is absent from the graph.
    std::vector<std::pair<std::string, LibraryId>> unknown_libraries;
    /// vulnerabilities that matched no version at all
    std::vector<std::string> unmatched;
};

/// Attach vulnerability records to every non-stub version they affect
/// (range membership or exact-version listing). Re-matching the same feed
/// is idempotent.
MatchResult match_vulnerabilities(const Graph& graph, const std::vector<VulnRecord>& vulns,
                                  Warnings* warnings = nullptr);

}  // namespace depnet

#include "depnet/matcher.hpp"

#include <algorithm>

#include "graph_access.hpp"

namespace depnet {

MatchResult match_vulnerabilities(const Graph& graph, const std::vector<VulnRecord>& vulns,
                                  Warnings* warnings) {
    MatchResult result;
    result.graph = graph;

    for (const auto& vuln : vulns) {
        GraphAccess::add_vuln(result.graph, vuln);
        int matched = 0;
        for (const auto& affected : vuln.affected) {
            auto versions = result.graph.versions_of(affected.library);
            if (versions.empty()) {
                result.unknown_libraries.emplace_back(vuln.id, affected.library);
                warn(warnings, "match",
                     vuln.id + " affects unknown library '" + affected.library.canonical + "'");
                continue;
            }
            for (std::size_t index : versions) {
                const auto& node = result.graph.node(index);
                if (node.stub) continue;  // stubs never match

                bool hit = version_in_range(node.version, affected.ranges);
                if (!hit) {
                    hit = std::any_of(affected.exact_versions.begin(), affected.exact_versions.end(),
                                      [&](const Version& exact) { return exact == node.version; });
                }
                if (hit) {
                    ++matched;
                    GraphAccess::add_match(result.graph, index, vuln.id);
                }
            }
        }
        result.per_vuln_matches[vuln.id] += matched;
        if (matched == 0) {
            result.unmatched.push_back(vuln.id);
            warn(warnings, "match", vuln.id + " matched no library version");
        }
    }
    return result;
}

}  // namespace depnet

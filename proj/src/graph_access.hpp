#pragma once

// Internal mutation surface for Graph, shared by the builder, the loader and
// the vulnerability matcher. Not installed; keeps Graph immutable publicly.

#include <utility>

#include "depnet/graph.hpp"

namespace depnet {

struct GraphAccess {
    static Graph assemble(std::map<LibraryId, Library> libraries,
                          std::vector<LibraryVersionNode> nodes,
                          std::map<std::string, VulnRecord> vulns,
                          std::map<std::pair<LibraryId, std::string>, std::set<std::string>> matches) {
        Graph g;
        g.libraries_ = std::move(libraries);
        g.nodes_ = std::move(nodes);
        g.vulns_ = std::move(vulns);
        g.finalize_indices();
        for (auto& [key, ids] : matches) {
            auto it = g.index_.find(key);
            if (it == g.index_.end()) {
                throw Error(ErrorKind::malformed_record,
                            "match references unknown version " + key.first.canonical + "@" +
                                key.second);
            }
            g.matches_[it->second] = std::move(ids);
        }
        return g;
    }

    static void add_vuln(Graph& g, VulnRecord record) {
        g.vulns_[record.id] = std::move(record);
    }

    static bool add_match(Graph& g, std::size_t node_index, const std::string& vuln_id) {
        return g.matches_[node_index].insert(vuln_id).second;
    }
};

}  // namespace depnet

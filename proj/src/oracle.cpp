#include "depnet/oracle.hpp"

#include <algorithm>
#include <set>

namespace depnet {

namespace {

void require_small(const Graph& graph) {
    if (graph.libraries().size() > 50) {
        throw Error(ErrorKind::graph_too_large,
                    "oracle refuses graphs above 50 libraries (" +
                        std::to_string(graph.libraries().size()) + ")");
    }
}

// Exhaustive simple-path walk recording the best length to any matched node.
void walk_to_matched(const Graph& graph, std::size_t node, int depth, std::vector<bool>& on_path,
                     std::optional<int>& best) {
    if (graph.has_match(node)) {
        if (!best || depth < *best) best = depth;
    }
    if (graph.node(node).stub && depth > 0) return;
    on_path[node] = true;
    for (const auto& edge : graph.out_edges(node)) {
        if (on_path[edge.to]) continue;
        walk_to_matched(graph, edge.to, depth + 1, on_path, best);
    }
    on_path[node] = false;
}

// True when some simple path leads from `node` into `forbidden`.
bool walk_reaches(const Graph& graph, std::size_t node, const std::set<std::size_t>& forbidden,
                  std::vector<bool>& on_path) {
    if (forbidden.contains(node)) return true;
    if (graph.node(node).stub) return false;
    on_path[node] = true;
    bool found = false;
    for (const auto& edge : graph.out_edges(node)) {
        if (on_path[edge.to]) continue;
        if (walk_reaches(graph, edge.to, forbidden, on_path)) {
            found = true;
            break;
        }
    }
    on_path[node] = false;
    return found;
}

}  // namespace

std::optional<int> oracle_shortest(const Graph& graph, const LibraryId& library,
                                   const Version& version) {
    require_small(graph);
    auto root = graph.find(library, version);
    if (!root) {
        throw Error(ErrorKind::unknown_version,
                    library.canonical + "@" + version.canonical() + " is not in the graph");
    }
    std::optional<int> best;
    std::vector<bool> on_path(graph.nodes().size(), false);
    walk_to_matched(graph, *root, 0, on_path, best);
    return best;
}

bool oracle_fixable(const Graph& graph, const DependencyChain& chain, FixMode mode) {
    require_small(graph);
    if (chain.length() < 1) return false;

    auto root = graph.find(chain.root().first, chain.root().second);
    auto direct = graph.find(chain.direct_dependency().first, chain.direct_dependency().second);
    auto target = graph.find(chain.target().first, chain.target().second);
    if (!root || !direct || !target) {
        throw Error(ErrorKind::unknown_version, "chain references versions not in the graph");
    }

    // versions matched by the vulnerabilities that match the target
    std::set<std::size_t> matched_by_same;
    for (std::size_t i = 0; i < graph.nodes().size(); ++i) {
        for (const auto& id : graph.matches_of(*target)) {
            if (graph.matches_of(i).contains(id)) {
                matched_by_same.insert(i);
                break;
            }
        }
    }

    std::set<std::size_t> forbidden;
    if (mode == FixMode::strict_version) {
        forbidden.insert(*target);
    } else {
        forbidden = matched_by_same;
    }

    const auto& direct_node = graph.node(*direct);
    const auto& root_node = graph.node(*root);
    for (std::size_t candidate : graph.versions_of(direct_node.library)) {
        const auto& node = graph.node(candidate);
        if (node.stub) continue;
        if (compare_versions(node.version, direct_node.version) != std::strong_ordering::greater)
            continue;
        if (node.released >= root_node.released) continue;
        if (mode == FixMode::strict_version && node.library == graph.node(*target).library &&
            matched_by_same.contains(candidate)) {
            continue;  // an upgrade that is itself matched by the vulnerability is no fix
        }
        std::vector<bool> on_path(graph.nodes().size(), false);
        if (!walk_reaches(graph, candidate, forbidden, on_path)) {
            return true;
        }
    }
    return false;
}

}  // namespace depnet

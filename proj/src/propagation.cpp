#include "depnet/propagation.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>

namespace depnet {

namespace {

constexpr int kUnreached = -1;

// Multi-source reverse BFS: distance from every node to the nearest source
// along forward dependency edges. Sources at distance 0.
std::vector<int> distances_to_sources(const Graph& graph, const std::vector<std::size_t>& sources) {
    std::vector<int> dist(graph.nodes().size(), kUnreached);
    std::deque<std::size_t> queue;
    for (std::size_t s : sources) {
        if (dist[s] == kUnreached) {
            dist[s] = 0;
            queue.push_back(s);
        }
    }
    while (!queue.empty()) {
        std::size_t current = queue.front();
        queue.pop_front();
        // forward traversal terminates at stubs, so paths never pass through one
        if (dist[current] > 0 && graph.node(current).stub) continue;
        for (const auto& edge : graph.in_edges(current)) {
            if (dist[edge.to] == kUnreached) {
                dist[edge.to] = dist[current] + 1;
                queue.push_back(edge.to);
            }
        }
    }
    return dist;
}

std::vector<std::size_t> matched_nodes(const Graph& graph) {
    std::vector<std::size_t> sources;
    for (std::size_t i = 0; i < graph.nodes().size(); ++i) {
        if (graph.has_match(i)) sources.push_back(i);
    }
    return sources;
}

// Distinct simple-path lengths from `from` to `target`, depth-first with an
// on-path visited set. Exponential in the worst case; only used behind the
// all_path_lengths switch.
void collect_path_lengths(const Graph& graph, std::size_t from, std::size_t target,
                          std::vector<bool>& on_path, int depth, std::set<int>& lengths) {
    if (from == target && depth > 0) {
        lengths.insert(depth);
        return;
    }
    if (depth > 0 && graph.node(from).stub) return;
    on_path[from] = true;
    for (const auto& edge : graph.out_edges(from)) {
        if (on_path[edge.to]) continue;
        collect_path_lengths(graph, edge.to, target, on_path, depth + 1, lengths);
    }
    on_path[from] = false;
}

// severity strata a matched node belongs to
std::set<std::string> severity_strata(const Graph& graph, std::size_t node) {
    std::set<std::string> strata;
    for (const auto& vuln_id : graph.matches_of(node)) {
        auto it = graph.vulns().find(vuln_id);
        Severity severity = it == graph.vulns().end() ? Severity::unknown : it->second.severity;
        strata.insert(std::string(to_string(severity)));
    }
    return strata;
}

}  // namespace

std::optional<int> shortest_vuln_distance(const Graph& graph, const LibraryId& library,
                                          const Version& version) {
    auto root = graph.find(library, version);
    if (!root) {
        throw Error(ErrorKind::unknown_version,
                    library.canonical + "@" + version.canonical() + " is not in the graph");
    }
    if (graph.has_match(*root)) return 0;

    std::vector<int> dist(graph.nodes().size(), kUnreached);
    std::deque<std::size_t> queue;
    dist[*root] = 0;
    queue.push_back(*root);
    while (!queue.empty()) {
        std::size_t current = queue.front();
        queue.pop_front();
        for (const auto& edge : graph.out_edges(current)) {
            if (dist[edge.to] != kUnreached) continue;
            dist[edge.to] = dist[current] + 1;
            if (graph.has_match(edge.to)) return dist[edge.to];
            if (!graph.node(edge.to).stub) queue.push_back(edge.to);
        }
    }
    return std::nullopt;
}

std::optional<int> library_shortest_level(const Graph& graph, const LibraryId& library) {
    std::optional<int> best;
    for (std::size_t index : graph.versions_of(library)) {
        if (graph.node(index).stub) continue;
        auto distance = shortest_vuln_distance(graph, library, graph.node(index).version);
        if (distance && (!best || *distance < *best)) best = distance;
    }
    return best;
}

PropagationReport propagation_histogram(const Graph& graph, HistogramMode mode, Stratify stratify,
                                        bool all_path_lengths) {
    PropagationReport report;
    report.mode = mode;

    // stratum -> level -> count
    std::map<std::string, std::map<int, long long>> counts;
    std::set<LibraryId> affected;
    int max_level = 0;

    auto tally = [&](const std::string& stratum, int level, const LibraryId& library) {
        counts[stratum][level] += 1;
        affected.insert(library);
        max_level = std::max(max_level, level);
    };

    if (mode == HistogramMode::shortest_per_library) {
        // strata partition the sources; one multi-source BFS each
        std::map<std::string, std::vector<std::size_t>> sources_by_stratum;
        for (std::size_t node : matched_nodes(graph)) {
            if (stratify == Stratify::none) {
                sources_by_stratum["all"].push_back(node);
            } else if (stratify == Stratify::language) {
                sources_by_stratum[graph.language_of(graph.node(node).library)].push_back(node);
            } else {
                for (const auto& stratum : severity_strata(graph, node)) {
                    sources_by_stratum[stratum].push_back(node);
                }
            }
        }
        for (const auto& [stratum, sources] : sources_by_stratum) {
            std::vector<int> dist = distances_to_sources(graph, sources);
            for (const auto& [library, _] : graph.libraries()) {
                int best = kUnreached;
                for (std::size_t index : graph.versions_of(library)) {
                    if (graph.node(index).stub) continue;
                    if (dist[index] != kUnreached && (best == kUnreached || dist[index] < best)) {
                        best = dist[index];
                    }
                }
                if (best != kUnreached) tally(stratum, best, library);
            }
        }
    } else {
        // per vulnerable target: minimal distance per library, one count per
        // distinct level per (library, stratum)
        std::map<std::string, std::map<LibraryId, std::set<int>>> levels_by_stratum;
        std::vector<bool> on_path;
        for (std::size_t target : matched_nodes(graph)) {
            std::set<std::string> strata;
            if (stratify == Stratify::none) {
                strata.insert("all");
            } else if (stratify == Stratify::language) {
                strata.insert(graph.language_of(graph.node(target).library));
            } else {
                strata = severity_strata(graph, target);
            }

            std::map<LibraryId, std::set<int>> levels;
            if (all_path_lengths) {
                on_path.assign(graph.nodes().size(), false);
                for (std::size_t root = 0; root < graph.nodes().size(); ++root) {
                    if (graph.node(root).stub) continue;
                    std::set<int> lengths;
                    collect_path_lengths(graph, root, target, on_path, 0, lengths);
                    if (root == target) lengths.insert(0);
                    for (int len : lengths) levels[graph.node(root).library].insert(len);
                }
            } else {
                // minimal distance per (library, target): min over the
                // library's versions
                std::vector<int> dist = distances_to_sources(graph, {target});
                std::map<LibraryId, int> min_per_library;
                for (std::size_t index = 0; index < graph.nodes().size(); ++index) {
                    if (dist[index] == kUnreached || graph.node(index).stub) continue;
                    auto [it, inserted] =
                        min_per_library.emplace(graph.node(index).library, dist[index]);
                    if (!inserted && dist[index] < it->second) it->second = dist[index];
                }
                for (const auto& [library, minimum] : min_per_library) {
                    levels[library].insert(minimum);
                }
            }
            for (const auto& [library, library_levels] : levels) {
                for (const auto& stratum : strata) {
                    auto& accumulated = levels_by_stratum[stratum][library];
                    accumulated.insert(library_levels.begin(), library_levels.end());
                }
            }
        }
        for (const auto& [stratum, by_library] : levels_by_stratum) {
            for (const auto& [library, levels] : by_library) {
                for (int level : levels) tally(stratum, level, library);
            }
        }
    }

    for (const auto& [stratum, by_level] : counts) {
        for (const auto& [level, count] : by_level) {
            report.rows.push_back(PropagationRow{level, count, stratum});
        }
    }
    report.affected_libraries = static_cast<long long>(affected.size());
    report.max_level = max_level;
    return report;
}

EcosystemStats ecosystem_stats(const Graph& graph) {
    EcosystemStats stats;
    for (const auto& [library, _] : graph.libraries()) {
        for (std::size_t index : graph.versions_of(library)) {
            if (!graph.node(index).stub) {
                ++stats.total_libraries;
                break;
            }
        }
    }
    stats.total_vulnerabilities = static_cast<long long>(graph.vulns().size());
    stats.vulns_per_10k = stats.total_libraries == 0
                              ? 0.0
                              : 10000.0 * static_cast<double>(stats.total_vulnerabilities) /
                                    static_cast<double>(stats.total_libraries);

    std::set<LibraryId> connected = connected_libraries(graph);
    stats.connected_count = static_cast<long long>(connected.size());

    std::vector<int> dist = distances_to_sources(graph, matched_nodes(graph));
    long long connected_affected = 0;
    long long latest_affected = 0;
    int max_level = 0;
    for (const auto& library : connected) {
        int best = kUnreached;
        for (std::size_t index : graph.versions_of(library)) {
            if (graph.node(index).stub) continue;
            if (dist[index] != kUnreached && (best == kUnreached || dist[index] < best)) {
                best = dist[index];
            }
        }
        if (best >= 1) ++connected_affected;
        if (best != kUnreached) max_level = std::max(max_level, best);

        try {
            const auto& latest = latest_version(graph, library);
            auto index = graph.find(library, latest.version);
            if (index && dist[*index] >= 1) ++latest_affected;
        } catch (const Error&) {
            // connected via stub-only participation cannot happen; defensive
        }
    }
    stats.connected_affected_fraction =
        stats.connected_count == 0
            ? 0.0
            : static_cast<double>(connected_affected) / static_cast<double>(stats.connected_count);
    stats.latest_affected_fraction =
        stats.connected_count == 0
            ? 0.0
            : static_cast<double>(latest_affected) / static_cast<double>(stats.connected_count);
    stats.max_chain_level = max_level;
    return stats;
}

}  // namespace depnet

#include "depnet/upgrade.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>

namespace depnet {

namespace {

constexpr int kUnreached = -1;

// Reverse BFS from `target`: dist[v] = shortest forward distance v -> target.
// Paths never pass through stubs (forward traversal terminates there).
std::vector<int> distances_to_target(const Graph& graph, std::size_t target) {
    std::vector<int> dist(graph.nodes().size(), kUnreached);
    std::deque<std::size_t> queue;
    dist[target] = 0;
    queue.push_back(target);
    while (!queue.empty()) {
        std::size_t current = queue.front();
        queue.pop_front();
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

// Deterministic next hop along a shortest path to the target: the smallest
// (library, version) neighbour one level closer, preferring lockfile edges.
struct NextHop {
    std::size_t node = 0;
    Provenance provenance = Provenance::lockfile;
};

std::optional<NextHop> next_hop(const Graph& graph, std::size_t from, const std::vector<int>& dist) {
    std::optional<NextHop> best;
    for (const auto& edge : graph.out_edges(from)) {
        if (dist[edge.to] != dist[from] - 1) continue;
        if (!best || edge.to < best->node) {
            best = NextHop{edge.to, edge.provenance};
        } else if (edge.to == best->node && edge.provenance == Provenance::lockfile) {
            best->provenance = Provenance::lockfile;
        }
    }
    return best;
}

struct TargetReach {
    std::vector<int> dist;             // strict reach: distance to the target
    std::vector<char> vuln_reach;      // nodes reaching any same-vuln matched version
    std::vector<char> matched_set;     // versions matched by the target's vulns
    bool vuln_reach_ready = false;
};

// Versions matched by any vulnerability that matches `target`.
std::vector<char> same_vuln_versions(const Graph& graph, std::size_t target) {
    std::vector<char> matched(graph.nodes().size(), 0);
    const auto& vuln_ids = graph.matches_of(target);
    for (std::size_t i = 0; i < graph.nodes().size(); ++i) {
        const auto& here = graph.matches_of(i);
        if (here.empty()) continue;
        for (const auto& id : vuln_ids) {
            if (here.contains(id)) {
                matched[i] = 1;
                break;
            }
        }
    }
    return matched;
}

std::vector<char> reverse_reach(const Graph& graph, const std::vector<char>& sources) {
    std::vector<char> reached(sources);
    std::deque<std::size_t> queue;
    for (std::size_t i = 0; i < sources.size(); ++i) {
        if (sources[i]) queue.push_back(i);
    }
    while (!queue.empty()) {
        std::size_t current = queue.front();
        queue.pop_front();
        if (!sources[current] && graph.node(current).stub) continue;
        for (const auto& edge : graph.in_edges(current)) {
            if (!reached[edge.to]) {
                reached[edge.to] = 1;
                queue.push_back(edge.to);
            }
        }
    }
    return reached;
}

// Chains arrive target-major, so a single slot suffices; the vuln-aware
// reach set is only computed when the mode asks for it.
class ReachCache {
public:
    explicit ReachCache(const Graph& graph) : graph_(graph) {}

    const TargetReach& for_target(std::size_t target, FixMode mode) {
        if (!current_ || *current_ != target) {
            current_ = target;
            reach_ = TargetReach{};
            reach_.dist = distances_to_target(graph_, target);
            reach_.matched_set = same_vuln_versions(graph_, target);
        }
        if (mode == FixMode::vuln_aware && !reach_.vuln_reach_ready) {
            reach_.vuln_reach = reverse_reach(graph_, reach_.matched_set);
            reach_.vuln_reach_ready = true;
        }
        return reach_;
    }

private:
    const Graph& graph_;
    std::optional<std::size_t> current_;
    TargetReach reach_;
};

FixResult evaluate_chain(const Graph& graph, const DependencyChain& chain, FixMode mode,
                         const TargetReach& reach, std::size_t target) {
    FixResult result;
    result.chain = chain;

    auto root_index = graph.find(chain.root().first, chain.root().second);
    auto direct_index = graph.find(chain.direct_dependency().first, chain.direct_dependency().second);
    if (!root_index || !direct_index) {
        throw Error(ErrorKind::unknown_version, "chain references versions not in the graph");
    }
    const auto& root = graph.node(*root_index);
    const auto& direct = graph.node(*direct_index);

    bool any_newer = false;
    bool any_temporal = false;
    for (std::size_t candidate_index : graph.versions_of(direct.library)) {
        const auto& candidate = graph.node(candidate_index);
        if (candidate.stub) continue;
        if (compare_versions(candidate.version, direct.version) != std::strong_ordering::greater)
            continue;
        any_newer = true;
        if (candidate.released >= root.released) continue;  // strictly before the root
        any_temporal = true;

        bool still_vulnerable;
        if (mode == FixMode::strict_version) {
            still_vulnerable = reach.dist[candidate_index] != kUnreached;
            // upgrading within the vulnerable library itself must not land on
            // another version matched by the same vulnerability
            if (!still_vulnerable && candidate.library == graph.node(target).library) {
                still_vulnerable = reach.matched_set[candidate_index] != 0;
            }
        } else {
            still_vulnerable = reach.vuln_reach[candidate_index] != 0;
        }
        if (!still_vulnerable) {
            // versions_of is ascending, so the first hit is the lowest fix
            result.fixable = true;
            result.candidate = std::make_pair(candidate.library, candidate.version);
            result.reason = FixReason::fixed;
            return result;
        }
    }

    result.fixable = false;
    result.reason = !any_newer      ? FixReason::not_newer
                    : !any_temporal ? FixReason::no_candidate_before_release
                                    : FixReason::all_candidates_still_vulnerable;
    return result;
}

// Exclusion rules mirrored by chain_fixable_by_upgrade: manifest-resolved
// first edge (with no lockfile alternative) or stub direct dependency.
bool is_excluded(const Graph& graph, std::size_t root, std::size_t direct, Provenance first_edge) {
    if (graph.node(direct).stub) return true;
    if (first_edge == Provenance::lockfile) return false;
    for (const auto& edge : graph.out_edges(root)) {
        if (edge.to == direct && edge.provenance == Provenance::lockfile) return false;
    }
    return true;
}

std::string severity_group(const Graph& graph, std::size_t target) {
    Severity best = Severity::unknown;
    bool first = true;
    for (const auto& id : graph.matches_of(target)) {
        auto it = graph.vulns().find(id);
        Severity severity = it == graph.vulns().end() ? Severity::unknown : it->second.severity;
        if (first || severity_rank(severity) > severity_rank(best)) {
            best = severity;
            first = false;
        }
    }
    return std::string(to_string(best));
}

}  // namespace

std::string_view to_string(FixReason reason) {
    switch (reason) {
        case FixReason::not_newer: return "NOT_NEWER";
        case FixReason::no_candidate_before_release: return "NO_CANDIDATE_BEFORE_RELEASE";
        case FixReason::all_candidates_still_vulnerable: return "ALL_CANDIDATES_STILL_VULNERABLE";
        case FixReason::fixed: return "FIXED";
    }
    return "?";
}

namespace detail {

void for_each_vulnerable_chain(
    const Graph& graph, ChainScope scope,
    const std::function<void(const DependencyChain&, bool excluded, std::size_t target)>& emit) {
    std::vector<bool> is_root(graph.nodes().size(), false);
    if (scope == ChainScope::all_versions) {
        for (std::size_t i = 0; i < graph.nodes().size(); ++i) {
            is_root[i] = !graph.node(i).stub;
        }
    } else {
        for (const auto& [library, _] : graph.libraries()) {
            bool has_real = false;
            for (std::size_t index : graph.versions_of(library)) {
                if (!graph.node(index).stub) has_real = true;
            }
            if (!has_real) continue;
            const auto& latest = latest_version(graph, library);
            if (auto index = graph.find(library, latest.version)) is_root[*index] = true;
        }
    }

    for (std::size_t target = 0; target < graph.nodes().size(); ++target) {
        if (!graph.has_match(target)) continue;
        std::vector<int> dist = distances_to_target(graph, target);

        for (std::size_t root = 0; root < graph.nodes().size(); ++root) {
            if (!is_root[root] || dist[root] < 1) continue;

            DependencyChain chain;
            chain.nodes.reserve(static_cast<std::size_t>(dist[root]) + 1);
            std::size_t current = root;
            Provenance first_edge = Provenance::lockfile;
            bool complete = true;
            while (current != target) {
                chain.nodes.emplace_back(graph.node(current).library, graph.node(current).version);
                auto hop = next_hop(graph, current, dist);
                if (!hop) {
                    complete = false;
                    break;
                }
                if (current == root) first_edge = hop->provenance;
                current = hop->node;
            }
            if (!complete) continue;
            chain.nodes.emplace_back(graph.node(target).library, graph.node(target).version);

            std::size_t direct = *graph.find(chain.nodes[1].first, chain.nodes[1].second);
            emit(chain, is_excluded(graph, root, direct, first_edge), target);
        }
    }
}

}  // namespace detail

ChainSet enumerate_vulnerable_chains(const Graph& graph, ChainScope scope) {
    ChainSet out;
    detail::for_each_vulnerable_chain(
        graph, scope, [&](const DependencyChain& chain, bool excluded, std::size_t) {
            (excluded ? out.excluded : out.chains).push_back(chain);
        });
    return out;
}

FixResult chain_fixable_by_upgrade(const Graph& graph, const DependencyChain& chain, FixMode mode) {
    if (chain.length() < 1) {
        throw Error(ErrorKind::excluded_chain, "chain has no dependency edge to upgrade");
    }
    auto root_index = graph.find(chain.root().first, chain.root().second);
    auto direct_index = graph.find(chain.direct_dependency().first, chain.direct_dependency().second);
    auto target_index = graph.find(chain.target().first, chain.target().second);
    if (!root_index || !direct_index || !target_index) {
        throw Error(ErrorKind::unknown_version, "chain references versions not in the graph");
    }
    if (graph.node(*direct_index).stub) {
        throw Error(ErrorKind::excluded_chain,
                    "direct dependency " + chain.direct_dependency().first.canonical +
                        " was never ingested (stub)");
    }
    bool lockfile_edge = false;
    bool any_edge = false;
    for (const auto& edge : graph.out_edges(*root_index)) {
        if (edge.to == *direct_index) {
            any_edge = true;
            lockfile_edge = lockfile_edge || edge.provenance == Provenance::lockfile;
        }
    }
    if (!any_edge) {
        throw Error(ErrorKind::unknown_version, "chain's first edge is not in the graph");
    }
    if (!lockfile_edge) {
        throw Error(ErrorKind::excluded_chain, "first edge was resolved from a manifest");
    }

    ReachCache cache(graph);
    return evaluate_chain(graph, chain, mode, cache.for_target(*target_index, mode), *target_index);
}

FixabilityReport fixability_report(const Graph& graph, FixGrouping grouping, ChainScope scope,
                                   FixMode mode) {
    FixabilityReport report;
    report.grouping = grouping;
    report.scope = scope;
    report.mode = mode;

    std::map<std::string, std::pair<long long, long long>> rows;  // group -> (fixed, not fixed)
    ReachCache cache(graph);

    detail::for_each_vulnerable_chain(
        graph, scope, [&](const DependencyChain& chain, bool excluded, std::size_t target) {
            ++report.total_chains;
            if (excluded) {
                ++report.excluded_chain_count;
                return;
            }
            FixResult result = evaluate_chain(graph, chain, mode, cache.for_target(target, mode), target);

            std::string group;
            switch (grouping) {
                case FixGrouping::level:
                    group = std::to_string(chain.length());
                    break;
                case FixGrouping::severity:
                    group = severity_group(graph, target);
                    break;
                case FixGrouping::language:
                    group = graph.language_of(graph.node(target).library);
                    break;
            }
            auto& row = rows[group];
            if (result.fixable) {
                ++row.first;
            } else {
                ++row.second;
            }
        });

    // numeric sort for level rows, lexicographic otherwise
    std::vector<std::string> keys;
    for (const auto& [group, _] : rows) keys.push_back(group);
    if (grouping == FixGrouping::level) {
        std::sort(keys.begin(), keys.end(),
                  [](const std::string& a, const std::string& b) { return std::stoi(a) < std::stoi(b); });
    }
    for (const auto& key : keys) {
        const auto& [fixed, not_fixed] = rows[key];
        FixRow row;
        row.group = key;
        row.fixed_count = fixed;
        row.not_fixed_count = not_fixed;
        row.fixed_fraction =
            fixed + not_fixed == 0 ? 0.0
                                   : static_cast<double>(fixed) / static_cast<double>(fixed + not_fixed);
        report.rows.push_back(std::move(row));
    }
    return report;
}

Quartiles per_vuln_fix_rate_quartiles(const Graph& graph, ChainScope scope, FixMode mode) {
    std::map<std::string, std::pair<long long, long long>> per_vuln;  // id -> (fixed, total)
    ReachCache cache(graph);

    detail::for_each_vulnerable_chain(
        graph, scope, [&](const DependencyChain& chain, bool excluded, std::size_t target) {
            if (excluded) return;
            FixResult result = evaluate_chain(graph, chain, mode, cache.for_target(target, mode), target);
            for (const auto& vuln_id : graph.matches_of(target)) {
                auto& [fixed, total] = per_vuln[vuln_id];
                ++total;
                if (result.fixable) ++fixed;
            }
        });

    std::vector<double> fractions;
    for (const auto& [id, counts] : per_vuln) {
        if (counts.second > 0) {
            fractions.push_back(static_cast<double>(counts.first) /
                                static_cast<double>(counts.second));
        }
    }
    if (fractions.empty()) {
        throw Error(ErrorKind::no_chains, "no vulnerability has an evaluable chain");
    }
    std::sort(fractions.begin(), fractions.end());

    auto interpolate = [&](double p) {
        double h = p * static_cast<double>(fractions.size() - 1);
        std::size_t lo = static_cast<std::size_t>(h);
        std::size_t hi = std::min(lo + 1, fractions.size() - 1);
        return fractions[lo] + (h - static_cast<double>(lo)) * (fractions[hi] - fractions[lo]);
    };
    return Quartiles{interpolate(0.25), interpolate(0.5), interpolate(0.75)};
}

}  // namespace depnet

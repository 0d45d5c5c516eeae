#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "depnet/graph.hpp"

namespace depnet {

/// Exact-version path from a root library version to a vulnerable version.
/// length() == number of edges; the terminal node carries the match.
struct DependencyChain {
    std::vector<std::pair<LibraryId, Version>> nodes;

    int length() const { return static_cast<int>(nodes.size()) - 1; }
    const std::pair<LibraryId, Version>& root() const { return nodes.front(); }
    const std::pair<LibraryId, Version>& direct_dependency() const { return nodes[1]; }
    const std::pair<LibraryId, Version>& target() const { return nodes.back(); }
};

enum class ChainScope { all_versions, latest_only };

/// STRICT_VERSION requires the upgrade candidate to avoid the chain's exact
/// vulnerable version; VULN_AWARE requires it to avoid every version matched
/// by the same vulnerabilities.
enum class FixMode { strict_version, vuln_aware };

enum class FixReason { not_newer, no_candidate_before_release, all_candidates_still_vulnerable, fixed };

std::string_view to_string(FixReason reason);

struct FixResult {
    DependencyChain chain;
    bool fixable = false;
    std::optional<std::pair<LibraryId, Version>> candidate;  ///< lowest sufficient upgrade
    FixReason reason = FixReason::not_newer;
};

struct ChainSet {
    std::vector<DependencyChain> chains;
    /// chains filtered from the upgrade analysis: first edge resolved from a
    /// manifest, or direct dependency is a stub
    std::vector<DependencyChain> excluded;
};

/// One minimal chain per (root version, reachable vulnerable version) pair,
/// length >= 1. Roots are all versions or only each library's latest.
ChainSet enumerate_vulnerable_chains(const Graph& graph, ChainScope scope);

/// Can upgrading the root's direct dependency sever the chain? Candidates
/// are versions of the direct dependency's library that are strictly newer
/// than the pinned one and released strictly before the root. Throws
/// Error{excluded_chain} for chains the enumeration would have excluded.
FixResult chain_fixable_by_upgrade(const Graph& graph, const DependencyChain& chain, FixMode mode);

enum class FixGrouping { level, severity, language };

struct FixRow {
    std::string group;
    long long fixed_count = 0;
    long long not_fixed_count = 0;
    double fixed_fraction = 0.0;
};

struct FixabilityReport {
    FixGrouping grouping = FixGrouping::level;
    ChainScope scope = ChainScope::all_versions;
    FixMode mode = FixMode::strict_version;
    std::vector<FixRow> rows;
    long long excluded_chain_count = 0;
    long long total_chains = 0;  ///< fixed + not fixed + excluded
};

/// Aggregate fixability over all enumerated chains. severity grouping uses
/// the highest severity among the terminal's vulnerabilities; language uses
/// the vulnerable library's language.
FixabilityReport fixability_report(const Graph& graph, FixGrouping grouping, ChainScope scope,
                                   FixMode mode);

struct Quartiles {
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
};

/// Quartiles (linear interpolation) of the per-vulnerability fixed fraction
/// over that vulnerability's chains. Throws Error{no_chains}.
Quartiles per_vuln_fix_rate_quartiles(const Graph& graph,
                                      ChainScope scope = ChainScope::all_versions,
                                      FixMode mode = FixMode::strict_version);

namespace detail {

/// Streaming enumeration shared by enumerate/report paths: calls `emit` for
/// every chain with its exclusion flag and the target node index.
void for_each_vulnerable_chain(
    const Graph& graph, ChainScope scope,
    const std::function<void(const DependencyChain&, bool excluded, std::size_t target)>& emit);

}  // namespace detail

}  // namespace depnet

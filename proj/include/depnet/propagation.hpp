#pragma once

#include <optional>
#include <string>
#include <vector>

#include "depnet/graph.hpp"

namespace depnet {

enum class HistogramMode { shortest_per_library, all_levels };
enum class Stratify { none, language, severity };

struct PropagationRow {
    int level = 0;
    long long count = 0;
    std::string stratum;  ///< "all" when unstratified

    bool operator==(const PropagationRow&) const = default;
};

struct PropagationReport {
    HistogramMode mode = HistogramMode::shortest_per_library;
    std::vector<PropagationRow> rows;          ///< ordered by (stratum, level)
    long long affected_libraries = 0;          ///< libraries with any finite level
    int max_level = 0;
};

struct EcosystemStats {
    long long total_libraries = 0;       ///< libraries with at least one non-stub version
    long long total_vulnerabilities = 0;
    double vulns_per_10k = 0.0;
    long long connected_count = 0;
    double connected_affected_fraction = 0.0;  ///< shortest level >= 1
    double latest_affected_fraction = 0.0;     ///< distance at the latest version >= 1
    int max_chain_level = 0;
};

/// Breadth-first distance from a version node to the nearest version with a
/// vulnerability match; 0 when the node itself is matched, nullopt when no
/// vulnerable version is reachable. Cycles are tolerated. Throws
/// Error{unknown_version}.
std::optional<int> shortest_vuln_distance(const Graph& graph, const LibraryId& library,
                                          const Version& version);

/// Minimum shortest distance over all the library's versions.
std::optional<int> library_shortest_level(const Graph& graph, const LibraryId& library);

/// Per-level counts of affected libraries.
///
/// shortest_per_library counts each library once at its shortest level.
/// all_levels counts, per library, one entry for every distinct level in
/// { minimal distance to each reachable vulnerable version }; with
/// `all_path_lengths` every distinct simple-path length counts instead of
/// only the minimal one. Stratification attributes counts to the vulnerable
/// library's language or the matched vulnerability's severity; a library may
/// appear in several strata.
PropagationReport propagation_histogram(const Graph& graph, HistogramMode mode,
                                        Stratify stratify = Stratify::none,
                                        bool all_path_lengths = false);

EcosystemStats ecosystem_stats(const Graph& graph);

}  // namespace depnet

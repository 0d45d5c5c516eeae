#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "depnet/ingest.hpp"
#include "depnet/types.hpp"
#include "depnet/version.hpp"

namespace depnet {

/// Name-level library record grouping its version nodes.
struct Library {
    LibraryId id;
    std::string language = "UNKNOWN";
    std::set<PackageManager> package_managers;

    bool operator==(const Library&) const = default;
};

struct DepEdge {
    LibraryId to_library;
    Version to_version;
    Provenance provenance = Provenance::lockfile;

    bool operator==(const DepEdge&) const = default;
};

/// One released version of a library with its exact resolved dependencies.
/// Stub nodes stand in for dependency targets never ingested directly; they
/// carry released == 0, no dependencies, and never match vulnerabilities.
struct LibraryVersionNode {
    LibraryId library;
    Version version;
    std::int64_t released = 0;
    bool stub = false;
    std::vector<DepEdge> deps;
};

/// Index-based adjacency; `to` indexes Graph::nodes().
struct AdjEdge {
    std::size_t to = 0;
    Provenance provenance = Provenance::lockfile;
};

/// Immutable temporal dependency graph. Nodes are sorted by (library,
/// version); adjacency, reverse adjacency and per-library version lists are
/// precomputed. Safe for unrestricted concurrent reads.
class Graph {
public:
    const std::map<LibraryId, Library>& libraries() const { return libraries_; }
    const std::vector<LibraryVersionNode>& nodes() const { return nodes_; }
    const LibraryVersionNode& node(std::size_t index) const { return nodes_[index]; }

    std::optional<std::size_t> find(const LibraryId& library, const Version& version) const;

    std::span<const AdjEdge> out_edges(std::size_t index) const { return out_[index]; }
    std::span<const AdjEdge> in_edges(std::size_t index) const { return in_[index]; }

    /// Indices of the library's versions, ascending by version order.
    std::span<const std::size_t> versions_of(const LibraryId& library) const;

    const std::map<std::string, VulnRecord>& vulns() const { return vulns_; }
    /// Vulnerability ids matched onto a version node (empty for most nodes).
    const std::set<std::string>& matches_of(std::size_t index) const { return matches_[index]; }
    bool has_match(std::size_t index) const { return !matches_[index].empty(); }

    std::size_t stub_count() const { return stub_count_; }
    std::size_t edge_count() const;
    std::string language_of(const LibraryId& library) const;

    /// Structural identity: same libraries, nodes, edges, vulns and matches.
    bool operator==(const Graph& other) const;

private:
    friend class GraphBuilder;
    friend struct GraphAccess;

    void finalize_indices();

    std::map<LibraryId, Library> libraries_;
    std::vector<LibraryVersionNode> nodes_;
    std::map<std::pair<LibraryId, std::string>, std::size_t> index_;  // key: (lib, canonical)
    std::map<LibraryId, std::vector<std::size_t>> by_library_;
    std::vector<std::vector<AdjEdge>> out_;
    std::vector<std::vector<AdjEdge>> in_;
    std::vector<std::set<std::string>> matches_;
    std::map<std::string, VulnRecord> vulns_;
    std::size_t stub_count_ = 0;
};

/// A resolution or requirement file tagged with the library version that
/// owns it and that version's release timestamp.
struct ManifestInput {
    LibraryId library;
    Version version;
    std::int64_t released = 0;
    std::variant<ResolvedManifest, RequirementSet> payload;
};

/// Accumulates ingested records and resolves them into an immutable Graph.
///
/// Owner edges: when the owner also has a requirement set, its direct
/// dependencies are the requirement names, taken from the resolution file
/// pins when present (provenance lockfile) and resolved temporally otherwise
/// (provenance manifest). Without a requirement set, the roots of a
/// CocoaPods lockfile's entry forest (or every pin of a flat file) become
/// direct dependencies.
class GraphBuilder {
public:
    /// Register a version node with no dependency information of its own.
    void add_version(const LibraryId& library, const Version& version, std::int64_t released);

    void add_resolved(const LibraryId& library, const Version& version, std::int64_t released,
                      ResolvedManifest manifest);

    void add_requirements(const LibraryId& library, const Version& version, std::int64_t released,
                          RequirementSet requirements);

    /// Direct dependency edge; targets not ingested directly become stubs.
    void add_dependency(const LibraryId& from_library, const Version& from_version,
                        std::int64_t from_released, const LibraryId& to_library,
                        const Version& to_version, Provenance provenance);

    void add_metadata(const LibraryMeta& meta);

    /// Highest version of `target` satisfying `constraint` and released
    /// strictly before `dependent_released`; stubs are never candidates.
    std::optional<Version> resolve_requirement(const LibraryId& target,
                                               const Constraint& constraint,
                                               std::int64_t dependent_released) const;

    Graph build(Warnings* warnings = nullptr);

private:
    struct PendingVersion {
        Version version;
        std::int64_t released = 0;
        bool direct = false;  // ingested directly (not just seen as a dep target)
        std::vector<DepEdge> deps;
    };

    struct PendingOwner {
        std::vector<ResolvedManifest> resolved;
        std::vector<RequirementSet> requirements;
    };

    PendingVersion& ensure_version(const LibraryId& library, const Version& version);
    void note_package_manager(const LibraryId& library, SourceKind kind);

    std::map<LibraryId, std::map<std::string, PendingVersion>> versions_;
    std::map<std::pair<LibraryId, std::string>, PendingOwner> owners_;
    std::map<LibraryId, LibraryMeta> metadata_;
    std::map<LibraryId, std::set<PackageManager>> package_managers_;
};

/// Convenience wrapper over GraphBuilder for pre-tagged inputs.
Graph build_graph(std::vector<ManifestInput> inputs, const std::vector<LibraryMeta>& metadata,
                  Warnings* warnings = nullptr);

/// Version with the latest release timestamp (ties broken by version order);
/// throws Error{no_versions} when the library has no non-stub version.
const LibraryVersionNode& latest_version(const Graph& graph, const LibraryId& library);

/// Libraries participating in at least one dependency edge in either
/// direction through a non-stub node.
std::set<LibraryId> connected_libraries(const Graph& graph);

}  // namespace depnet

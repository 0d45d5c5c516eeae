#include "depnet/graph.hpp"

#include <algorithm>

#include "graph_access.hpp"

namespace depnet {

namespace {

// Structural equality keeps the original spelling: "1.2" and "1.2.0" compare
// equal as versions but are different persisted records.
bool strict_eq(const Version& a, const Version& b) {
    return compare_versions(a, b) == std::strong_ordering::equal && a.raw == b.raw;
}

bool strict_eq(const DepEdge& a, const DepEdge& b) {
    return a.to_library == b.to_library && strict_eq(a.to_version, b.to_version) &&
           a.provenance == b.provenance;
}

bool strict_eq(const VersionRange& a, const VersionRange& b) {
    if (a.start.has_value() != b.start.has_value() || a.end.has_value() != b.end.has_value())
        return false;
    if (a.start && !strict_eq(*a.start, *b.start)) return false;
    if (a.end && !strict_eq(*a.end, *b.end)) return false;
    return a.start_inclusive == b.start_inclusive && a.end_inclusive == b.end_inclusive;
}

bool strict_eq(const AffectedLibrary& a, const AffectedLibrary& b) {
    if (a.library != b.library || a.ranges.size() != b.ranges.size() ||
        a.exact_versions.size() != b.exact_versions.size())
        return false;
    for (std::size_t i = 0; i < a.ranges.size(); ++i) {
        if (!strict_eq(a.ranges[i], b.ranges[i])) return false;
    }
    for (std::size_t i = 0; i < a.exact_versions.size(); ++i) {
        if (!strict_eq(a.exact_versions[i], b.exact_versions[i])) return false;
    }
    return true;
}

bool strict_eq(const VulnRecord& a, const VulnRecord& b) {
    if (a.id != b.id || a.description != b.description || a.severity != b.severity ||
        a.published != b.published || a.references != b.references ||
        a.affected.size() != b.affected.size())
        return false;
    for (std::size_t i = 0; i < a.affected.size(); ++i) {
        if (!strict_eq(a.affected[i], b.affected[i])) return false;
    }
    return true;
}

bool node_key_less(const LibraryVersionNode& a, const LibraryVersionNode& b) {
    if (a.library != b.library) return a.library < b.library;
    return compare_versions(a.version, b.version) == std::strong_ordering::less;
}

}  // namespace

std::optional<std::size_t> Graph::find(const LibraryId& library, const Version& version) const {
    auto it = index_.find({library, version.canonical()});
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::span<const std::size_t> Graph::versions_of(const LibraryId& library) const {
    auto it = by_library_.find(library);
    if (it == by_library_.end()) return {};
    return it->second;
}

std::size_t Graph::edge_count() const {
    std::size_t total = 0;
    for (const auto& node : nodes_) total += node.deps.size();
    return total;
}

std::string Graph::language_of(const LibraryId& library) const {
    auto it = libraries_.find(library);
    if (it == libraries_.end() || it->second.language.empty()) return "UNKNOWN";
    return it->second.language;
}

bool Graph::operator==(const Graph& other) const {
    if (libraries_ != other.libraries_ || nodes_.size() != other.nodes_.size() ||
        vulns_.size() != other.vulns_.size())
        return false;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const auto& a = nodes_[i];
        const auto& b = other.nodes_[i];
        if (a.library != b.library || !strict_eq(a.version, b.version) ||
            a.released != b.released || a.stub != b.stub || a.deps.size() != b.deps.size())
            return false;
        for (std::size_t d = 0; d < a.deps.size(); ++d) {
            if (!strict_eq(a.deps[d], b.deps[d])) return false;
        }
        if (matches_[i] != other.matches_[i]) return false;
    }
    for (auto it = vulns_.begin(), jt = other.vulns_.begin(); it != vulns_.end(); ++it, ++jt) {
        if (it->first != jt->first || !strict_eq(it->second, jt->second)) return false;
    }
    return true;
}

void Graph::finalize_indices() {
    std::sort(nodes_.begin(), nodes_.end(), node_key_less);

    index_.clear();
    by_library_.clear();
    stub_count_ = 0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        auto& node = nodes_[i];
        auto [it, inserted] = index_.emplace(std::make_pair(node.library, node.version.canonical()), i);
        if (!inserted) {
            throw Error(ErrorKind::version_conflict,
                        "duplicate version node " + node.library.canonical + "@" +
                            node.version.canonical());
        }
        by_library_[node.library].push_back(i);
        if (node.stub) ++stub_count_;

        std::sort(node.deps.begin(), node.deps.end(), [](const DepEdge& a, const DepEdge& b) {
            if (a.to_library != b.to_library) return a.to_library < b.to_library;
            if (auto cmp = compare_versions(a.to_version, b.to_version); cmp != 0)
                return cmp == std::strong_ordering::less;
            return a.provenance < b.provenance;
        });
        node.deps.erase(std::unique(node.deps.begin(), node.deps.end(),
                                    [](const DepEdge& a, const DepEdge& b) { return strict_eq(a, b); }),
                        node.deps.end());
    }

    out_.assign(nodes_.size(), {});
    in_.assign(nodes_.size(), {});
    matches_.assign(nodes_.size(), {});
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        for (const auto& dep : nodes_[i].deps) {
            auto it = index_.find({dep.to_library, dep.to_version.canonical()});
            if (it == index_.end()) {
                throw Error(ErrorKind::malformed_record,
                            "edge target missing: " + dep.to_library.canonical + "@" +
                                dep.to_version.canonical());
            }
            out_[i].push_back(AdjEdge{it->second, dep.provenance});
            in_[it->second].push_back(AdjEdge{i, dep.provenance});
        }
    }
    for (auto& edges : in_) {
        std::sort(edges.begin(), edges.end(), [](const AdjEdge& a, const AdjEdge& b) {
            return a.to != b.to ? a.to < b.to : a.provenance < b.provenance;
        });
    }
}

// --- builder ----------------------------------------------------------------

GraphBuilder::PendingVersion& GraphBuilder::ensure_version(const LibraryId& library,
                                                           const Version& version) {
    auto& slot = versions_[library][version.canonical()];
    if (slot.version.raw.empty()) {
        slot.version = version;
    }
    return slot;
}

void GraphBuilder::note_package_manager(const LibraryId& library, SourceKind kind) {
    switch (kind) {
        case SourceKind::cocoapods_lock:
        case SourceKind::podfile:
            package_managers_[library].insert(PackageManager::cocoapods);
            break;
        case SourceKind::carthage_resolved:
        case SourceKind::cartfile:
            package_managers_[library].insert(PackageManager::carthage);
            break;
        case SourceKind::swiftpm_resolved:
        case SourceKind::package_swift:
            package_managers_[library].insert(PackageManager::swiftpm);
            break;
    }
}

void GraphBuilder::add_version(const LibraryId& library, const Version& version,
                               std::int64_t released) {
    auto& slot = ensure_version(library, version);
    if (slot.direct && slot.released != released) {
        throw Error(ErrorKind::duplicate_version,
                    library.canonical + "@" + version.canonical() +
                        " ingested twice with different release times");
    }
    slot.direct = true;
    slot.released = released;
}

void GraphBuilder::add_resolved(const LibraryId& library, const Version& version,
                                std::int64_t released, ResolvedManifest manifest) {
    add_version(library, version, released);
    note_package_manager(library, manifest.source_kind);
    for (const auto& entry : manifest.entries) {
        note_package_manager(entry.library, manifest.source_kind);
    }
    owners_[{library, version.canonical()}].resolved.push_back(std::move(manifest));
}

void GraphBuilder::add_requirements(const LibraryId& library, const Version& version,
                                    std::int64_t released, RequirementSet requirements) {
    add_version(library, version, released);
    note_package_manager(library, requirements.source_kind);
    owners_[{library, version.canonical()}].requirements.push_back(std::move(requirements));
}

void GraphBuilder::add_dependency(const LibraryId& from_library, const Version& from_version,
                                  std::int64_t from_released, const LibraryId& to_library,
                                  const Version& to_version, Provenance provenance) {
    add_version(from_library, from_version, from_released);
    if (from_library == to_library && from_version == to_version) {
        return;  // self edges carry no information
    }
    ensure_version(to_library, to_version);
    auto& slot = versions_[from_library][from_version.canonical()];
    slot.deps.push_back(DepEdge{to_library, to_version, provenance});
}

void GraphBuilder::add_metadata(const LibraryMeta& meta) {
    metadata_[meta.library] = meta;
}

std::optional<Version> GraphBuilder::resolve_requirement(const LibraryId& target,
                                                         const Constraint& constraint,
                                                         std::int64_t dependent_released) const {
    if (constraint.kind == ConstraintKind::unresolvable) return std::nullopt;
    auto lib = versions_.find(target);
    if (lib == versions_.end()) return std::nullopt;

    std::optional<Version> best;
    for (const auto& [key, pending] : lib->second) {
        if (!pending.direct) continue;  // stubs have no usable release time
        if (pending.released >= dependent_released) continue;
        if (!constraint.satisfied_by(pending.version)) continue;
        if (!best || compare_versions(pending.version, *best) == std::strong_ordering::greater) {
            best = pending.version;
        }
    }
    return best;
}

Graph GraphBuilder::build(Warnings* warnings) {
    // Owner edges resolve against everything registered, so run after all
    // add_* calls. Lockfile entry-to-entry edges first.
    for (auto& [key, owner] : owners_) {
        const LibraryId& owner_lib = key.first;
        for (const auto& manifest : owner.resolved) {
            std::map<LibraryId, Version> pinned;
            for (const auto& entry : manifest.entries) {
                ensure_version(entry.library, entry.version);
                if (!pinned.contains(entry.library)) pinned.emplace(entry.library, entry.version);
            }
            for (const auto& entry : manifest.entries) {
                for (const auto& dep : entry.deps) {
                    if (dep == entry.library) continue;
                    auto pin = pinned.find(dep);
                    Version target_version;
                    if (pin != pinned.end()) {
                        target_version = pin->second;
                    } else {
                        // dangling in-file name: version unknown
                        target_version = Version::parse("0");
                        warn(warnings, "build:" + owner_lib.canonical,
                             "entry '" + entry.library.canonical + "' depends on '" +
                                 dep.canonical + "' which has no entry; stub at version 0");
                    }
                    ensure_version(dep, target_version);
                    auto& from = versions_[entry.library][entry.version.canonical()];
                    from.deps.push_back(DepEdge{dep, target_version, Provenance::lockfile});
                }
            }
        }
    }

    // Owner direct-dependency edges.
    for (auto& [key, owner] : owners_) {
        const LibraryId& owner_lib = key.first;
        auto& owner_slot = versions_[owner_lib][key.second];

        std::map<LibraryId, Version> pinned;
        for (const auto& manifest : owner.resolved) {
            for (const auto& entry : manifest.entries) {
                if (entry.library == owner_lib) continue;
                if (!pinned.contains(entry.library)) pinned.emplace(entry.library, entry.version);
            }
        }

        if (!owner.requirements.empty()) {
            for (const auto& set : owner.requirements) {
                for (const auto& requirement : set.requirements) {
                    if (requirement.library == owner_lib) continue;
                    auto pin = pinned.find(requirement.library);
                    if (pin != pinned.end()) {
                        owner_slot.deps.push_back(
                            DepEdge{requirement.library, pin->second, Provenance::lockfile});
                        continue;
                    }
                    auto resolved = resolve_requirement(requirement.library, requirement.constraint,
                                                        owner_slot.released);
                    if (resolved) {
                        ensure_version(requirement.library, *resolved);
                        owner_slot.deps.push_back(
                            DepEdge{requirement.library, *resolved, Provenance::manifest_resolved});
                    } else {
                        warn(warnings, "build:" + owner_lib.canonical,
                             "requirement on '" + requirement.library.canonical +
                                 "' (" + std::string(to_string(requirement.constraint.kind)) +
                                 ") has no resolvable version, edge dropped");
                    }
                }
            }
        } else {
            // No manifest: the roots of the lockfile entry forest are the
            // owner's direct dependencies (every pin for flat formats).
            for (const auto& manifest : owner.resolved) {
                std::set<LibraryId> referenced;
                for (const auto& entry : manifest.entries) {
                    for (const auto& dep : entry.deps) referenced.insert(dep);
                }
                for (const auto& entry : manifest.entries) {
                    if (entry.library == owner_lib) continue;
                    if (referenced.contains(entry.library)) continue;
                    owner_slot.deps.push_back(
                        DepEdge{entry.library, entry.version, Provenance::lockfile});
                }
            }
        }
    }

    // Assemble nodes; non-direct versions become stubs.
    std::vector<LibraryVersionNode> nodes;
    std::map<LibraryId, Library> libraries;
    std::size_t stub_flags = 0;
    for (auto& [library, versions] : versions_) {
        Library lib;
        lib.id = library;
        if (auto meta = metadata_.find(library); meta != metadata_.end()) {
            lib.language = meta->second.language.empty() ? "UNKNOWN" : meta->second.language;
        }
        if (auto pms = package_managers_.find(library); pms != package_managers_.end()) {
            lib.package_managers = pms->second;
        }
        libraries.emplace(library, std::move(lib));

        for (auto& [canonical, pending] : versions) {
            LibraryVersionNode node;
            node.library = library;
            node.version = pending.version;
            node.released = pending.direct ? pending.released : 0;
            node.stub = !pending.direct;
            node.deps = std::move(pending.deps);
            if (node.stub) ++stub_flags;
            nodes.push_back(std::move(node));
        }
    }
    if (stub_flags > 0) {
        warn(warnings, "build",
             std::to_string(stub_flags) + " dependency target(s) never ingested; stub nodes added");
    }

    return GraphAccess::assemble(std::move(libraries), std::move(nodes), {}, {});
}

Graph build_graph(std::vector<ManifestInput> inputs, const std::vector<LibraryMeta>& metadata,
                  Warnings* warnings) {
    GraphBuilder builder;
    for (auto& input : inputs) {
        if (std::holds_alternative<ResolvedManifest>(input.payload)) {
            builder.add_resolved(input.library, input.version, input.released,
                                 std::get<ResolvedManifest>(std::move(input.payload)));
        } else {
            builder.add_requirements(input.library, input.version, input.released,
                                     std::get<RequirementSet>(std::move(input.payload)));
        }
    }
    for (const auto& meta : metadata) {
        builder.add_metadata(meta);
    }
    return builder.build(warnings);
}

const LibraryVersionNode& latest_version(const Graph& graph, const LibraryId& library) {
    const LibraryVersionNode* best = nullptr;
    for (std::size_t index : graph.versions_of(library)) {
        const auto& node = graph.node(index);
        if (node.stub) continue;
        if (best == nullptr || node.released > best->released ||
            (node.released == best->released &&
             compare_versions(node.version, best->version) == std::strong_ordering::greater)) {
            best = &node;
        }
    }
    if (best == nullptr) {
        throw Error(ErrorKind::no_versions, "library '" + library.canonical + "' has no versions");
    }
    return *best;
}

std::set<LibraryId> connected_libraries(const Graph& graph) {
    std::set<LibraryId> connected;
    for (std::size_t i = 0; i < graph.nodes().size(); ++i) {
        const auto& node = graph.node(i);
        for (const auto& edge : graph.out_edges(i)) {
            const auto& target = graph.node(edge.to);
            if (!node.stub) connected.insert(node.library);
            if (!target.stub) connected.insert(target.library);
        }
    }
    return connected;
}

}  // namespace depnet

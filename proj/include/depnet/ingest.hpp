#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "depnet/types.hpp"
#include "depnet/version.hpp"

namespace depnet {

enum class SourceKind {
    cocoapods_lock,
    carthage_resolved,
    swiftpm_resolved,
    podfile,
    cartfile,
    package_swift,
};

std::string_view to_string(SourceKind kind);
SourceKind source_kind_from_string(std::string_view text);

/// One resolved library in a resolution file, with the dependency names the
/// file records for it (empty for the flat Carthage / Swift PM formats).
struct ManifestEntry {
    LibraryId library;
    Version version;
    std::vector<LibraryId> deps;

    bool operator==(const ManifestEntry&) const = default;
};

struct ResolvedManifest {
    SourceKind source_kind = SourceKind::cocoapods_lock;
    std::vector<ManifestEntry> entries;

    bool operator==(const ResolvedManifest&) const = default;
};

enum class ConstraintKind {
    exact,
    optimistic,    ///< "~>": lower bound as written, upper bound bumps the
                   ///< second-to-last written component (CocoaPods semantics)
    at_least,
    less_than,
    range,
    unresolvable,  ///< branch / commit pin; never resolves to a version
};

std::string_view to_string(ConstraintKind kind);

struct Constraint {
    ConstraintKind kind = ConstraintKind::at_least;
    std::optional<Version> low;   ///< exact / at_least / optimistic / range lower bound
    std::optional<Version> high;  ///< less_than / range / optimistic upper bound (exclusive)

    static Constraint exact(Version v);
    static Constraint at_least(Version v);
    static Constraint less_than(Version v);
    /// Half-open [low, high).
    static Constraint between(Version low, Version high);
    /// "~> text": derives the exclusive upper bound from the written precision.
    static Constraint optimistic(const Version& low);
    static Constraint unresolvable();

    bool satisfied_by(const Version& v) const;
    bool operator==(const Constraint&) const = default;
};

struct Requirement {
    LibraryId library;
    Constraint constraint;

    bool operator==(const Requirement&) const = default;
};

struct RequirementSet {
    SourceKind source_kind = SourceKind::podfile;
    std::vector<Requirement> requirements;

    bool operator==(const RequirementSet&) const = default;
};

struct VulnReference {
    std::string url;
    std::vector<std::string> tags;

    bool operator==(const VulnReference&) const = default;
};

struct AffectedLibrary {
    LibraryId library;
    std::vector<VersionRange> ranges;
    std::vector<Version> exact_versions;
};

/// A publicly reported vulnerability after mapping onto library identifiers.
struct VulnRecord {
    std::string id;
    std::string description;
    Severity severity = Severity::unknown;
    std::int64_t published = 0;  ///< UTC seconds
    std::vector<VulnReference> references;
    std::vector<AffectedLibrary> affected;
};

struct LibraryMeta {
    LibraryId library;
    std::string language;
    std::string repository_url;
};

/// Maps a vulnerability feed product key ("vendor:product") to a library.
struct ProductMapping {
    std::string product_key;
    LibraryId library;
};

// --- resolution files ------------------------------------------------------

/// Parse a Podfile.lock. Top-level "- Name (version):" lines become entries,
/// nested "- Dep" lines their dependency names. Subspecs collapse to the root
/// pod; sections other than PODS are skipped. Throws
/// Error{malformed_lockfile} when no PODS section exists; entries with
/// unparseable versions are skipped with a warning.
ResolvedManifest parse_podfile_lock(std::string_view text, Warnings* warnings = nullptr);

/// Parse a Cartfile.resolved: `github "owner/repo" "tag"` / `git "url" "tag"`
/// lines, flat (no per-entry dependencies). Commit pins and other non-version
/// tags are skipped with a warning, as are malformed lines.
ResolvedManifest parse_cartfile_resolved(std::string_view text, Warnings* warnings = nullptr);

/// Parse a Package.resolved, format version 1 ("object.pins") or 2 ("pins").
/// Branch pins (null version) are skipped with a warning. Throws
/// Error{malformed_document} / Error{unsupported_format_version}.
ResolvedManifest parse_package_resolved(std::string_view text, Warnings* warnings = nullptr);

enum class ManifestKind { cocoapods, carthage, swiftpm };

/// Extract requirement declarations from a Podfile, Cartfile or
/// Package.swift (pattern extraction, not evaluation). Throws
/// Error{malformed_manifest} when a non-empty file yields nothing parseable.
RequirementSet parse_manifest_requirements(std::string_view text, ManifestKind kind,
                                           Warnings* warnings = nullptr);

// Renderers for the supported grammar subset; parse(render(m)) == m.
std::string render_podfile_lock(const ResolvedManifest& manifest);
std::string render_cartfile_resolved(const ResolvedManifest& manifest);
std::string render_package_resolved(const ResolvedManifest& manifest);

// --- vulnerability feed and sidecars ---------------------------------------

struct NvdImport {
    std::vector<VulnRecord> records;
    int unmapped_dropped = 0;  ///< CVE items whose products were all unmapped
};

/// Import an NVD 1.1 feed document, keeping only products present in
/// `mapping`. Severity comes from CVSS v3, falling back to v2 score bands.
/// Throws Error{malformed_feed}.
NvdImport import_nvd_feed(std::string_view text, const std::vector<ProductMapping>& mapping,
                          Warnings* warnings = nullptr);

/// Newline-delimited {"library","language","repository_url"?} records.
/// Duplicate library ids: last record wins, with a warning.
std::vector<LibraryMeta> load_library_metadata(std::string_view text, Warnings* warnings = nullptr);

/// Newline-delimited {"product_key","library"} records.
std::vector<ProductMapping> load_product_mapping(std::string_view text,
                                                 Warnings* warnings = nullptr);

}  // namespace depnet

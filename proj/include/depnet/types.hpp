#pragma once

#include <compare>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace depnet {

/// Category of a hard error raised by parsers, the graph builder or analyses.
enum class ErrorKind {
    malformed_version,
    malformed_lockfile,
    malformed_line,
    malformed_document,
    unsupported_format_version,
    malformed_manifest,
    malformed_feed,
    malformed_record,
    duplicate_version,
    version_conflict,
    no_versions,
    unknown_version,
    unknown_library,
    graph_too_large,
    excluded_chain,
    no_chains,
    invalid_params,
    io_error,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

/// Recoverable problem noticed while parsing or building; never fatal.
struct Warning {
    std::string source;   ///< file / section / line the warning refers to
    std::string message;
};

using Warnings = std::vector<Warning>;

inline void warn(Warnings* sink, std::string source, std::string message) {
    if (sink != nullptr) {
        sink->push_back(Warning{std::move(source), std::move(message)});
    }
}

/// Canonical library identifier: lowercase "owner/repo" for github-hosted
/// repositories, "host/path" for other git hosts, or the plain package name
/// when no repository is known. Never empty, never carries a scheme.
struct LibraryId {
    std::string canonical;

    LibraryId() = default;
    explicit LibraryId(std::string canonical_form) : canonical(std::move(canonical_form)) {}

    /// Canonicalize a package name (lowercased; CocoaPods subspecs collapse
    /// to their root pod).
    static LibraryId from_name(std::string_view name);

    /// Canonicalize a repository URL. Strips the scheme, "www.", a trailing
    /// "/" and ".git"; drops the "github.com/" host since the corpus keys
    /// github libraries by owner/repo.
    static LibraryId from_repo_url(std::string_view url);

    bool empty() const { return canonical.empty(); }
    auto operator<=>(const LibraryId&) const = default;
};

enum class Severity { critical, high, medium, low, unknown };

std::string_view to_string(Severity severity);
Severity severity_from_string(std::string_view text);

/// Rank severities for "highest wins" attribution: critical > high > ... .
int severity_rank(Severity severity);

/// Map a CVSS base score to its severity band.
Severity severity_from_score(double score);

/// How a dependency edge was obtained: pinned in a resolution file, or
/// resolved from manifest constraints by this tool.
enum class Provenance { lockfile, manifest_resolved };

std::string_view to_string(Provenance provenance);
Provenance provenance_from_string(std::string_view text);

enum class PackageManager { cocoapods, carthage, swiftpm };

std::string_view to_string(PackageManager pm);
PackageManager package_manager_from_string(std::string_view text);

}  // namespace depnet

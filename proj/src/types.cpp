#include "depnet/types.hpp"

#include <algorithm>
#include <cctype>

namespace depnet {

namespace {

std::string to_lower(std::string_view text) {
    std::string out(text);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

}  // namespace

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::malformed_version: return "MalformedVersion";
        case ErrorKind::malformed_lockfile: return "MalformedLockfile";
        case ErrorKind::malformed_line: return "MalformedLine";
        case ErrorKind::malformed_document: return "MalformedDocument";
        case ErrorKind::unsupported_format_version: return "UnsupportedFormatVersion";
        case ErrorKind::malformed_manifest: return "MalformedManifest";
        case ErrorKind::malformed_feed: return "MalformedFeed";
        case ErrorKind::malformed_record: return "MalformedRecord";
        case ErrorKind::duplicate_version: return "DuplicateVersion";
        case ErrorKind::version_conflict: return "VersionConflict";
        case ErrorKind::no_versions: return "NoVersions";
        case ErrorKind::unknown_version: return "UnknownVersion";
        case ErrorKind::unknown_library: return "UnknownLibrary";
        case ErrorKind::graph_too_large: return "GraphTooLarge";
        case ErrorKind::excluded_chain: return "ExcludedChain";
        case ErrorKind::no_chains: return "NoChains";
        case ErrorKind::invalid_params: return "InvalidParams";
        case ErrorKind::io_error: return "IoError";
    }
    return "UnknownError";
}

LibraryId LibraryId::from_name(std::string_view name) {
    std::string lowered = to_lower(name);
    // CocoaPods subspec names ("Pod/Subspec") collapse to the root pod.
    auto slash = lowered.find('/');
    if (slash != std::string::npos) {
        lowered.resize(slash);
    }
    return LibraryId(lowered);
}

LibraryId LibraryId::from_repo_url(std::string_view url) {
    std::string s = to_lower(url);
    if (auto scheme = s.find("://"); scheme != std::string::npos) {
        s.erase(0, scheme + 3);
    }
    // scp-like form: git@host:owner/repo
    if (auto at = s.find('@'); at != std::string::npos && at < s.find('/')) {
        s.erase(0, at + 1);
        if (auto colon = s.find(':'); colon != std::string::npos) {
            s[colon] = '/';
        }
    }
    if (s.rfind("www.", 0) == 0) {
        s.erase(0, 4);
    }
    while (!s.empty() && s.back() == '/') {
        s.pop_back();
    }
    if (s.size() >= 4 && s.compare(s.size() - 4, 4, ".git") == 0) {
        s.resize(s.size() - 4);
    }
    if (s.rfind("github.com/", 0) == 0) {
        s.erase(0, 11);
    }
    return LibraryId(s);
}

std::string_view to_string(Severity severity) {
    switch (severity) {
        case Severity::critical: return "CRITICAL";
        case Severity::high: return "HIGH";
        case Severity::medium: return "MEDIUM";
        case Severity::low: return "LOW";
        case Severity::unknown: return "UNKNOWN";
    }
    return "UNKNOWN";
}

Severity severity_from_string(std::string_view text) {
    std::string upper(text);
    std::transform(upper.begin(), upper.end(), upper.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    if (upper == "CRITICAL") return Severity::critical;
    if (upper == "HIGH") return Severity::high;
    if (upper == "MEDIUM") return Severity::medium;
    if (upper == "LOW") return Severity::low;
    return Severity::unknown;
}

int severity_rank(Severity severity) {
    switch (severity) {
        case Severity::critical: return 4;
        case Severity::high: return 3;
        case Severity::medium: return 2;
        case Severity::low: return 1;
        case Severity::unknown: return 0;
    }
    return 0;
}

Severity severity_from_score(double score) {
    // CVSS v3 rating bands.
    if (score >= 9.0) return Severity::critical;
    if (score >= 7.0) return Severity::high;
    if (score >= 4.0) return Severity::medium;
    if (score >= 0.1) return Severity::low;
    return Severity::unknown;
}

std::string_view to_string(Provenance provenance) {
    return provenance == Provenance::lockfile ? "lockfile" : "manifest";
}

Provenance provenance_from_string(std::string_view text) {
    if (text == "lockfile") return Provenance::lockfile;
    if (text == "manifest") return Provenance::manifest_resolved;
    throw Error(ErrorKind::malformed_record, "unknown provenance '" + std::string(text) + "'");
}

std::string_view to_string(PackageManager pm) {
    switch (pm) {
        case PackageManager::cocoapods: return "cocoapods";
        case PackageManager::carthage: return "carthage";
        case PackageManager::swiftpm: return "swiftpm";
    }
    return "?";
}

PackageManager package_manager_from_string(std::string_view text) {
    if (text == "cocoapods") return PackageManager::cocoapods;
    if (text == "carthage") return PackageManager::carthage;
    if (text == "swiftpm") return PackageManager::swiftpm;
    throw Error(ErrorKind::malformed_record, "unknown package manager '" + std::string(text) + "'");
}

}  // namespace depnet

#include <algorithm>
#include <cctype>
#include <sstream>

#include <json.hpp>

#include "depnet/ingest.hpp"

namespace depnet {

namespace {

using nlohmann::json;

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::size_t indent_of(std::string_view line) {
    std::size_t i = 0;
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    return i;
}

bool is_hex_commit(std::string_view s) {
    if (s.size() != 40) return false;
    return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isxdigit(c) != 0; });
}

std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto nl = text.find('\n', start);
        if (nl == std::string_view::npos) {
            lines.push_back(text.substr(start));
            break;
        }
        std::string_view line = text.substr(start, nl - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.push_back(line);
        start = nl + 1;
    }
    return lines;
}

// `github "owner/repo" "tag"` -> {kind, first quoted, second quoted}
struct QuotedPair {
    std::string_view keyword;
    std::string_view first;
    std::string_view second;
};

std::optional<QuotedPair> parse_quoted_pair(std::string_view line) {
    QuotedPair out;
    auto space = line.find(' ');
    if (space == std::string_view::npos) return std::nullopt;
    out.keyword = trim(line.substr(0, space));

    std::vector<std::string_view> quoted;
    std::size_t pos = space;
    while (quoted.size() < 2) {
        auto open = line.find('"', pos);
        if (open == std::string_view::npos) break;
        auto close = line.find('"', open + 1);
        if (close == std::string_view::npos) return std::nullopt;
        quoted.push_back(line.substr(open + 1, close - open - 1));
        pos = close + 1;
    }
    if (quoted.size() != 2) return std::nullopt;
    out.first = quoted[0];
    out.second = quoted[1];
    return out;
}

}  // namespace

std::string_view to_string(SourceKind kind) {
    switch (kind) {
        case SourceKind::cocoapods_lock: return "podfile.lock";
        case SourceKind::carthage_resolved: return "cartfile.resolved";
        case SourceKind::swiftpm_resolved: return "package.resolved";
        case SourceKind::podfile: return "podfile";
        case SourceKind::cartfile: return "cartfile";
        case SourceKind::package_swift: return "package.swift";
    }
    return "?";
}

SourceKind source_kind_from_string(std::string_view text) {
    if (text == "podfile.lock") return SourceKind::cocoapods_lock;
    if (text == "cartfile.resolved") return SourceKind::carthage_resolved;
    if (text == "package.resolved") return SourceKind::swiftpm_resolved;
    if (text == "podfile") return SourceKind::podfile;
    if (text == "cartfile") return SourceKind::cartfile;
    if (text == "package.swift") return SourceKind::package_swift;
    throw Error(ErrorKind::malformed_record, "unknown source kind '" + std::string(text) + "'");
}

ResolvedManifest parse_podfile_lock(std::string_view text, Warnings* warnings) {
    ResolvedManifest out;
    out.source_kind = SourceKind::cocoapods_lock;

    auto lines = split_lines(text);
    bool in_pods = false;
    bool seen_pods = false;
    std::size_t entry_indent = 0;
    ManifestEntry* current = nullptr;

    for (std::size_t n = 0; n < lines.size(); ++n) {
        std::string_view line = lines[n];
        std::string_view stripped = trim(line);
        if (stripped.empty()) continue;

        std::size_t indent = indent_of(line);
        if (indent == 0) {
            // section header; only PODS: is interesting
            in_pods = stripped == "PODS:";
            seen_pods = seen_pods || in_pods;
            current = nullptr;
            continue;
        }
        if (!in_pods) continue;
        if (stripped.front() != '-') continue;

        std::string_view item = trim(stripped.substr(1));
        // strip a trailing ':' from "Name (version):"
        if (!item.empty() && item.back() == ':') item = trim(item.substr(0, item.size() - 1));

        if (current == nullptr || indent <= entry_indent) {
            // top-level entry: Name (version)
            auto open = item.rfind('(');
            if (open == std::string_view::npos || item.back() != ')') {
                warn(warnings, "podfile.lock:" + std::to_string(n + 1),
                     "entry without version, skipped: '" + std::string(item) + "'");
                current = nullptr;
                entry_indent = indent;
                continue;
            }
            std::string_view name = trim(item.substr(0, open));
            std::string_view version_text = trim(item.substr(open + 1, item.size() - open - 2));
            ManifestEntry entry;
            entry.library = LibraryId::from_name(name);
            if (entry.library.empty()) {
                warn(warnings, "podfile.lock:" + std::to_string(n + 1), "entry with empty name, skipped");
                current = nullptr;
                entry_indent = indent;
                continue;
            }
            try {
                entry.version = Version::parse(version_text);
            } catch (const Error&) {
                warn(warnings, "podfile.lock:" + std::to_string(n + 1),
                     "unparseable version '" + std::string(version_text) + "' for pod '" +
                         std::string(name) + "', entry skipped");
                current = nullptr;
                entry_indent = indent;
                continue;
            }
            auto existing = std::find_if(out.entries.begin(), out.entries.end(),
                                         [&](const ManifestEntry& e) { return e.library == entry.library; });
            if (existing != out.entries.end()) {
                // subspecs of one pod repeat the root name; merge dep lists
                current = &*existing;
            } else {
                out.entries.push_back(std::move(entry));
                current = &out.entries.back();
            }
            entry_indent = indent;
        } else {
            // nested dependency: Name possibly followed by a requirement
            std::string_view name = item;
            if (auto open = name.find('('); open != std::string_view::npos) {
                name = trim(name.substr(0, open));
            }
            if (name.empty()) continue;
            LibraryId dep = LibraryId::from_name(name);
            if (dep == current->library) continue;  // subspec of the same pod
            if (std::find(current->deps.begin(), current->deps.end(), dep) == current->deps.end()) {
                current->deps.push_back(std::move(dep));
            }
        }
    }

    if (!seen_pods) {
        throw Error(ErrorKind::malformed_lockfile, "no PODS section");
    }
    return out;
}

ResolvedManifest parse_cartfile_resolved(std::string_view text, Warnings* warnings) {
    ResolvedManifest out;
    out.source_kind = SourceKind::carthage_resolved;

    auto lines = split_lines(text);
    for (std::size_t n = 0; n < lines.size(); ++n) {
        std::string_view stripped = trim(lines[n]);
        if (stripped.empty() || stripped.front() == '#') continue;

        auto pair = parse_quoted_pair(stripped);
        if (!pair || (pair->keyword != "github" && pair->keyword != "git" &&
                      pair->keyword != "binary")) {
            warn(warnings, "cartfile.resolved:" + std::to_string(n + 1),
                 "malformed line skipped: '" + std::string(stripped) + "'");
            continue;
        }
        if (pair->keyword == "binary") {
            warn(warnings, "cartfile.resolved:" + std::to_string(n + 1),
                 "binary entry skipped: '" + std::string(pair->first) + "'");
            continue;
        }
        if (is_hex_commit(pair->second)) {
            warn(warnings, "cartfile.resolved:" + std::to_string(n + 1),
                 "commit pin skipped: '" + std::string(pair->first) + "'");
            continue;
        }

        ManifestEntry entry;
        entry.library = LibraryId::from_repo_url(pair->first);
        if (entry.library.empty()) {
            warn(warnings, "cartfile.resolved:" + std::to_string(n + 1), "empty repository, skipped");
            continue;
        }
        try {
            entry.version = Version::parse(pair->second);
        } catch (const Error&) {
            warn(warnings, "cartfile.resolved:" + std::to_string(n + 1),
                 "unversioned tag '" + std::string(pair->second) + "' for '" +
                     std::string(pair->first) + "', entry skipped");
            continue;
        }
        out.entries.push_back(std::move(entry));
    }
    return out;
}

ResolvedManifest parse_package_resolved(std::string_view text, Warnings* warnings) {
    json doc = json::parse(text, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) {
        throw Error(ErrorKind::malformed_document, "Package.resolved is not a JSON object");
    }

    ResolvedManifest out;
    out.source_kind = SourceKind::swiftpm_resolved;

    std::int64_t format = doc.value("version", 0);
    const json* pins = nullptr;
    if (format == 1) {
        if (!doc.contains("object") || !doc["object"].contains("pins")) {
            throw Error(ErrorKind::malformed_document, "format 1 document without object.pins");
        }
        pins = &doc["object"]["pins"];
    } else if (format == 2) {
        if (!doc.contains("pins")) {
            throw Error(ErrorKind::malformed_document, "format 2 document without pins");
        }
        pins = &doc["pins"];
    } else {
        throw Error(ErrorKind::unsupported_format_version,
                    "Package.resolved format version " + std::to_string(format));
    }
    if (!pins->is_array()) {
        throw Error(ErrorKind::malformed_document, "pins is not an array");
    }

    for (const auto& pin : *pins) {
        if (!pin.is_object()) {
            warn(warnings, "package.resolved", "non-object pin skipped");
            continue;
        }
        std::string url = format == 1 ? pin.value("repositoryURL", "") : pin.value("location", "");
        std::string name = format == 1 ? pin.value("package", "") : pin.value("identity", "");
        LibraryId library = !url.empty() ? LibraryId::from_repo_url(url) : LibraryId::from_name(name);
        if (library.empty()) {
            warn(warnings, "package.resolved", "pin without identity skipped");
            continue;
        }

        const json& state = pin.contains("state") ? pin["state"] : json::object();
        if (!state.contains("version") || state["version"].is_null()) {
            std::string branch = state.value("branch", "");
            warn(warnings, "package.resolved",
                 "branch pin skipped: '" + library.canonical + "'" +
                     (branch.empty() ? "" : " (branch " + branch + ")"));
            continue;
        }

        ManifestEntry entry;
        entry.library = std::move(library);
        std::string version_text = state["version"].is_string() ? state["version"].get<std::string>()
                                                                : state["version"].dump();
        try {
            entry.version = Version::parse(version_text);
        } catch (const Error&) {
            warn(warnings, "package.resolved",
                 "unparseable pin version '" + version_text + "', entry skipped");
            continue;
        }
        out.entries.push_back(std::move(entry));
    }
    return out;
}

std::string render_podfile_lock(const ResolvedManifest& manifest) {
    std::ostringstream out;
    out << "PODS:\n";
    for (const auto& entry : manifest.entries) {
        out << "  - " << entry.library.canonical << " (" << entry.version.raw << ")";
        if (!entry.deps.empty()) {
            out << ":";
            for (const auto& dep : entry.deps) {
                out << "\n    - " << dep.canonical;
            }
        }
        out << "\n";
    }
    return out.str();
}

std::string render_cartfile_resolved(const ResolvedManifest& manifest) {
    std::ostringstream out;
    for (const auto& entry : manifest.entries) {
        const std::string& id = entry.library.canonical;
        auto slash = id.find('/');
        bool hosted_elsewhere = slash != std::string::npos && id.substr(0, slash).find('.') != std::string::npos;
        if (hosted_elsewhere) {
            out << "git \"https://" << id << "\" \"" << entry.version.raw << "\"\n";
        } else {
            out << "github \"" << id << "\" \"" << entry.version.raw << "\"\n";
        }
    }
    return out.str();
}

std::string render_package_resolved(const ResolvedManifest& manifest) {
    json pins = json::array();
    for (const auto& entry : manifest.entries) {
        const std::string& id = entry.library.canonical;
        auto slash = id.rfind('/');
        std::string identity = slash == std::string::npos ? id : id.substr(slash + 1);
        bool hosted_elsewhere =
            id.find('/') != std::string::npos && id.substr(0, id.find('/')).find('.') != std::string::npos;
        std::string location = hosted_elsewhere ? "https://" + id : "https://github.com/" + id;
        pins.push_back({{"identity", identity},
                        {"kind", "remoteSourceControl"},
                        {"location", location},
                        {"state", {{"version", entry.version.raw}}}});
    }
    json doc = {{"pins", pins}, {"version", 2}};
    return doc.dump(2) + "\n";
}

}  // namespace depnet

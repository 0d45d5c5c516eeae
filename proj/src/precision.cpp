#include "depnet/precision.hpp"

#include <algorithm>
#include <map>
#include <set>

#include <json.hpp>

namespace depnet {

namespace {

using nlohmann::json;

NamedPattern make_pattern(const std::string& name, const std::string& regex_text) {
    NamedPattern pattern;
    pattern.name = name;
    pattern.regex_text = regex_text;
    try {
        pattern.compiled = std::regex(regex_text, std::regex::ECMAScript);
    } catch (const std::regex_error& err) {
        throw Error(ErrorKind::malformed_document,
                    "pattern '" + name + "' does not compile: " + err.what());
    }
    return pattern;
}

// First match of each pattern per field is evidence enough.
bool scan_field(const std::string& field, std::string_view text,
                const std::vector<NamedPattern>& patterns, std::vector<PatternEvidence>& evidence) {
    bool any = false;
    std::string body(text);
    for (const auto& pattern : patterns) {
        std::smatch match;
        if (std::regex_search(body, match, pattern.compiled)) {
            evidence.push_back(PatternEvidence{field, match.str(), pattern.name});
            any = true;
        }
    }
    return any;
}

void check_names_unique(const PatternSet& set) {
    std::set<std::string> names;
    auto visit = [&](const std::vector<NamedPattern>& group) {
        for (const auto& pattern : group) {
            if (!names.insert(pattern.name).second) {
                throw Error(ErrorKind::malformed_document,
                            "duplicate pattern name '" + pattern.name + "'");
            }
        }
    };
    visit(set.method);
    visit(set.class_);
    visit(set.file);
    visit(set.patch_url);
}

}  // namespace

PatternSet default_pattern_set() {
    PatternSet set;
    set.method = {
        make_pattern("call-parens", R"([A-Za-z_][A-Za-z0-9_]*\(\))"),
        make_pattern("keyword-backtick", R"((function|method)\s+`[A-Za-z_][A-Za-z0-9_:.]*`)"),
    };
    set.class_ = {
        make_pattern("keyword-identifier", R"(\b(class|struct)\s+[A-Za-z_][A-Za-z0-9_]*)"),
        make_pattern("camelcase-scoped", R"(\b(?:[A-Z][a-z0-9]+){2,}(?=::|\.[a-z]))"),
        make_pattern("camelcase-backtick", R"(`(?:[A-Z][a-z0-9]+){2,}`)"),
    };
    set.file = {
        make_pattern("source-file", R"(\b[A-Za-z0-9_./-]*[A-Za-z0-9_]\.(c|h|m|mm|swift|cpp|cc|hpp)\b)"),
        make_pattern("path-with-extension", R"(\b[A-Za-z0-9_.-]+(/[A-Za-z0-9_.-]+)+\.[A-Za-z0-9]+\b)"),
    };
    set.patch_url = {
        make_pattern("tag-patch", R"(^Patch$)"),
        make_pattern("commit-url", R"(/commit[s]?/[0-9a-f]{7,40})"),
    };
    check_names_unique(set);
    return set;
}

PatternSet load_pattern_set(std::string_view text) {
    json doc = json::parse(text, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) {
        throw Error(ErrorKind::malformed_document, "pattern file is not a JSON object");
    }
    auto load_group = [&](const char* key) {
        std::vector<NamedPattern> group;
        if (!doc.contains(key)) return group;
        for (const auto& entry : doc[key]) {
            if (!entry.is_object() || !entry.contains("name") || !entry.contains("regex")) {
                throw Error(ErrorKind::malformed_document,
                            std::string("pattern group '") + key + "' needs {name, regex} objects");
            }
            group.push_back(make_pattern(entry["name"].get<std::string>(),
                                         entry["regex"].get<std::string>()));
        }
        return group;
    };
    PatternSet set;
    set.method = load_group("method");
    set.class_ = load_group("class");
    set.file = load_group("file");
    set.patch_url = load_group("patch_url");
    check_names_unique(set);
    return set;
}

PrecisionFlags scan_vulnerability(const VulnRecord& vuln, const PatternSet& patterns,
                                  std::string_view patch_text) {
    PrecisionFlags flags;
    flags.vuln_id = vuln.id;

    flags.mentions_method = scan_field("description", vuln.description, patterns.method, flags.evidence);
    flags.mentions_class = scan_field("description", vuln.description, patterns.class_, flags.evidence);
    flags.mentions_file = scan_field("description", vuln.description, patterns.file, flags.evidence);

    for (const auto& reference : vuln.references) {
        if (scan_field("reference.url", reference.url, patterns.patch_url, flags.evidence)) {
            flags.has_patch_link = true;
        }
        for (const auto& tag : reference.tags) {
            if (scan_field("reference.tag", tag, patterns.patch_url, flags.evidence)) {
                flags.has_patch_link = true;
            }
        }
    }

    if (!patch_text.empty()) {
        flags.mentions_method =
            scan_field("patch", patch_text, patterns.method, flags.evidence) || flags.mentions_method;
        flags.mentions_class =
            scan_field("patch", patch_text, patterns.class_, flags.evidence) || flags.mentions_class;
        flags.mentions_file =
            scan_field("patch", patch_text, patterns.file, flags.evidence) || flags.mentions_file;
    }
    return flags;
}

PrecisionReport precision_report(const std::vector<PrecisionFlags>& flags, const Graph& graph) {
    std::map<std::string, PrecisionRow> rows;

    for (const auto& entry : flags) {
        auto vuln = graph.vulns().find(entry.vuln_id);
        std::set<std::string> languages;
        if (vuln != graph.vulns().end()) {
            for (const auto& affected : vuln->second.affected) {
                if (graph.libraries().contains(affected.library)) {
                    languages.insert(graph.language_of(affected.library));
                } else {
                    languages.insert("UNKNOWN");
                }
            }
        }
        if (languages.empty()) languages.insert("UNKNOWN");

        for (const auto& language : languages) {
            auto& row = rows[language];
            row.language = language;
            ++row.vulnerabilities;
            if (entry.mentions_method) ++row.method;
            if (entry.mentions_class) ++row.class_;
            if (entry.mentions_method && entry.mentions_class) ++row.both;
        }
    }

    PrecisionReport report;
    for (auto& [language, row] : rows) {
        report.rows.push_back(std::move(row));
    }
    return report;
}

}  // namespace depnet

#pragma once

#include <regex>
#include <string>
#include <vector>

#include "depnet/graph.hpp"
#include "depnet/ingest.hpp"

namespace depnet {

/// A named regular expression within a pattern group.
struct NamedPattern {
    std::string name;
    std::string regex_text;
    std::regex compiled;
};

/// Pattern groups driving the code-location scan. Names are unique across
/// the whole set; every regex compiled at load time.
struct PatternSet {
    std::vector<NamedPattern> method;
    std::vector<NamedPattern> class_;
    std::vector<NamedPattern> file;
    std::vector<NamedPattern> patch_url;
};

/// Built-in defaults; behavior pinned by the golden corpus under tests/.
PatternSet default_pattern_set();

/// Load a pattern file: {"method":[{"name","regex"},...],"class":[...],
/// "file":[...],"patch_url":[...]}. Throws Error{malformed_document} on
/// unparseable documents, duplicate names or regexes that do not compile.
PatternSet load_pattern_set(std::string_view text);

struct PatternEvidence {
    std::string field;         ///< "description", "reference.url", "reference.tag", "patch"
    std::string matched_text;
    std::string pattern_name;

    bool operator==(const PatternEvidence&) const = default;
};

struct PrecisionFlags {
    std::string vuln_id;
    bool mentions_method = false;
    bool mentions_class = false;
    bool mentions_file = false;
    bool has_patch_link = false;
    std::vector<PatternEvidence> evidence;  ///< at least one entry per true flag
};

/// Scan the vulnerability's description (method/class/file groups) and its
/// references (patch_url group over urls and tags). `patch_text`, when the
/// caller supplies diff content, is scanned like the description; the
/// scanner itself never fetches anything.
PrecisionFlags scan_vulnerability(const VulnRecord& vuln, const PatternSet& patterns,
                                  std::string_view patch_text = {});

struct PrecisionRow {
    std::string language;
    long long vulnerabilities = 0;
    long long method = 0;
    long long class_ = 0;
    long long both = 0;
};

struct PrecisionReport {
    std::vector<PrecisionRow> rows;  ///< sorted by language
};

/// Per-language counts; a vulnerability affecting libraries in several
/// languages counts once per language. Languages come from the graph.
PrecisionReport precision_report(const std::vector<PrecisionFlags>& flags, const Graph& graph);

}  // namespace depnet

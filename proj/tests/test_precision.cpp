#include <doctest.h>

#include <fstream>
#include <regex>
#include <sstream>

#include <json.hpp>

#include "depnet/matcher.hpp"
#include "depnet/precision.hpp"

using namespace depnet;

namespace {

Version v(const char* text) { return Version::parse(text); }
LibraryId lib(const char* id) { return LibraryId(id); }

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

VulnRecord with_description(const char* id, std::string description) {
    VulnRecord record;
    record.id = id;
    record.description = std::move(description);
    return record;
}

}  // namespace

TEST_CASE("defaults: method and file tokens in a classic description") {
    auto flags = scan_vulnerability(
        with_description("X", "heap overflow in png_set_PLTE() in pngset.c"),
        default_pattern_set());
    CHECK(flags.mentions_method);
    CHECK(flags.mentions_file);
    CHECK(!flags.mentions_class);
    CHECK(!flags.has_patch_link);
    CHECK(flags.evidence.size() >= 2);
}

TEST_CASE("defaults: no code tokens, all flags false") {
    auto flags = scan_vulnerability(
        with_description("X", "improper authentication allows remote attackers to bypass login"),
        default_pattern_set());
    CHECK(!flags.mentions_method);
    CHECK(!flags.mentions_class);
    CHECK(!flags.mentions_file);
    CHECK(!flags.has_patch_link);
    CHECK(flags.evidence.empty());
}

TEST_CASE("reference tagged Patch sets has_patch_link") {
    VulnRecord record = with_description("X", "plain text");
    record.references.push_back(VulnReference{"https://example.com/fix", {"Patch"}});
    auto flags = scan_vulnerability(record, default_pattern_set());
    CHECK(flags.has_patch_link);
    REQUIRE(!flags.evidence.empty());
    CHECK(flags.evidence[0].field == "reference.tag");
    CHECK(flags.evidence[0].pattern_name == "tag-patch");
}

TEST_CASE("commit-shaped reference url sets has_patch_link") {
    VulnRecord record = with_description("X", "plain text");
    record.references.push_back(
        VulnReference{"https://github.com/a/b/commit/0123456789abcdef0123", {}});
    auto flags = scan_vulnerability(record, default_pattern_set());
    CHECK(flags.has_patch_link);
}

TEST_CASE("golden corpus pins default pattern behavior") {
    auto corpus = nlohmann::json::parse(
        read_file(std::string(DEPNET_TEST_DATA) + "/precision_corpus.json"));
    auto patterns = default_pattern_set();
    for (const auto& entry : corpus) {
        VulnRecord record;
        record.id = entry["id"].get<std::string>();
        record.description = entry["description"].get<std::string>();
        for (const auto& ref : entry["references"]) {
            VulnReference reference;
            reference.url = ref["url"].get<std::string>();
            for (const auto& tag : ref["tags"]) reference.tags.push_back(tag.get<std::string>());
            record.references.push_back(std::move(reference));
        }
        auto flags = scan_vulnerability(record, patterns);
        CAPTURE(record.id);
        CAPTURE(record.description);
        CHECK(flags.mentions_method == entry["expected"]["method"].get<bool>());
        CHECK(flags.mentions_class == entry["expected"]["class"].get<bool>());
        CHECK(flags.mentions_file == entry["expected"]["file"].get<bool>());
        CHECK(flags.has_patch_link == entry["expected"]["patch"].get<bool>());
    }
}

TEST_CASE("supplied patch text is scanned like the description") {
    VulnRecord record = with_description("X", "vague words only");
    auto without = scan_vulnerability(record, default_pattern_set());
    CHECK(!without.mentions_file);

    auto with_patch = scan_vulnerability(record, default_pattern_set(),
                                         "--- a/src/parser.c\n+++ b/src/parser.c\n"
                                         "-  parse_frame();\n+  parse_frame_safe();\n");
    CHECK(with_patch.mentions_file);
    CHECK(with_patch.mentions_method);
}

TEST_CASE("evidence soundness: the named pattern re-matches its matched text") {
    auto patterns = default_pattern_set();
    VulnRecord record = with_description(
        "X", "Integer overflow in ImageIO::readChunk() in ImageIO.cpp");
    record.references.push_back(VulnReference{"https://github.com/a/b/commit/abcdef1234567", {"Patch"}});
    auto flags = scan_vulnerability(record, patterns);
    REQUIRE(!flags.evidence.empty());

    auto find_pattern = [&](const std::string& name) -> const NamedPattern* {
        for (const auto* group : {&patterns.method, &patterns.class_, &patterns.file, &patterns.patch_url}) {
            for (const auto& pattern : *group) {
                if (pattern.name == name) return &pattern;
            }
        }
        return nullptr;
    };
    for (const auto& evidence : flags.evidence) {
        const auto* pattern = find_pattern(evidence.pattern_name);
        REQUIRE(pattern != nullptr);
        CHECK(std::regex_search(evidence.matched_text, pattern->compiled));
    }
}

TEST_CASE("monotonicity: adding patterns never clears a flag") {
    PatternSet trimmed = default_pattern_set();
    trimmed.method.resize(1);
    trimmed.class_.resize(1);
    PatternSet full = default_pattern_set();

    const char* descriptions[] = {
        "heap overflow in png_set_PLTE() in pngset.c",
        "Use after free in class AVPlayerItem",
        "The WebSocketClient.connect method is broken",
        "nothing to see here",
    };
    for (const char* description : descriptions) {
        auto small = scan_vulnerability(with_description("X", description), trimmed);
        auto big = scan_vulnerability(with_description("X", description), full);
        if (small.mentions_method) CHECK(big.mentions_method);
        if (small.mentions_class) CHECK(big.mentions_class);
        if (small.mentions_file) CHECK(big.mentions_file);
    }
}

TEST_CASE("determinism: identical inputs give identical flags and evidence") {
    VulnRecord record = with_description(
        "X", "Integer overflow in ImageIO::readChunk() in ImageIO.cpp");
    auto first = scan_vulnerability(record, default_pattern_set());
    auto second = scan_vulnerability(record, default_pattern_set());
    CHECK(first.evidence == second.evidence);
    CHECK(first.mentions_method == second.mentions_method);
}

TEST_CASE("pattern file loading validates regexes and unique names") {
    auto set = load_pattern_set(R"json({
        "method": [{"name": "parens", "regex": "\\w+\\(\\)"}],
        "class":  [{"name": "upper", "regex": "[A-Z]\\w+"}],
        "file":   [],
        "patch_url": [{"name": "commit", "regex": "/commit/"}]
    })json");
    CHECK(set.method.size() == 1);
    CHECK(set.class_.size() == 1);

    try {
        load_pattern_set(R"json({"method": [{"name": "bad", "regex": "("}]})json");
        FAIL("expected MalformedDocument");
    } catch (const Error& err) {
        CHECK(err.kind() == ErrorKind::malformed_document);
    }
    try {
        load_pattern_set(R"json({
            "method": [{"name": "dup", "regex": "a"}],
            "class": [{"name": "dup", "regex": "b"}]
        })json");
        FAIL("expected MalformedDocument");
    } catch (const Error& err) {
        CHECK(err.kind() == ErrorKind::malformed_document);
    }
}

TEST_CASE("precision report aggregates per language") {
    GraphBuilder builder;
    builder.add_version(lib("swiftlib"), v("1.0"), 100);
    builder.add_version(lib("clib"), v("1.0"), 100);
    LibraryMeta swift_meta{lib("swiftlib"), "Swift", ""};
    LibraryMeta c_meta{lib("clib"), "C", ""};
    builder.add_metadata(swift_meta);
    builder.add_metadata(c_meta);

    VulnRecord both_langs = with_description("V1", "overflow in decode() in class Decoder");
    both_langs.affected.push_back(AffectedLibrary{lib("swiftlib"), {}, {v("1.0")}});
    both_langs.affected.push_back(AffectedLibrary{lib("clib"), {}, {v("1.0")}});
    VulnRecord plain = with_description("V2", "nothing specific");
    plain.affected.push_back(AffectedLibrary{lib("swiftlib"), {}, {v("1.0")}});
    VulnRecord method_only = with_description("V3", "crash in decode_frame()");
    method_only.affected.push_back(AffectedLibrary{lib("clib"), {}, {v("1.0")}});

    Graph graph =
        match_vulnerabilities(builder.build(), {both_langs, plain, method_only}).graph;

    auto patterns = default_pattern_set();
    std::vector<PrecisionFlags> flags;
    for (const auto& [id, record] : graph.vulns()) {
        flags.push_back(scan_vulnerability(record, patterns));
    }
    auto report = precision_report(flags, graph);

    REQUIRE(report.rows.size() == 2);
    CHECK(report.rows[0].language == "C");
    CHECK(report.rows[0].vulnerabilities == 2);  // V1 and V3
    CHECK(report.rows[0].method == 2);
    CHECK(report.rows[0].class_ == 1);
    CHECK(report.rows[0].both == 1);
    CHECK(report.rows[1].language == "Swift");
    CHECK(report.rows[1].vulnerabilities == 2);  // V1 and V2
    CHECK(report.rows[1].method == 1);
    CHECK(report.rows[1].both == 1);
}

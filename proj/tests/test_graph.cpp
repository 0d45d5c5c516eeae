#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>

#include "depnet/graph.hpp"
#include "depnet/matcher.hpp"
#include "depnet/persist.hpp"
#include "depnet/synth.hpp"

using namespace depnet;

namespace {

Version v(const char* text) { return Version::parse(text); }
LibraryId lib(const char* id) { return LibraryId(id); }

// A:v1@T1, B:v1@T2 dep A:v1, C:v1@T3 dep B:v1, A:v2@T4, B:v2@T5 dep A:v2,
// C:v2@T6 dep B:v1, C:v3@T7 dep B:v2, with T(i) = 1000 * i.
Graph fig1_graph() {
    GraphBuilder builder;
    builder.add_version(lib("librarya"), v("v1"), 1000);
    builder.add_dependency(lib("libraryb"), v("v1"), 2000, lib("librarya"), v("v1"),
                           Provenance::lockfile);
    builder.add_dependency(lib("libraryc"), v("v1"), 3000, lib("libraryb"), v("v1"),
                           Provenance::lockfile);
    builder.add_version(lib("librarya"), v("v2"), 4000);
    builder.add_dependency(lib("libraryb"), v("v2"), 5000, lib("librarya"), v("v2"),
                           Provenance::lockfile);
    builder.add_dependency(lib("libraryc"), v("v2"), 6000, lib("libraryb"), v("v1"),
                           Provenance::lockfile);
    builder.add_dependency(lib("libraryc"), v("v3"), 7000, lib("libraryb"), v("v2"),
                           Provenance::lockfile);

    LibraryMeta meta_a{lib("librarya"), "C", ""};
    LibraryMeta meta_b{lib("libraryb"), "Swift", ""};
    LibraryMeta meta_c{lib("libraryc"), "Swift", ""};
    builder.add_metadata(meta_a);
    builder.add_metadata(meta_b);
    builder.add_metadata(meta_c);
    return builder.build();
}

Graph fig1_matched() {
    VulnRecord vuln;
    vuln.id = "CVE-2020-0001";
    vuln.severity = Severity::high;
    vuln.description = "vulnerability in librarya v1";
    AffectedLibrary affected;
    affected.library = lib("librarya");
    affected.exact_versions.push_back(v("v1"));
    vuln.affected.push_back(affected);
    return match_vulnerabilities(fig1_graph(), {vuln}).graph;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

}  // namespace

TEST_CASE("fig1 fixture builds 7 version nodes and 5 edges") {
    Graph graph = fig1_graph();
    CHECK(graph.nodes().size() == 7);
    // the five chains of the worked example imply exactly five distinct edges
    CHECK(graph.edge_count() == 5);
    CHECK(graph.stub_count() == 0);
    CHECK(graph.libraries().size() == 3);
    CHECK(graph.language_of(lib("librarya")) == "C");

    auto b1 = graph.find(lib("libraryb"), v("1.0.0"));
    REQUIRE(b1.has_value());
    REQUIRE(graph.node(*b1).deps.size() == 1);
    CHECK(graph.node(*b1).deps[0].to_library == lib("librarya"));
    CHECK(graph.node(*b1).released == 2000);
}

TEST_CASE("fig1 through real lockfile ingestion matches the direct build") {
    const char* data_dir = DEPNET_TEST_DATA;
    struct Item {
        const char* library;
        const char* version;
        std::int64_t released;
        const char* file;
    };
    const Item items[] = {
        {"librarya", "v1", 1000, "librarya_v1.lock"},
        {"libraryb", "v1", 2000, "libraryb_v1.lock"},
        {"libraryc", "v1", 3000, "libraryc_v1.lock"},
        {"librarya", "v2", 4000, "librarya_v2.lock"},
        {"libraryb", "v2", 5000, "libraryb_v2.lock"},
        {"libraryc", "v2", 6000, "libraryc_v2.lock"},
        {"libraryc", "v3", 7000, "libraryc_v3.lock"},
    };
    std::vector<ManifestInput> inputs;
    for (const auto& item : items) {
        std::string text = read_file(std::string(data_dir) + "/fig1/" + item.file);
        ManifestInput input;
        input.library = lib(item.library);
        input.version = v(item.version);
        input.released = item.released;
        input.payload = parse_podfile_lock(text);
        inputs.push_back(std::move(input));
    }
    auto metadata = load_library_metadata(read_file(std::string(data_dir) + "/fig1/metadata.ndjson"));
    Graph graph = build_graph(std::move(inputs), metadata);

    CHECK(graph.nodes().size() == 7);
    CHECK(graph.edge_count() == 5);
    CHECK(graph.stub_count() == 0);

    // same nodes and edges as the direct build (library records differ in
    // package-manager annotations, which only lockfile ingestion supplies)
    auto structural_records = [](const Graph& g) {
        std::vector<std::string> records;
        std::istringstream in(save_graph_to_string(g));
        std::string line;
        while (std::getline(in, line)) {
            if (line.find("\"kind\":\"library\"") == std::string::npos) records.push_back(line);
        }
        return records;
    };
    CHECK(structural_records(graph) == structural_records(fig1_graph()));
}

TEST_CASE("empty input builds an empty graph") {
    Graph graph = build_graph({}, {});
    CHECK(graph.nodes().empty());
    CHECK(graph.libraries().empty());
    CHECK(connected_libraries(graph).empty());
}

TEST_CASE("dangling lockfile target becomes a flagged stub") {
    GraphBuilder builder;
    ResolvedManifest manifest;
    manifest.source_kind = SourceKind::cocoapods_lock;
    ManifestEntry entry;
    entry.library = lib("known");
    entry.version = v("1.0");
    entry.deps.push_back(lib("unknownx"));
    manifest.entries.push_back(entry);
    builder.add_resolved(lib("owner"), v("1.0"), 5000, manifest);

    Warnings warnings;
    Graph graph = builder.build(&warnings);
    CHECK(graph.stub_count() == 2);  // unknownx and the never-ingested pin known@1.0
    auto stub = graph.find(lib("unknownx"), v("0"));
    REQUIRE(stub.has_value());
    CHECK(graph.node(*stub).stub);
    CHECK(graph.node(*stub).released == 0);
    CHECK(std::any_of(warnings.begin(), warnings.end(), [](const Warning& w) {
        return w.message.find("stub") != std::string::npos;
    }));
}

TEST_CASE("duplicate direct ingestion with conflicting release time") {
    GraphBuilder builder;
    builder.add_version(lib("a"), v("1.0"), 1000);
    CHECK_NOTHROW(builder.add_version(lib("a"), v("1.0"), 1000));
    try {
        builder.add_version(lib("a"), v("1.0"), 2000);
        FAIL("expected DuplicateVersion");
    } catch (const Error& err) {
        CHECK(err.kind() == ErrorKind::duplicate_version);
    }
}

TEST_CASE("resolve_requirement applies the strictly-before temporal rule") {
    GraphBuilder builder;
    builder.add_version(lib("a"), v("v1"), 1000);
    builder.add_version(lib("a"), v("v2"), 4000);

    // dependent released at T3: only A:v1 qualifies
    auto resolved = builder.resolve_requirement(lib("a"), Constraint::at_least(v("0")), 3000);
    REQUIRE(resolved.has_value());
    CHECK(*resolved == v("1.0.0"));

    // exactly the dependency's release time is not strictly before
    CHECK(!builder.resolve_requirement(lib("a"), Constraint::at_least(v("0")), 1000).has_value());
    CHECK(builder.resolve_requirement(lib("a"), Constraint::at_least(v("0")), 1001).has_value());

    CHECK(!builder.resolve_requirement(lib("a"), Constraint::unresolvable(), 9000).has_value());
    CHECK(!builder.resolve_requirement(lib("missing"), Constraint::at_least(v("0")), 9000).has_value());
}

TEST_CASE("resolve_requirement optimistic equals brute force over the version list") {
    GraphBuilder builder;
    builder.add_version(lib("a"), v("1.2.0"), 100);
    builder.add_version(lib("a"), v("1.9.0"), 200);
    builder.add_version(lib("a"), v("2.0.0"), 300);

    Constraint optimistic = Constraint::optimistic(v("1.2"));
    auto resolved = builder.resolve_requirement(lib("a"), optimistic, 400);
    REQUIRE(resolved.has_value());
    CHECK(*resolved == v("1.9.0"));

    // brute force: highest version satisfying constraint and released before
    struct Candidate {
        Version version;
        std::int64_t released;
    };
    std::vector<Candidate> list = {{v("1.2.0"), 100}, {v("1.9.0"), 200}, {v("2.0.0"), 300}};
    std::optional<Version> expected;
    for (const auto& candidate : list) {
        if (candidate.released < 400 && optimistic.satisfied_by(candidate.version)) {
            if (!expected || compare_versions(candidate.version, *expected) ==
                                 std::strong_ordering::greater) {
                expected = candidate.version;
            }
        }
    }
    CHECK(*resolved == *expected);
}

TEST_CASE("requirement sets resolve into manifest edges at build") {
    GraphBuilder builder;
    builder.add_version(lib("a"), v("1.0"), 1000);
    builder.add_version(lib("a"), v("2.0"), 4000);

    RequirementSet set;
    set.source_kind = SourceKind::cartfile;
    set.requirements.push_back(Requirement{lib("a"), Constraint::at_least(v("0"))});
    builder.add_requirements(lib("c"), v("1.0"), 3000, set);

    Graph graph = builder.build();
    auto c1 = graph.find(lib("c"), v("1.0"));
    REQUIRE(c1.has_value());
    REQUIRE(graph.node(*c1).deps.size() == 1);
    CHECK(graph.node(*c1).deps[0].to_version == v("1.0"));
    CHECK(graph.node(*c1).deps[0].provenance == Provenance::manifest_resolved);
    CHECK(graph.libraries().at(lib("c")).package_managers.contains(PackageManager::carthage));

    // temporal soundness of every manifest-resolved edge
    for (std::size_t i = 0; i < graph.nodes().size(); ++i) {
        for (const auto& edge : graph.out_edges(i)) {
            if (edge.provenance == Provenance::manifest_resolved) {
                CHECK(graph.node(edge.to).released < graph.node(i).released);
            }
        }
    }
}

TEST_CASE("manifest requirements prefer the owner's lockfile pin") {
    GraphBuilder builder;
    builder.add_version(lib("a"), v("1.0"), 1000);
    builder.add_version(lib("a"), v("1.5"), 1500);

    ResolvedManifest pins;
    pins.source_kind = SourceKind::carthage_resolved;
    pins.entries.push_back(ManifestEntry{lib("a"), v("1.0"), {}});
    builder.add_resolved(lib("app"), v("1.0"), 2000, pins);

    RequirementSet set;
    set.source_kind = SourceKind::cartfile;
    set.requirements.push_back(Requirement{lib("a"), Constraint::at_least(v("0"))});
    builder.add_requirements(lib("app"), v("1.0"), 2000, set);

    Graph graph = builder.build();
    auto app = graph.find(lib("app"), v("1.0"));
    REQUIRE(app.has_value());
    REQUIRE(graph.node(*app).deps.size() == 1);
    // the pin (1.0) wins over temporal resolution (1.5), with lockfile provenance
    CHECK(graph.node(*app).deps[0].to_version == v("1.0"));
    CHECK(graph.node(*app).deps[0].provenance == Provenance::lockfile);
}

TEST_CASE("latest_version picks max released with version tie-break") {
    Graph graph = fig1_graph();
    CHECK(latest_version(graph, lib("libraryc")).version == v("3.0.0"));
    CHECK(latest_version(graph, lib("librarya")).version == v("2.0.0"));

    GraphBuilder builder;
    builder.add_version(lib("solo"), v("0.1"), 10);
    builder.add_version(lib("tied"), v("1.0"), 500);
    builder.add_version(lib("tied"), v("1.1"), 500);
    Graph small = builder.build();
    CHECK(latest_version(small, lib("solo")).version == v("0.1"));
    CHECK(latest_version(small, lib("tied")).version == v("1.1"));

    try {
        latest_version(small, lib("absent"));
        FAIL("expected NoVersions");
    } catch (const Error& err) {
        CHECK(err.kind() == ErrorKind::no_versions);
    }
}

TEST_CASE("connected_libraries excludes isolated libraries and stub-only participation") {
    Graph graph = fig1_graph();
    auto connected = connected_libraries(graph);
    CHECK(connected == std::set<LibraryId>{lib("librarya"), lib("libraryb"), lib("libraryc")});

    GraphBuilder builder;
    builder.add_version(lib("isolated"), v("1.0"), 100);
    builder.add_dependency(lib("user"), v("1.0"), 200, lib("ghost"), v("1.0"),
                           Provenance::lockfile);
    Graph mixed = builder.build();
    auto set = connected_libraries(mixed);
    CHECK(set.contains(lib("user")));
    CHECK(!set.contains(lib("ghost")));  // stub-only participation
    CHECK(!set.contains(lib("isolated")));
}

TEST_CASE("persistence round-trips the fig1 fixture") {
    Graph graph = fig1_matched();
    std::string saved = save_graph_to_string(graph);
    Graph loaded = load_graph_from_string(saved);
    CHECK(loaded == graph);
    // canonical output: saving again is byte-identical
    CHECK(save_graph_to_string(loaded) == saved);
}

TEST_CASE("persistence tolerates record order permutation") {
    Graph graph = fig1_matched();
    std::string saved = save_graph_to_string(graph);

    std::vector<std::string> lines;
    std::istringstream in(saved);
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);

    std::mt19937_64 rng(7);
    std::shuffle(lines.begin(), lines.end(), rng);
    std::string shuffled;
    for (const auto& l : lines) shuffled += l + "\n";

    Graph loaded = load_graph_from_string(shuffled);
    CHECK(loaded == graph);
}

TEST_CASE("persistence reports the failing line on truncated input") {
    Graph graph = fig1_matched();
    std::string saved = save_graph_to_string(graph);
    std::string truncated = saved.substr(0, saved.size() / 2);
    // make sure the cut really lands mid-line
    while (!truncated.empty() && truncated.back() == '\n') truncated.pop_back();
    try {
        load_graph_from_string(truncated);
        FAIL("expected MalformedRecord");
    } catch (const Error& err) {
        CHECK(err.kind() == ErrorKind::malformed_record);
        CHECK(std::string(err.what()).find("line") != std::string::npos);
    }
}

TEST_CASE("persistence rejects duplicate version records") {
    std::string text =
        "{\"kind\":\"version\",\"library\":\"a\",\"version\":\"1.0\",\"released\":10,\"stub\":false}\n"
        "{\"kind\":\"version\",\"library\":\"a\",\"version\":\"1.0.0\",\"released\":20,\"stub\":false}\n";
    try {
        load_graph_from_string(text);
        FAIL("expected VersionConflict");
    } catch (const Error& err) {
        CHECK(err.kind() == ErrorKind::version_conflict);
    }
}

TEST_CASE("persistence round-trip identity on random synthetic graphs") {
    for (std::uint64_t seed = 1; seed <= 25; ++seed) {
        SynthParams params;
        params.library_count = 12;
        params.max_versions_per_library = 5;
        params.dependency_probability = 0.2;
        params.vulnerability_count = 4;
        params.fix_release_probability = 0.6;
        params.seed = seed;
        Graph graph = generate_ecosystem(params);
        Graph loaded = load_graph_from_string(save_graph_to_string(graph));
        CHECK(loaded == graph);
        CHECK(save_graph_to_string(loaded) == save_graph_to_string(graph));
    }
}

TEST_CASE("temporal soundness holds on synthetic graphs") {
    SynthParams params;
    params.library_count = 40;
    params.max_versions_per_library = 6;
    params.dependency_probability = 0.12;
    params.vulnerability_count = 6;
    params.fix_release_probability = 0.5;
    params.seed = 99;
    Graph graph = generate_ecosystem(params);

    for (std::size_t i = 0; i < graph.nodes().size(); ++i) {
        for (const auto& edge : graph.out_edges(i)) {
            // the generator resolves all targets temporally, so the check
            // covers lockfile edges too
            CHECK(graph.node(edge.to).released < graph.node(i).released);
        }
    }

    // latest_version has no successor by (released, version)
    for (const auto& [library, _] : graph.libraries()) {
        const auto& latest = latest_version(graph, library);
        for (std::size_t index : graph.versions_of(library)) {
            const auto& node = graph.node(index);
            if (node.stub) continue;
            bool later = node.released > latest.released ||
                         (node.released == latest.released &&
                          compare_versions(node.version, latest.version) ==
                              std::strong_ordering::greater);
            CHECK(!later);
        }
    }
}

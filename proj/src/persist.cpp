#include "depnet/persist.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "graph_access.hpp"

namespace depnet {

namespace {

using nlohmann::json;

json range_to_json(const VersionRange& range) {
    json out = json::object();
    out["start"] = range.start ? json(range.start->raw) : json(nullptr);
    out["start_inclusive"] = range.start_inclusive;
    out["end"] = range.end ? json(range.end->raw) : json(nullptr);
    out["end_inclusive"] = range.end_inclusive;
    return out;
}

VersionRange range_from_json(const json& value) {
    VersionRange range;
    if (value.contains("start") && value["start"].is_string()) {
        range.start = Version::parse(value["start"].get<std::string>());
    }
    if (value.contains("end") && value["end"].is_string()) {
        range.end = Version::parse(value["end"].get<std::string>());
    }
    range.start_inclusive = value.value("start_inclusive", true);
    range.end_inclusive = value.value("end_inclusive", false);
    return range;
}

json vuln_to_json(const VulnRecord& record) {
    json refs = json::array();
    for (const auto& reference : record.references) {
        refs.push_back({{"url", reference.url}, {"tags", reference.tags}});
    }
    json affected = json::array();
    for (const auto& entry : record.affected) {
        json ranges = json::array();
        for (const auto& range : entry.ranges) ranges.push_back(range_to_json(range));
        json exacts = json::array();
        for (const auto& exact : entry.exact_versions) exacts.push_back(exact.raw);
        affected.push_back({{"library", entry.library.canonical},
                            {"ranges", ranges},
                            {"exact_versions", exacts}});
    }
    return {{"kind", "vuln"},
            {"id", record.id},
            {"description", record.description},
            {"severity", std::string(to_string(record.severity))},
            {"published", record.published},
            {"references", refs},
            {"affected", affected}};
}

VulnRecord vuln_from_json(const json& value) {
    VulnRecord record;
    record.id = value.at("id").get<std::string>();
    record.description = value.value("description", "");
    record.severity = severity_from_string(value.value("severity", "UNKNOWN"));
    record.published = value.value("published", static_cast<std::int64_t>(0));
    if (value.contains("references")) {
        for (const auto& ref : value["references"]) {
            VulnReference reference;
            reference.url = ref.value("url", "");
            if (ref.contains("tags")) {
                for (const auto& tag : ref["tags"]) reference.tags.push_back(tag.get<std::string>());
            }
            record.references.push_back(std::move(reference));
        }
    }
    if (value.contains("affected")) {
        for (const auto& entry : value["affected"]) {
            AffectedLibrary affected;
            affected.library = LibraryId(entry.at("library").get<std::string>());
            if (entry.contains("ranges")) {
                for (const auto& range : entry["ranges"]) {
                    affected.ranges.push_back(range_from_json(range));
                }
            }
            if (entry.contains("exact_versions")) {
                for (const auto& exact : entry["exact_versions"]) {
                    affected.exact_versions.push_back(Version::parse(exact.get<std::string>()));
                }
            }
            record.affected.push_back(std::move(affected));
        }
    }
    return record;
}

}  // namespace

void save_graph(const Graph& graph, std::ostream& sink) {
    for (const auto& [id, library] : graph.libraries()) {
        json pms = json::array();
        for (auto pm : library.package_managers) pms.push_back(std::string(to_string(pm)));
        json record = {{"kind", "library"},
                       {"id", id.canonical},
                       {"language", library.language},
                       {"pms", pms}};
        sink << record.dump() << '\n';
    }
    for (const auto& node : graph.nodes()) {
        json record = {{"kind", "version"},
                       {"library", node.library.canonical},
                       {"version", node.version.raw},
                       {"released", node.released},
                       {"stub", node.stub}};
        sink << record.dump() << '\n';
    }
    for (const auto& node : graph.nodes()) {
        for (const auto& dep : node.deps) {
            json record = {{"kind", "dep"},
                           {"from", {node.library.canonical, node.version.raw}},
                           {"to", {dep.to_library.canonical, dep.to_version.raw}},
                           {"provenance", std::string(to_string(dep.provenance))}};
            sink << record.dump() << '\n';
        }
    }
    for (const auto& [id, record] : graph.vulns()) {
        sink << vuln_to_json(record).dump() << '\n';
    }
    for (std::size_t i = 0; i < graph.nodes().size(); ++i) {
        const auto& node = graph.node(i);
        for (const auto& vuln_id : graph.matches_of(i)) {
            json record = {{"kind", "match"},
                           {"library", node.library.canonical},
                           {"version", node.version.raw},
                           {"vuln", vuln_id}};
            sink << record.dump() << '\n';
        }
    }
}

std::string save_graph_to_string(const Graph& graph) {
    std::ostringstream out;
    save_graph(graph, out);
    return out.str();
}

Graph load_graph(std::istream& source) {
    std::map<LibraryId, Library> libraries;
    std::map<std::pair<LibraryId, std::string>, LibraryVersionNode> nodes;
    struct PendingDep {
        LibraryId from_library;
        Version from_version;
        DepEdge edge;
        std::size_t line;
    };
    std::vector<PendingDep> deps;
    std::map<std::string, VulnRecord> vulns;
    std::map<std::pair<LibraryId, std::string>, std::set<std::string>> matches;

    std::string line;
    std::size_t line_no = 0;
    auto fail = [&](const std::string& message) -> Error {
        return Error(ErrorKind::malformed_record, "line " + std::to_string(line_no) + ": " + message);
    };

    while (std::getline(source, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;

        json record = json::parse(line, nullptr, false);
        if (record.is_discarded() || !record.is_object()) {
            throw fail("not a JSON object");
        }
        std::string kind = record.value("kind", "");
        try {
            if (kind == "library") {
                Library library;
                library.id = LibraryId(record.at("id").get<std::string>());
                library.language = record.value("language", "UNKNOWN");
                if (record.contains("pms")) {
                    for (const auto& pm : record["pms"]) {
                        library.package_managers.insert(
                            package_manager_from_string(pm.get<std::string>()));
                    }
                }
                if (!libraries.emplace(library.id, library).second) {
                    throw Error(ErrorKind::version_conflict,
                                "duplicate library record " + library.id.canonical);
                }
            } else if (kind == "version") {
                LibraryVersionNode node;
                node.library = LibraryId(record.at("library").get<std::string>());
                node.version = Version::parse(record.at("version").get<std::string>());
                node.released = record.value("released", static_cast<std::int64_t>(0));
                node.stub = record.value("stub", false);
                auto key = std::make_pair(node.library, node.version.canonical());
                if (!nodes.emplace(key, std::move(node)).second) {
                    throw Error(ErrorKind::version_conflict,
                                "duplicate version record " + key.first.canonical + "@" + key.second);
                }
            } else if (kind == "dep") {
                const auto& from = record.at("from");
                const auto& to = record.at("to");
                if (!from.is_array() || from.size() != 2 || !to.is_array() || to.size() != 2) {
                    throw fail("dep endpoints must be [library, version] pairs");
                }
                PendingDep dep;
                dep.from_library = LibraryId(from[0].get<std::string>());
                dep.from_version = Version::parse(from[1].get<std::string>());
                dep.edge.to_library = LibraryId(to[0].get<std::string>());
                dep.edge.to_version = Version::parse(to[1].get<std::string>());
                dep.edge.provenance =
                    provenance_from_string(record.value("provenance", "lockfile"));
                dep.line = line_no;
                deps.push_back(std::move(dep));
            } else if (kind == "vuln") {
                VulnRecord vuln = vuln_from_json(record);
                if (!vulns.emplace(vuln.id, vuln).second) {
                    throw Error(ErrorKind::version_conflict, "duplicate vuln record " + vuln.id);
                }
            } else if (kind == "match") {
                LibraryId library(record.at("library").get<std::string>());
                Version version = Version::parse(record.at("version").get<std::string>());
                matches[{library, version.canonical()}].insert(
                    record.at("vuln").get<std::string>());
            } else {
                throw fail("unknown record kind '" + kind + "'");
            }
        } catch (const json::exception& err) {
            throw fail(err.what());
        } catch (const Error& err) {
            if (err.kind() == ErrorKind::version_conflict) throw;
            throw fail(err.what());
        }
    }

    for (auto& dep : deps) {
        auto from = nodes.find({dep.from_library, dep.from_version.canonical()});
        if (from == nodes.end()) {
            throw Error(ErrorKind::malformed_record,
                        "line " + std::to_string(dep.line) + ": dep from unknown version " +
                            dep.from_library.canonical + "@" + dep.from_version.canonical());
        }
        if (!nodes.contains({dep.edge.to_library, dep.edge.to_version.canonical()})) {
            throw Error(ErrorKind::malformed_record,
                        "line " + std::to_string(dep.line) + ": dep to unknown version " +
                            dep.edge.to_library.canonical + "@" + dep.edge.to_version.canonical());
        }
        from->second.deps.push_back(std::move(dep.edge));
    }

    for (auto& [key, ids] : matches) {
        if (!nodes.contains(key)) {
            throw Error(ErrorKind::malformed_record,
                        "match references unknown version " + key.first.canonical + "@" + key.second);
        }
        for (const auto& id : ids) {
            if (!vulns.contains(id)) {
                throw Error(ErrorKind::malformed_record,
                            "match references unknown vulnerability " + id);
            }
        }
    }

    std::vector<LibraryVersionNode> node_list;
    node_list.reserve(nodes.size());
    for (auto& [key, node] : nodes) {
        if (!libraries.contains(key.first)) {
            // tolerate version records without a library record
            Library library;
            library.id = key.first;
            libraries.emplace(key.first, std::move(library));
        }
        node_list.push_back(std::move(node));
    }
    return GraphAccess::assemble(std::move(libraries), std::move(node_list), std::move(vulns),
                                 std::move(matches));
}

Graph load_graph_from_string(const std::string& text) {
    std::istringstream in(text);
    return load_graph(in);
}

void save_graph_to_file(const Graph& graph, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error(ErrorKind::io_error, "cannot open '" + path + "' for writing");
    }
    save_graph(graph, out);
}

Graph load_graph_from_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorKind::io_error, "cannot open '" + path + "' for reading");
    }
    return load_graph(in);
}

}  // namespace depnet

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "depnet/graph.hpp"
#include "depnet/ingest.hpp"
#include "depnet/matcher.hpp"
#include "depnet/persist.hpp"
#include "depnet/precision.hpp"
#include "depnet/propagation.hpp"
#include "depnet/synth.hpp"
#include "depnet/upgrade.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace depnet;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorKind::io_error, "cannot open '" + path + "'");
    }
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string quoted = "\"";
    for (char c : field) {
        if (c == '"') quoted += '"';
        quoted += c;
    }
    quoted += '"';
    return quoted;
}

std::string fixed6(double value) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.6f", value);
    return buffer;
}

// Reports go to --out (default stdout); warnings to --warnings (default stderr).
struct OutputTarget {
    std::string path;  // empty: stdout

    void write(const std::string& content) const {
        if (path.empty()) {
            std::cout << content;
            return;
        }
        std::ofstream out(path, std::ios::binary);
        if (!out) {
            throw Error(ErrorKind::io_error, "cannot open '" + path + "' for writing");
        }
        out << content;
    }
};

void emit_warnings(const Warnings& warnings, const std::string& path) {
    std::ostringstream buffer;
    for (const auto& warning : warnings) {
        json record = {{"source", warning.source}, {"message", warning.message}};
        buffer << record.dump() << '\n';
    }
    if (path.empty()) {
        std::cerr << buffer.str();
    } else {
        std::ofstream out(path, std::ios::binary);
        if (!out) {
            throw Error(ErrorKind::io_error, "cannot open '" + path + "' for writing");
        }
        out << buffer.str();
    }
}

// --- ingest ------------------------------------------------------------------

struct IndexEntry {
    LibraryId library;
    Version version;
    std::int64_t released = 0;
    std::string kind;
    std::string path;  // empty for kind "none"
};

std::vector<IndexEntry> load_index(const std::string& path) {
    std::string text = read_file(path);
    std::vector<IndexEntry> entries;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    fs::path base = fs::path(path).parent_path();
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        json record = json::parse(line, nullptr, false);
        if (record.is_discarded() || !record.is_object()) {
            throw Error(ErrorKind::malformed_record,
                        "index line " + std::to_string(line_no) + " is not a JSON object");
        }
        IndexEntry entry;
        try {
            entry.library = LibraryId::from_repo_url(record.at("library").get<std::string>());
            entry.version = Version::parse(record.at("version").get<std::string>());
            entry.released = record.at("released").get<std::int64_t>();
            entry.kind = record.value("kind", "none");
            if (entry.kind != "none") {
                fs::path file = record.at("path").get<std::string>();
                entry.path = file.is_absolute() ? file.string() : (base / file).string();
            }
        } catch (const json::exception& err) {
            throw Error(ErrorKind::malformed_record,
                        "index line " + std::to_string(line_no) + ": " + err.what());
        }
        entries.push_back(std::move(entry));
    }
    return entries;
}

int run_ingest(const std::string& index_path, const std::string& metadata_path,
               const std::string& out_path, const std::string& warnings_path) {
    Warnings warnings;
    GraphBuilder builder;

    for (const auto& entry : load_index(index_path)) {
        if (entry.kind == "none") {
            builder.add_version(entry.library, entry.version, entry.released);
            continue;
        }
        std::string text;
        try {
            text = read_file(entry.path);
        } catch (const Error& err) {
            warn(&warnings, entry.path, std::string("skipped: ") + err.what());
            continue;
        }
        try {
            if (entry.kind == "podfile.lock") {
                builder.add_resolved(entry.library, entry.version, entry.released,
                                     parse_podfile_lock(text, &warnings));
            } else if (entry.kind == "cartfile.resolved") {
                builder.add_resolved(entry.library, entry.version, entry.released,
                                     parse_cartfile_resolved(text, &warnings));
            } else if (entry.kind == "package.resolved") {
                builder.add_resolved(entry.library, entry.version, entry.released,
                                     parse_package_resolved(text, &warnings));
            } else if (entry.kind == "podfile") {
                builder.add_requirements(
                    entry.library, entry.version, entry.released,
                    parse_manifest_requirements(text, ManifestKind::cocoapods, &warnings));
            } else if (entry.kind == "cartfile") {
                builder.add_requirements(
                    entry.library, entry.version, entry.released,
                    parse_manifest_requirements(text, ManifestKind::carthage, &warnings));
            } else if (entry.kind == "package.swift") {
                builder.add_requirements(
                    entry.library, entry.version, entry.released,
                    parse_manifest_requirements(text, ManifestKind::swiftpm, &warnings));
            } else {
                throw Error(ErrorKind::malformed_record, "unknown index kind '" + entry.kind + "'");
            }
        } catch (const Error& err) {
            if (err.kind() == ErrorKind::duplicate_version) throw;
            warn(&warnings, entry.path, std::string("file skipped: ") + err.what());
            builder.add_version(entry.library, entry.version, entry.released);
        }
    }

    if (!metadata_path.empty()) {
        for (const auto& meta : load_library_metadata(read_file(metadata_path), &warnings)) {
            builder.add_metadata(meta);
        }
    }

    Graph graph = builder.build(&warnings);
    save_graph_to_file(graph, out_path);
    emit_warnings(warnings, warnings_path);
    return 0;
}

// --- import-vulns --------------------------------------------------------------

int run_import_vulns(const std::string& graph_path, const std::string& feed_path,
                     const std::string& mapping_path, const std::string& out_path,
                     const OutputTarget& report, bool as_json,
                     const std::string& warnings_path) {
    Warnings warnings;
    Graph graph = load_graph_from_file(graph_path);
    auto mapping = load_product_mapping(read_file(mapping_path), &warnings);
    auto imported = import_nvd_feed(read_file(feed_path), mapping, &warnings);
    if (imported.unmapped_dropped > 0) {
        warn(&warnings, "nvd",
             std::to_string(imported.unmapped_dropped) + " feed item(s) with only unmapped products");
    }

    auto result = match_vulnerabilities(graph, imported.records, &warnings);
    save_graph_to_file(result.graph, out_path);

    std::ostringstream out;
    if (as_json) {
        json doc;
        doc["imported"] = imported.records.size();
        doc["unmapped_dropped"] = imported.unmapped_dropped;
        json matches = json::object();
        for (const auto& [id, count] : result.per_vuln_matches) matches[id] = count;
        doc["matches"] = matches;
        out << doc.dump(2) << '\n';
    } else {
        out << "vuln_id,matches\n";
        for (const auto& [id, count] : result.per_vuln_matches) {
            out << csv_escape(id) << ',' << count << '\n';
        }
    }
    report.write(out.str());
    emit_warnings(warnings, warnings_path);
    return 0;
}

// --- stats -------------------------------------------------------------------

int run_stats(const std::string& graph_path, const OutputTarget& report, bool as_json) {
    Graph graph = load_graph_from_file(graph_path);
    auto stats = ecosystem_stats(graph);

    std::ostringstream out;
    if (as_json) {
        json doc = {{"total_libraries", stats.total_libraries},
                    {"total_vulnerabilities", stats.total_vulnerabilities},
                    {"vulns_per_10k", stats.vulns_per_10k},
                    {"connected_count", stats.connected_count},
                    {"connected_affected_fraction", stats.connected_affected_fraction},
                    {"latest_affected_fraction", stats.latest_affected_fraction},
                    {"max_chain_level", stats.max_chain_level}};
        out << doc.dump(2) << '\n';
    } else {
        out << "metric,value\n";
        out << "total_libraries," << stats.total_libraries << '\n';
        out << "total_vulnerabilities," << stats.total_vulnerabilities << '\n';
        out << "vulns_per_10k," << fixed6(stats.vulns_per_10k) << '\n';
        out << "connected_count," << stats.connected_count << '\n';
        out << "connected_affected_fraction," << fixed6(stats.connected_affected_fraction) << '\n';
        out << "latest_affected_fraction," << fixed6(stats.latest_affected_fraction) << '\n';
        out << "max_chain_level," << stats.max_chain_level << '\n';
    }
    report.write(out.str());
    return 0;
}

// --- propagation ----------------------------------------------------------------

std::string propagation_table(const PropagationReport& report) {
    std::ostringstream out;
    out << "level,count,stratum\n";
    for (const auto& row : report.rows) {
        out << row.level << ',' << row.count << ',' << csv_escape(row.stratum) << '\n';
    }
    return out.str();
}

int run_propagation(const std::string& graph_path, const std::string& mode,
                    const std::string& stratify, const std::string& multiplicity,
                    const OutputTarget& report_target, bool as_json,
                    const std::string& plot_path) {
    Graph graph = load_graph_from_file(graph_path);
    HistogramMode histogram_mode = mode == "all-levels" ? HistogramMode::all_levels
                                                        : HistogramMode::shortest_per_library;
    Stratify strata = stratify == "language"   ? Stratify::language
                      : stratify == "severity" ? Stratify::severity
                                               : Stratify::none;
    bool all_lengths = multiplicity == "all-lengths";
    auto report = propagation_histogram(graph, histogram_mode, strata, all_lengths);

    std::ostringstream out;
    if (as_json) {
        json rows = json::array();
        for (const auto& row : report.rows) {
            rows.push_back({{"level", row.level}, {"count", row.count}, {"stratum", row.stratum}});
        }
        json doc = {{"mode", mode},
                    {"stratify", stratify},
                    {"multiplicity", multiplicity},
                    {"rows", rows},
                    {"affected_libraries", report.affected_libraries},
                    {"max_level", report.max_level}};
        out << doc.dump(2) << '\n';
    } else {
        out << propagation_table(report);
    }
    report_target.write(out.str());
    if (!plot_path.empty()) {
        OutputTarget{plot_path}.write(propagation_table(report));
    }
    return 0;
}

// --- upgrades -------------------------------------------------------------------

int run_upgrades(const std::string& graph_path, const std::string& scope_text,
                 const std::string& mode_text, const std::string& group_text,
                 const OutputTarget& report_target, bool as_json, const std::string& plot_path) {
    Graph graph = load_graph_from_file(graph_path);
    ChainScope scope = scope_text == "latest" ? ChainScope::latest_only : ChainScope::all_versions;
    FixMode mode = mode_text == "vuln-aware" ? FixMode::vuln_aware : FixMode::strict_version;
    FixGrouping grouping = group_text == "severity"   ? FixGrouping::severity
                           : group_text == "language" ? FixGrouping::language
                                                      : FixGrouping::level;

    auto report = fixability_report(graph, grouping, scope, mode);
    std::optional<Quartiles> quartiles;
    try {
        quartiles = per_vuln_fix_rate_quartiles(graph, scope, mode);
    } catch (const Error& err) {
        if (err.kind() != ErrorKind::no_chains) throw;
    }

    std::ostringstream out;
    if (as_json) {
        json rows = json::array();
        for (const auto& row : report.rows) {
            rows.push_back({{"group", row.group},
                            {"fixed", row.fixed_count},
                            {"not_fixed", row.not_fixed_count},
                            {"fixed_fraction", row.fixed_fraction}});
        }
        json doc = {{"grouping", group_text},
                    {"scope", scope_text},
                    {"mode", mode_text},
                    {"rows", rows},
                    {"excluded_chains", report.excluded_chain_count},
                    {"total_chains", report.total_chains}};
        if (quartiles) {
            doc["per_vuln_fix_rate_quartiles"] = {
                {"q1", quartiles->q1}, {"median", quartiles->median}, {"q3", quartiles->q3}};
        }
        out << doc.dump(2) << '\n';
    } else {
        out << "group,fixed,not_fixed,fixed_fraction\n";
        for (const auto& row : report.rows) {
            out << csv_escape(row.group) << ',' << row.fixed_count << ',' << row.not_fixed_count
                << ',' << fixed6(row.fixed_fraction) << '\n';
        }
        out << "\nmetric,value\n";
        out << "excluded_chains," << report.excluded_chain_count << '\n';
        out << "total_chains," << report.total_chains << '\n';
        if (quartiles) {
            out << "per_vuln_q1," << fixed6(quartiles->q1) << '\n';
            out << "per_vuln_median," << fixed6(quartiles->median) << '\n';
            out << "per_vuln_q3," << fixed6(quartiles->q3) << '\n';
        }
    }
    report_target.write(out.str());

    if (!plot_path.empty()) {
        // Fig. 5 shape: per-level fixed / not-fixed counts
        auto by_level = grouping == FixGrouping::level
                            ? report
                            : fixability_report(graph, FixGrouping::level, scope, mode);
        std::ostringstream plot;
        plot << "level,fixed,not_fixed\n";
        for (const auto& row : by_level.rows) {
            plot << csv_escape(row.group) << ',' << row.fixed_count << ',' << row.not_fixed_count
                 << '\n';
        }
        OutputTarget{plot_path}.write(plot.str());
    }
    return 0;
}

// --- precision ------------------------------------------------------------------

int run_precision(const std::string& graph_path, const std::string& patterns_path,
                  const OutputTarget& report_target, bool as_json) {
    Graph graph = load_graph_from_file(graph_path);
    PatternSet patterns =
        patterns_path.empty() ? default_pattern_set() : load_pattern_set(read_file(patterns_path));

    std::vector<PrecisionFlags> flags;
    for (const auto& [id, record] : graph.vulns()) {
        flags.push_back(scan_vulnerability(record, patterns));
    }
    auto report = precision_report(flags, graph);

    std::ostringstream out;
    if (as_json) {
        json flag_rows = json::array();
        for (const auto& entry : flags) {
            json evidence = json::array();
            for (const auto& item : entry.evidence) {
                evidence.push_back({{"field", item.field},
                                    {"matched_text", item.matched_text},
                                    {"pattern", item.pattern_name}});
            }
            flag_rows.push_back({{"vuln_id", entry.vuln_id},
                                 {"method", entry.mentions_method},
                                 {"class", entry.mentions_class},
                                 {"file", entry.mentions_file},
                                 {"patch_link", entry.has_patch_link},
                                 {"evidence", evidence}});
        }
        json language_rows = json::array();
        for (const auto& row : report.rows) {
            language_rows.push_back({{"language", row.language},
                                     {"vulnerabilities", row.vulnerabilities},
                                     {"method", row.method},
                                     {"class", row.class_},
                                     {"both", row.both}});
        }
        json doc = {{"flags", flag_rows}, {"by_language", language_rows}};
        out << doc.dump(2) << '\n';
    } else {
        out << "vuln_id,method,class,file,patch_link\n";
        for (const auto& entry : flags) {
            out << csv_escape(entry.vuln_id) << ',' << (entry.mentions_method ? 1 : 0) << ','
                << (entry.mentions_class ? 1 : 0) << ',' << (entry.mentions_file ? 1 : 0) << ','
                << (entry.has_patch_link ? 1 : 0) << '\n';
        }
        out << "\nlanguage,vulnerabilities,method,class,both\n";
        for (const auto& row : report.rows) {
            out << csv_escape(row.language) << ',' << row.vulnerabilities << ',' << row.method
                << ',' << row.class_ << ',' << row.both << '\n';
        }
    }
    report_target.write(out.str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"depnet: temporal library dependency graphs and vulnerability propagation"};
    app.require_subcommand(1);

    std::string index_path, metadata_path, graph_path, out_path, warnings_path;
    std::string feed_path, mapping_path, patterns_path, plot_path;
    std::string format = "csv";
    std::string mode = "shortest", stratify = "none", multiplicity = "min";
    std::string scope = "all", fix_mode = "strict", group = "level";
    SynthParams synth_params;

    auto* ingest = app.add_subcommand("ingest", "parse resolution files and build a graph");
    ingest->add_option("--index", index_path, "NDJSON index of input files")
        ->required()
        ->check(CLI::ExistingFile);
    ingest->add_option("--metadata", metadata_path, "library metadata sidecar")
        ->check(CLI::ExistingFile);
    ingest->add_option("--out", out_path, "graph output path")->required();
    ingest->add_option("--warnings", warnings_path, "warnings NDJSON path (default stderr)");

    auto* import = app.add_subcommand("import-vulns", "match a vulnerability feed onto a graph");
    import->add_option("--graph", graph_path, "input graph")->required()->check(CLI::ExistingFile);
    import->add_option("--feed", feed_path, "NVD 1.1 feed document")
        ->required()
        ->check(CLI::ExistingFile);
    import->add_option("--mapping", mapping_path, "product-to-library mapping (NDJSON)")
        ->required()
        ->check(CLI::ExistingFile);
    import->add_option("--out", out_path, "matched graph output path")->required();
    std::string import_report;
    import->add_option("--report", import_report, "match-count report path (default stdout)");
    import->add_option("--format", format, "csv|json")
        ->check(CLI::IsMember({"csv", "json"}));
    import->add_option("--warnings", warnings_path, "warnings NDJSON path (default stderr)");

    auto* stats = app.add_subcommand("stats", "ecosystem statistics");
    stats->add_option("--graph", graph_path, "input graph")->required()->check(CLI::ExistingFile);
    std::string stats_out;
    stats->add_option("--out", stats_out, "report path (default stdout)");
    stats->add_option("--format", format, "csv|json")->check(CLI::IsMember({"csv", "json"}));

    auto* propagation = app.add_subcommand("propagation", "vulnerability propagation histogram");
    propagation->add_option("--graph", graph_path, "input graph")
        ->required()
        ->check(CLI::ExistingFile);
    propagation->add_option("--mode", mode, "shortest|all-levels")
        ->check(CLI::IsMember({"shortest", "all-levels"}));
    propagation->add_option("--stratify", stratify, "none|language|severity")
        ->check(CLI::IsMember({"none", "language", "severity"}));
    propagation->add_option("--multiplicity", multiplicity,
                            "min|all-lengths (all-levels mode only)")
        ->check(CLI::IsMember({"min", "all-lengths"}));
    std::string propagation_out;
    propagation->add_option("--out", propagation_out, "report path (default stdout)");
    propagation->add_option("--plot-data", plot_path, "plot-data CSV path");
    propagation->add_option("--format", format, "csv|json")->check(CLI::IsMember({"csv", "json"}));

    auto* upgrades = app.add_subcommand("upgrades", "upgrade-fixability of vulnerable chains");
    upgrades->add_option("--graph", graph_path, "input graph")
        ->required()
        ->check(CLI::ExistingFile);
    upgrades->add_option("--scope", scope, "all|latest")->check(CLI::IsMember({"all", "latest"}));
    upgrades->add_option("--mode", fix_mode, "strict|vuln-aware")
        ->check(CLI::IsMember({"strict", "vuln-aware"}));
    upgrades->add_option("--group", group, "level|severity|language")
        ->check(CLI::IsMember({"level", "severity", "language"}));
    std::string upgrades_out;
    upgrades->add_option("--out", upgrades_out, "report path (default stdout)");
    upgrades->add_option("--plot-data", plot_path, "per-level plot-data CSV path");
    upgrades->add_option("--format", format, "csv|json")->check(CLI::IsMember({"csv", "json"}));

    auto* precision = app.add_subcommand("precision", "code-location precision of vuln records");
    precision->add_option("--graph", graph_path, "input graph")
        ->required()
        ->check(CLI::ExistingFile);
    precision->add_option("--patterns", patterns_path, "pattern set JSON (default built-in)")
        ->check(CLI::ExistingFile);
    std::string precision_out;
    precision->add_option("--out", precision_out, "report path (default stdout)");
    precision->add_option("--format", format, "csv|json")->check(CLI::IsMember({"csv", "json"}));

    auto* synth = app.add_subcommand("synth", "generate a seeded synthetic ecosystem");
    synth->add_option("--libraries", synth_params.library_count, "library count")->required();
    synth->add_option("--max-versions", synth_params.max_versions_per_library,
                      "max versions per library");
    synth->add_option("--dep-prob", synth_params.dependency_probability,
                      "dependency probability in [0,1]");
    synth->add_option("--vulns", synth_params.vulnerability_count, "vulnerability count");
    synth->add_option("--fix-prob", synth_params.fix_release_probability,
                      "fix release probability in [0,1]");
    synth->add_option("--seed", synth_params.seed, "RNG seed");
    synth->add_option("--out", out_path, "graph output path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        // prints the offending flag; usage errors exit 1, --help exits 0
        return app.exit(err) == 0 ? 0 : 1;
    }

    try {
        bool as_json = format == "json";
        if (ingest->parsed()) {
            return run_ingest(index_path, metadata_path, out_path, warnings_path);
        }
        if (import->parsed()) {
            return run_import_vulns(graph_path, feed_path, mapping_path, out_path,
                                    OutputTarget{import_report}, as_json, warnings_path);
        }
        if (stats->parsed()) {
            return run_stats(graph_path, OutputTarget{stats_out}, as_json);
        }
        if (propagation->parsed()) {
            return run_propagation(graph_path, mode, stratify, multiplicity,
                                   OutputTarget{propagation_out}, as_json, plot_path);
        }
        if (upgrades->parsed()) {
            return run_upgrades(graph_path, scope, fix_mode, group, OutputTarget{upgrades_out},
                                as_json, plot_path);
        }
        if (precision->parsed()) {
            return run_precision(graph_path, patterns_path, OutputTarget{precision_out}, as_json);
        }
        if (synth->parsed()) {
            synth_params.validate();
            Graph graph = generate_ecosystem(synth_params);
            save_graph_to_file(graph, out_path);
            return 0;
        }
    } catch (const Error& err) {
        std::cerr << "error: " << err.what() << '\n';
        return 1;
    } catch (const std::exception& err) {
        std::cerr << "internal error: " << err.what() << '\n';
        return 2;
    }
    return 2;
}
